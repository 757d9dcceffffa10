"""
Brute-force deviation oracle for tiny inputs

Enumerates a grid over the perturbation ball to lower-bound the true maximal
loss deviation and check the linearized solver against it.
"""

import itertools
import logging

import numpy as np

from errors import ConfigError, OracleScopeError
from networks.mlp import per_sample_losses
from robustness.perturbation import adversarial_perturbation

logger = logging.getLogger(__name__)

MAX_ORACLE_DIM = 4
# Relative slack when testing grid points for ball membership
BALL_TOLERANCE = 1e-12


def ball_grid(d, spec, grid_points):
    """Grid points of [-r, r]^d inside the norm ball plus the +-r axis points"""
    r = spec.radius
    axis = np.linspace(-r, r, grid_points)
    grid = np.array(list(itertools.product(axis, repeat=d)), dtype=np.float64)
    ord_ = {"L1": 1, "L2": 2, "Linf": np.inf}[spec.norm]
    inside = np.linalg.norm(grid, ord=ord_, axis=1) <= r * (1.0 + BALL_TOLERANCE)
    axes = np.vstack([r * np.eye(d), -r * np.eye(d)])
    return np.vstack([grid[inside], axes])


def brute_force_deviation_oracle(model, sample, label, spec, grid_points, bound):
    """Maximum of |l(s) - l(s + ds)| over the grid, the axis points and the linearized ds"""
    sample = np.asarray(sample, dtype=np.float64)
    d = sample.shape[0]
    if d > MAX_ORACLE_DIM:
        raise OracleScopeError(f"oracle enumerates at most {MAX_ORACLE_DIM} dimensions, got {d}")
    if grid_points < 3:
        raise ConfigError(f"oracle needs at least 3 grid points per axis, got {grid_points}")
    if spec.radius == 0.0:
        return 0.0

    deltas = np.vstack([
        ball_grid(d, spec, grid_points),
        adversarial_perturbation(model, sample, label, spec, bound)[None, :],
    ])
    points = sample[None, :] + deltas
    if spec.clamp_to_unit_box:
        points = np.clip(points, 0.0, 1.0)
    labels = np.full(points.shape[0], label)
    perturbed = per_sample_losses(model, points, labels, bound)
    clean = per_sample_losses(model, sample[None, :], np.array([label]), bound)[0]
    return float(np.max(np.abs(clean - perturbed)))
