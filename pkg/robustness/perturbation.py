"""
Closed-form adversarial perturbations

Maximizes the first-order expansion <g, ds> of the loss over a norm ball
of radius r, g being the input gradient of the loss.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from errors import ConfigError, NumericError
from networks.mlp import input_gradients

logger = logging.getLogger(__name__)

NORMS = ("L1", "L2", "Linf")

# Norm whose value is the maximum of <g, ds> over the unit ball
DUAL_ORD = {"L1": np.inf, "L2": 2, "Linf": 1}


@dataclass(frozen=True)
class PerturbationSpec:
    """Norm geometry and radius of the adversarial neighborhood"""

    norm: str = "Linf"
    radius: float = 0.1
    clamp_to_unit_box: bool = False

    def __post_init__(self):
        if self.norm not in NORMS:
            raise ConfigError(f"norm must be one of {NORMS}, got {self.norm!r}")
        if not math.isfinite(self.radius) or self.radius < 0:
            raise ConfigError(f"perturbation radius must be finite and non-negative, got {self.radius}")


def solve_linearized(gradients, spec):
    """
    Row-wise maximizer of <g, ds> subject to ||ds|| <= r

    Linf -> r * sign(g); L2 -> r * g / ||g||; L1 -> r * sign(g_j) e_j at the
    lowest index j of maximal |g_j|. A zero gradient gives a zero perturbation.
    """
    g = np.atleast_2d(np.asarray(gradients, dtype=np.float64))
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite input gradient")
    r = spec.radius
    if spec.norm == "Linf":
        return r * np.sign(g)
    if spec.norm == "L2":
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        safe = np.where(norms > 0.0, norms, 1.0)
        return np.where(norms > 0.0, r * g / safe, 0.0)
    delta = np.zeros_like(g)
    rows = np.arange(g.shape[0])
    columns = np.argmax(np.abs(g), axis=1)
    delta[rows, columns] = r * np.sign(g[rows, columns])
    return delta


def apply_perturbation(features, delta, spec):
    """s + ds, clamped to the unit box when clamp_to_unit_box is set"""
    perturbed = features + delta
    if spec.clamp_to_unit_box:
        perturbed = np.clip(perturbed, 0.0, 1.0)
    return perturbed


def perturb_batch(model, features, labels, spec, bound):
    """
    Adversarial versions of every row

    Returns:
        (clean losses, perturbed features)
    """
    features = np.asarray(features, dtype=np.float64)
    losses, gradients = input_gradients(model, features, labels, bound)
    return losses, apply_perturbation(features, solve_linearized(gradients, spec), spec)


def adversarial_perturbation(model, sample, label, spec, bound):
    """Perturbation ds for one sample, including the unit-box clamp when enabled"""
    sample = np.asarray(sample, dtype=np.float64)
    _, gradients = input_gradients(model, sample[None, :], np.array([label]), bound)
    delta = solve_linearized(gradients, spec)[0]
    if spec.clamp_to_unit_box:
        delta = np.clip(sample + delta, 0.0, 1.0) - sample
    return delta
