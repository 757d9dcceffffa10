"""
Prioritized sampling for supervised training
Samples are drawn with probability proportional to (loss + floor) ** alpha
and their gradients reweighted by normalized importance weights.
"""

import logging
from dataclasses import dataclass

import numpy as np

from errors import ConfigError

logger = logging.getLogger(__name__)

# Floor on priorities, as a fraction of the loss bound M
PRIORITY_FLOOR_FRACTION = 1e-3


@dataclass(frozen=True)
class PrioritizedDraw:
    indices: np.ndarray
    weights: np.ndarray
    probabilities: np.ndarray


def sampling_probabilities(losses, exponent, floor):
    losses = np.asarray(losses, dtype=np.float64)
    if np.any(losses < 0):
        raise ConfigError("priorities need non-negative losses")
    if exponent < 0:
        raise ConfigError(f"priority exponent must be non-negative, got {exponent}")
    priorities = (losses + floor) ** exponent
    total = priorities.sum()
    if total <= 0.0:
        return np.full(losses.shape[0], 1.0 / losses.shape[0])
    return priorities / total


def prioritized_sample(losses, exponent, count, rng, floor=0.0):
    """
    Draw `count` indices with replacement

    Importance weights are (n * p_i) ** -1 divided by their maximum over the draw.
    exponent = 0 samples uniformly.
    """
    probabilities = sampling_probabilities(losses, exponent, floor)
    n = probabilities.shape[0]
    indices = rng.choice(n, size=count, replace=True, p=probabilities)
    weights = 1.0 / (n * probabilities[indices])
    if weights.size:
        weights = weights / weights.max()
    return PrioritizedDraw(indices=indices, weights=weights, probabilities=probabilities)
