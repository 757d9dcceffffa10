"""
Bounded cross-entropy loss
Clamps the true-class probability at exp(-M) so the loss lies in [0, M]
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from errors import ConfigError, NumericError

logger = logging.getLogger(__name__)

# ln 100: a clamped sample has probability below 1%
DEFAULT_LOSS_BOUND = math.log(100.0)


@dataclass(frozen=True)
class BoundedLoss:
    """Upper bound M on the loss and the matching probability floor"""

    M: float = DEFAULT_LOSS_BOUND

    def __post_init__(self):
        if not math.isfinite(self.M) or self.M <= 0:
            raise ConfigError(f"loss bound M must be a positive finite number, got {self.M}")

    @property
    def p_min(self):
        return math.exp(-self.M)


def log_true_class_probability(logits, labels):
    """
    Row-wise ln softmax(logits)[label] for a (B, C) logit matrix
    """
    logits = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logits")
    rows = np.arange(logits.shape[0])
    return logits[rows, labels] - logsumexp(logits, axis=1)


def batch_bounded_losses(logits, labels, bound):
    """
    Bounded loss for every row plus the mask of rows where the clamp is inactive

    Returns:
        (losses, active) where active[i] is False on the flat clamped region
    """
    raw = -log_true_class_probability(logits, labels)
    active = raw <= bound.M
    losses = np.clip(raw, 0.0, bound.M)
    return losses, active


def bounded_cross_entropy(logits, label, bound):
    """-ln(max(softmax(logits)[label], p_min)), always within [0, M]"""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1:
        raise ConfigError(f"expected a logit vector, got shape {logits.shape}")
    if not 0 <= label < logits.shape[0]:
        raise ConfigError(f"label {label} outside {logits.shape[0]} classes")
    losses, _ = batch_bounded_losses(logits[None, :], np.array([label]), bound)
    return float(losses[0])
