"""Correlation coefficients over configuration points"""

import logging

import numpy as np
from scipy import stats

from errors import CorrelationUndefinedError

logger = logging.getLogger(__name__)


def _as_pair(xs, ys):
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise CorrelationUndefinedError(f"need two equal-length sequences, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise CorrelationUndefinedError(f"need at least 2 points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise CorrelationUndefinedError("non-finite values")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise CorrelationUndefinedError("zero variance")
    return x, y


def _checked(coef, label):
    coef = float(coef)
    if not np.isfinite(coef):
        raise CorrelationUndefinedError(f"{label} is undefined for these points")
    return min(1.0, max(-1.0, coef))


def pearson(xs, ys):
    """Sample Pearson coefficient, clipped to [-1, 1]"""
    x, y = _as_pair(xs, ys)
    coef, _ = stats.pearsonr(x, y)
    return _checked(coef, "pearson")


def spearman(xs, ys):
    """
    Spearman rank coefficient with average ranks for ties

    Identical or exactly reversed rankings give exactly +1 or -1.
    """
    x, y = _as_pair(xs, ys)
    rx, ry = stats.rankdata(x), stats.rankdata(y)
    if np.array_equal(rx, ry):
        return 1.0
    if np.array_equal(rx, x.size + 1 - ry):
        return -1.0
    coef, _ = stats.spearmanr(x, y)
    logger.debug(f"spearman over {x.size} points: {float(coef):.6f}")
    return _checked(coef, "spearman")
