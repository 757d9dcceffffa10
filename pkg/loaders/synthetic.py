"""
Gaussian blobs inside the unit box, a desk-scale stand-in for MNIST
"""

import logging

import numpy as np

from errors import ConfigError, GenerationError
from loaders.dataset import Dataset

logger = logging.getLogger(__name__)

CENTER_LOW = 0.2
CENTER_HIGH = 0.8
MAX_CENTER_ATTEMPTS = 10_000


def place_centers(classes, d, separation, rng):
    """Rejection-sample class centers in [0.2, 0.8]^d at pairwise distance >= separation"""
    centers = []
    attempts = 0
    while len(centers) < classes:
        if attempts >= MAX_CENTER_ATTEMPTS:
            raise GenerationError(
                f"could not place {classes} centers {separation} apart in {d} dimensions "
                f"after {MAX_CENTER_ATTEMPTS} draws"
            )
        attempts += 1
        candidate = rng.uniform(CENTER_LOW, CENTER_HIGH, size=d)
        if all(np.linalg.norm(candidate - c) >= separation for c in centers):
            centers.append(candidate)
    return np.array(centers)


def synthetic_blobs(n, d, classes, separation, noise, seed, name=None):
    """
    Balanced Gaussian blobs clamped to [0, 1]

    Labels cycle through the classes before a seeded shuffle, so class sizes
    differ by at most one.
    """
    if d < 1 or classes < 1:
        raise ConfigError(f"need d >= 1 and classes >= 1, got d={d}, classes={classes}")
    if n < classes:
        raise ConfigError(f"need at least one sample per class, got n={n} for {classes} classes")
    if separation < 0 or noise < 0:
        raise ConfigError("separation and noise must be non-negative")

    rng = np.random.default_rng(seed)
    centers = place_centers(classes, d, separation, rng)
    labels = rng.permutation(np.arange(n) % classes)
    features = centers[labels] + noise * rng.standard_normal((n, d))
    features = np.clip(features, 0.0, 1.0)
    logger.info(f"Generated {n} blob samples, d={d}, {classes} classes, noise={noise}")
    return Dataset(features, labels, classes, name or f"blobs-n{n}-d{d}-c{classes}")


def nearest_center_accuracy(ds, centers):
    """Accuracy of assigning each sample to its closest center"""
    distances = np.linalg.norm(ds.features[:, None, :] - centers[None, :, :], axis=2)
    return float(np.mean(np.argmin(distances, axis=1) == ds.labels))
