"""
Labeled feature matrix plus the seeded split and minibatch helpers
"""

import logging
from dataclasses import dataclass

import numpy as np

from errors import ConfigError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """
    n samples of dimension d with features in [0, 1] and labels below class_count

    The arrays are copied and made read-only on construction.
    """

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    name: str = "dataset"

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise ShapeError(f"features must be a non-empty n x d matrix, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise ShapeError(f"{labels.shape[0] if labels.ndim else 0} labels for {features.shape[0]} samples")
        if self.class_count < 1:
            raise ConfigError(f"class_count must be positive, got {self.class_count}")
        if np.any(labels < 0) or np.any(labels >= self.class_count):
            raise ConfigError(f"labels must lie in [0, {self.class_count})")
        if not np.all((features >= 0.0) & (features <= 1.0)):
            raise ConfigError("features must lie in [0, 1]")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_count", int(self.class_count))

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    def subset(self, indices, name=None):
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[indices], self.labels[indices], self.class_count, name or self.name)


def split_indices(n, train_fraction, seed):
    """Seeded permutation of range(n) cut into (train, test) index arrays"""
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train fraction must lie in (0, 1), got {train_fraction}")
    train_size = int(round(n * train_fraction))
    if train_size < 1 or train_size >= n:
        raise ConfigError(f"train fraction {train_fraction} leaves an empty part for n={n}")
    order = np.random.default_rng(seed).permutation(n)
    return order[:train_size], order[train_size:]


def split(ds, train_fraction, seed):
    """Seeded train/test partition of the rows of ds"""
    train_idx, test_idx = split_indices(ds.n, train_fraction, seed)
    logger.info(f"Split {ds.name}: {len(train_idx)} train / {len(test_idx)} test samples")
    return ds.subset(train_idx, f"{ds.name}-train"), ds.subset(test_idx, f"{ds.name}-test")


def minibatches(ds, batch_size, epoch_seed):
    """
    One epoch of index batches: a seeded shuffle chunked into batch_size pieces

    The last batch is smaller when batch_size does not divide n.
    """
    if batch_size < 1:
        raise ConfigError(f"batch size must be at least 1, got {batch_size}")
    n = ds if isinstance(ds, (int, np.integer)) else ds.n
    order = np.random.default_rng(epoch_seed).permutation(n)
    return [order[start:start + batch_size] for start in range(0, n, batch_size)]
