"""
Tests for the loaders package: Dataset, split, minibatches, IDX files and synthetic blobs
"""

import gzip
import os
import struct
import sys

import numpy as np
import pytest

# Add parent directory to path to import modules
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from errors import (
    ConfigError,
    DatasetConsistencyError,
    FileFormatError,
    GenerationError,
    ShapeError,
    TruncatedFileError,
)
from loaders.dataset import Dataset, minibatches, split, split_indices
from loaders.idx_loader import IMAGE_MAGIC, LABEL_MAGIC, encode_idx, load_idx, peek_image_dim, write_idx
from loaders.synthetic import nearest_center_accuracy, place_centers, synthetic_blobs


def idx_pair(tmp_path, pixels, labels, rows, cols, suffix=""):
    count = len(labels)
    images = struct.pack(">4I", IMAGE_MAGIC, count, rows, cols) + bytes(pixels)
    label_bytes = struct.pack(">2I", LABEL_MAGIC, count) + bytes(labels)
    image_path = tmp_path / f"images.idx{suffix}"
    label_path = tmp_path / f"labels.idx{suffix}"
    opener = gzip.open if suffix == ".gz" else open
    with opener(image_path, "wb") as f:
        f.write(images)
    with opener(label_path, "wb") as f:
        f.write(label_bytes)
    return image_path, label_path


# ============================================================
# DATASET
# ============================================================

def test_dataset_rejects_features_outside_unit_box():
    with pytest.raises(ConfigError):
        Dataset(np.array([[1.5]]), np.array([0]), 1)


def test_dataset_rejects_label_out_of_range():
    with pytest.raises(ConfigError):
        Dataset(np.array([[0.5]]), np.array([2]), 2)


def test_dataset_rejects_row_count_mismatch():
    with pytest.raises(ShapeError):
        Dataset(np.zeros((3, 2)), np.array([0, 1]), 2)


def test_dataset_arrays_are_read_only():
    ds = Dataset(np.zeros((2, 2)), np.array([0, 1]), 2)
    with pytest.raises(ValueError):
        ds.features[0, 0] = 1.0


# ============================================================
# SPLIT / MINIBATCHES
# ============================================================

def test_split_sizes():
    ds = synthetic_blobs(10, 2, 2, 0.3, 0.05, seed=0)
    train, test = split(ds, 0.8, seed=1)
    assert (train.n, test.n) == (8, 2)


def test_split_is_deterministic_and_partitions():
    a_train, a_test = split_indices(50, 0.7, seed=4)
    b_train, b_test = split_indices(50, 0.7, seed=4)
    assert np.array_equal(a_train, b_train) and np.array_equal(a_test, b_test)
    assert not set(a_train) & set(a_test)
    assert sorted(np.concatenate([a_train, a_test])) == list(range(50))


@pytest.mark.parametrize("fraction", [0.0, 1.0, 0.99])
def test_split_degenerate_fraction(fraction):
    with pytest.raises(ConfigError):
        split_indices(10, fraction, seed=0)


def test_minibatch_sizes():
    assert [len(b) for b in minibatches(5, 2, epoch_seed=0)] == [2, 2, 1]


def test_single_batch_is_permutation():
    batches = minibatches(7, 7, epoch_seed=3)
    assert len(batches) == 1 and sorted(batches[0]) == list(range(7))


@pytest.mark.parametrize("batch_size", [1, 3, 4, 10, 64])
def test_every_index_once_per_epoch(batch_size):
    ds = synthetic_blobs(37, 3, 3, 0.2, 0.05, seed=2)
    batches = minibatches(ds, batch_size, epoch_seed=11)
    assert sorted(np.concatenate(batches)) == list(range(37))


# ============================================================
# IDX
# ============================================================

def test_idx_handcrafted_pair(tmp_path):
    images, labels = idx_pair(tmp_path, [0, 255, 128, 64], [3], 2, 2)
    ds = load_idx(images, labels)
    np.testing.assert_array_equal(ds.features[0], [0.0, 1.0, 128 / 255, 64 / 255])
    assert ds.labels[0] == 3
    assert ds.class_count == 4
    assert peek_image_dim(images) == 4


def test_idx_gzip(tmp_path):
    images, labels = idx_pair(tmp_path, [10, 20, 30, 40, 50, 60], [0, 1], 1, 3, suffix=".gz")
    ds = load_idx(images, labels)
    assert ds.n == 2 and ds.dim == 3


def test_idx_wrong_magic(tmp_path):
    images, _ = idx_pair(tmp_path, [0, 1, 2, 3], [1], 2, 2)
    with pytest.raises(FileFormatError):
        load_idx(images, images)


def test_idx_count_mismatch(tmp_path):
    images, _ = idx_pair(tmp_path, [0, 1, 2, 3], [1], 2, 2)
    other = tmp_path / "two_labels.idx"
    other.write_bytes(struct.pack(">2I", LABEL_MAGIC, 2) + bytes([0, 1]))
    with pytest.raises(DatasetConsistencyError):
        load_idx(images, other)


def test_idx_empty_file_is_io_error(tmp_path):
    empty = tmp_path / "empty.idx"
    empty.write_bytes(b"")
    _, labels = idx_pair(tmp_path, [0, 1, 2, 3], [1], 2, 2)
    with pytest.raises(OSError):
        load_idx(empty, labels)


def test_idx_zero_count_pair(tmp_path):
    images, labels = idx_pair(tmp_path, [], [], 2, 2)
    with pytest.raises(DatasetConsistencyError, match="no samples"):
        load_idx(images, labels)
    full_images, full_labels = idx_pair(tmp_path, [0, 1, 2, 3], [1], 2, 2)
    with pytest.raises(DatasetConsistencyError):
        load_idx(full_images, full_labels, limit=0)


def test_idx_truncated_pixels(tmp_path):
    images = tmp_path / "short.idx"
    images.write_bytes(struct.pack(">4I", IMAGE_MAGIC, 2, 2, 2) + bytes(5))
    _, labels = idx_pair(tmp_path, [0] * 8, [0, 1], 2, 2)
    with pytest.raises(TruncatedFileError):
        load_idx(images, labels)


def test_idx_roundtrip_within_quantization(tmp_path):
    ds = synthetic_blobs(40, 6, 3, 0.3, 0.1, seed=8)
    images, labels = tmp_path / "x.idx", tmp_path / "y.idx"
    write_idx(ds, images, labels, shape=(2, 3))
    loaded = load_idx(images, labels, class_count=3)
    assert np.max(np.abs(loaded.features - ds.features)) <= 0.5 / 255 + 1e-12
    assert np.array_equal(loaded.labels, ds.labels)


def test_encode_idx_rejects_bad_shape():
    ds = synthetic_blobs(4, 6, 2, 0.3, 0.1, seed=8)
    with pytest.raises(FileFormatError):
        encode_idx(ds, shape=(4, 4))


# ============================================================
# SYNTHETIC BLOBS
# ============================================================

def test_blobs_without_noise_sit_on_centers():
    ds = synthetic_blobs(30, 3, 3, 0.3, 0.0, seed=5)
    centers = place_centers(3, 3, 0.3, np.random.default_rng(5))
    np.testing.assert_array_equal(ds.features, centers[ds.labels])


def test_blobs_are_balanced():
    ds = synthetic_blobs(10, 2, 2, 0.5, 0.05, seed=0)
    assert np.bincount(ds.labels).tolist() == [5, 5]


def test_blobs_are_deterministic():
    a = synthetic_blobs(50, 4, 3, 0.3, 0.1, seed=9)
    b = synthetic_blobs(50, 4, 3, 0.3, 0.1, seed=9)
    assert np.array_equal(a.features, b.features) and np.array_equal(a.labels, b.labels)


def test_well_separated_blobs_are_nearest_center_separable():
    ds = synthetic_blobs(200, 2, 2, 0.5, 0.02, seed=13)
    centers = place_centers(2, 2, 0.5, np.random.default_rng(13))
    assert nearest_center_accuracy(ds, centers) == 1.0


def test_infeasible_separation():
    with pytest.raises(GenerationError):
        synthetic_blobs(100, 1, 20, 0.5, 0.01, seed=0)
