"""
IDX Loader
Reads and writes the big-endian IDX pair used by the MNIST distribution
"""

import gzip
import logging
import struct
from pathlib import Path

import numpy as np

from errors import DatasetConsistencyError, FileFormatError, TruncatedFileError
from loaders.dataset import Dataset

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _read_bytes(path):
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        payload = f.read()
    if not payload:
        raise TruncatedFileError(f"{path} is empty")
    return payload


def _header(payload, expected_magic, words, path):
    size = 4 * words
    if len(payload) < size:
        raise TruncatedFileError(f"{path}: header needs {size} bytes, file has {len(payload)}")
    values = struct.unpack_from(f">{words}I", payload, 0)
    if values[0] != expected_magic:
        raise FileFormatError(f"{path}: magic 0x{values[0]:08x}, expected 0x{expected_magic:08x}")
    return values[1:]


def parse_images(payload, path="images"):
    """(count, rows * cols) array of pixels scaled into [0, 1]"""
    count, rows, cols = _header(payload, IMAGE_MAGIC, 4, path)
    size = count * rows * cols
    if len(payload) < 16 + size:
        raise TruncatedFileError(f"{path}: expected {size} pixel bytes, found {len(payload) - 16}")
    pixels = np.frombuffer(payload, dtype=np.uint8, count=size, offset=16)
    return pixels.reshape(count, rows * cols).astype(np.float64) / 255.0, (rows, cols)


def parse_labels(payload, path="labels"):
    (count,) = _header(payload, LABEL_MAGIC, 2, path)
    if len(payload) < 8 + count:
        raise TruncatedFileError(f"{path}: expected {count} label bytes, found {len(payload) - 8}")
    return np.frombuffer(payload, dtype=np.uint8, count=count, offset=8).astype(np.int64)


def peek_image_dim(image_path):
    """Feature dimension (rows * cols) read from the header only"""
    _, rows, cols = _header(_read_bytes(image_path), IMAGE_MAGIC, 4, image_path)
    return rows * cols


def load_idx(image_path, label_path, class_count=None, limit=None, name=None):
    """
    Load an IDX image/label pair into a Dataset

    Args:
        class_count: number of classes; defaults to max label + 1
        limit: keep only the first `limit` samples
    """
    logger.info(f"Loading IDX pair {image_path} / {label_path}")
    features, _ = parse_images(_read_bytes(image_path), image_path)
    labels = parse_labels(_read_bytes(label_path), label_path)
    if features.shape[0] != labels.shape[0]:
        raise DatasetConsistencyError(f"{features.shape[0]} images but {labels.shape[0]} labels")
    if limit is not None:
        features, labels = features[:limit], labels[:limit]
    if labels.size == 0:
        raise DatasetConsistencyError(f"{label_path}: no samples to load")
    if class_count is None:
        class_count = int(labels.max()) + 1
    dataset = Dataset(features, labels, class_count, name or Path(image_path).name)
    logger.info(f"Loaded {dataset.n} samples of dimension {dataset.dim}")
    return dataset


def encode_idx(ds, shape=None):
    """
    Inverse of load_idx: (image bytes, label bytes)

    Features are rounded to the nearest 1/255. Images are 1 x d unless shape is given.
    """
    rows, cols = shape or (1, ds.dim)
    if rows * cols != ds.dim:
        raise FileFormatError(f"image shape {rows}x{cols} does not hold {ds.dim} features")
    pixels = np.rint(ds.features * 255.0).astype(np.uint8)
    images = struct.pack(">4I", IMAGE_MAGIC, ds.n, rows, cols) + pixels.tobytes()
    labels = struct.pack(">2I", LABEL_MAGIC, ds.n) + ds.labels.astype(np.uint8).tobytes()
    return images, labels


def write_idx(ds, image_path, label_path, shape=None):
    images, labels = encode_idx(ds, shape)
    for path, payload in ((image_path, images), (label_path, labels)):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            f.write(payload)
