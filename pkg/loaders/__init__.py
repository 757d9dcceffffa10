"""Sample ingestion and generation"""

from .dataset import Dataset, minibatches, split, split_indices
from .idx_loader import encode_idx, load_idx, write_idx
from .synthetic import synthetic_blobs

__all__ = [
    'Dataset', 'encode_idx', 'load_idx', 'minibatches', 'split', 'split_indices',
    'synthetic_blobs', 'write_idx',
]
