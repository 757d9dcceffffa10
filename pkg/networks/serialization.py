"""
Model files: a versioned binary container plus a JSON sidecar

Layout (all integers little-endian uint32):
    magic b"ENSROBM1" | version | layer count L | L+1 dims |
    weights of each layer (float64, row-major) then its bias, layer by layer
"""

import json
import logging
import struct
from pathlib import Path

import numpy as np

from errors import FileFormatError, TruncatedFileError
from networks.mlp import MlpModel

logger = logging.getLogger(__name__)

MAGIC = b"ENSROBM1"
FORMAT_VERSION = 1


def encode_model(model):
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, model.num_layers)]
    parts.append(struct.pack(f"<{len(model.layer_dims)}I", *model.layer_dims))
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    return b"".join(parts)


def decode_model(payload):
    header = len(MAGIC) + 8
    if len(payload) < header:
        raise TruncatedFileError("model file shorter than its header")
    if payload[:len(MAGIC)] != MAGIC:
        raise FileFormatError("not a model file (bad magic)")
    version, layers = struct.unpack_from("<II", payload, len(MAGIC))
    if version != FORMAT_VERSION:
        raise FileFormatError(f"unsupported model format version {version}")
    offset = header
    if len(payload) < offset + 4 * (layers + 1):
        raise TruncatedFileError("model file truncated in layer dimensions")
    dims = struct.unpack_from(f"<{layers + 1}I", payload, offset)
    offset += 4 * (layers + 1)

    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        for shape in ((fan_out, fan_in), (fan_out,)):
            count = int(np.prod(shape))
            end = offset + 8 * count
            if len(payload) < end:
                raise TruncatedFileError("model file truncated in parameters")
            array = np.frombuffer(payload, dtype="<f8", count=count, offset=offset).reshape(shape)
            (weights if len(shape) == 2 else biases).append(array.astype(np.float64))
            offset = end
    return MlpModel(tuple(dims), tuple(weights), tuple(biases))


def sidecar_path(path):
    path = Path(path)
    return path.with_suffix(path.suffix + ".json")


def save_model(path, model, metadata=None):
    """Write the binary model and, when metadata is given, its JSON sidecar"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(encode_model(model))
    if metadata is not None:
        with open(sidecar_path(path), "w") as f:
            json.dump(metadata, f, indent=2, sort_keys=True)
    logger.debug(f"Saved model {model.layer_dims} to {path}")


def load_model(path):
    """
    Read a model file and its sidecar

    Returns:
        (MlpModel, metadata dict or None when no sidecar exists)
    """
    path = Path(path)
    with open(path, "rb") as f:
        model = decode_model(f.read())
    metadata = None
    if sidecar_path(path).exists():
        with open(sidecar_path(path), "r") as f:
            try:
                metadata = json.load(f)
            except ValueError as e:
                raise FileFormatError(f"{sidecar_path(path)}: unreadable sidecar: {e}") from e
    return model, metadata
