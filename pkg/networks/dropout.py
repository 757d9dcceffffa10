"""
Dropout masks for the hidden layers of an MLP
Inverted scaling: kept units are multiplied by 1/(1 - rate) at train time
"""

import logging
from dataclasses import dataclass

import numpy as np

from errors import ConfigError, ShapeError

logger = logging.getLogger(__name__)

# First version of the experiments: one dropout layer after the first hidden layer
DEFAULT_DROPOUT_LAYERS = (0,)


@dataclass(frozen=True)
class DropoutState:
    """
    Binary keep-masks, one per hidden layer

    Layers that are not dropped carry an all-ones mask.
    """

    rate: float
    masks: tuple
    rng_seed: int

    def __post_init__(self):
        _check_rate(self.rate)
        for mask in self.masks:
            if not np.all((mask == 0.0) | (mask == 1.0)):
                raise ConfigError("dropout masks must be binary")

    def scales(self):
        """Per-layer multipliers mask / (1 - rate)"""
        keep = 1.0 - self.rate
        return [mask / keep for mask in self.masks]

    def check_widths(self, widths):
        if [len(m) for m in self.masks] != list(widths):
            raise ShapeError(
                f"dropout masks {[len(m) for m in self.masks]} do not match hidden widths {list(widths)}"
            )


def _check_rate(rate):
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")


def draw_masks(rate, widths, rng, layers=DEFAULT_DROPOUT_LAYERS, batch=None):
    """
    Draw keep-masks from an existing generator, one row per sample when batch is set

    Every hidden layer consumes random numbers whether or not it is dropped,
    so enabling another layer never shifts the stream of the others.
    """
    masks = []
    for index, width in enumerate(widths):
        shape = width if batch is None else (batch, width)
        keep = (rng.random(shape) >= rate).astype(np.float64)
        if layers is not None and index not in layers:
            keep = np.ones(shape, dtype=np.float64)
        masks.append(keep)
    return masks


def sample_dropout_mask(rate, widths, seed, layers=None):
    """
    Sample a DropoutState deterministically from a seed

    Args:
        rate: probability of dropping a unit, in [0, 1)
        widths: hidden layer widths
        seed: generator seed
        layers: hidden layer indices to drop; None drops every hidden layer
    """
    _check_rate(rate)
    rng = np.random.default_rng(seed)
    masks = draw_masks(rate, widths, rng, layers)
    return DropoutState(rate=rate, masks=tuple(masks), rng_seed=int(seed))
