"""Momentum SGD with L2 weight decay"""

import logging
from dataclasses import dataclass

import numpy as np

from errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Velocity:
    weights: tuple
    biases: tuple

    @classmethod
    def zeros_like(cls, model):
        return cls(tuple(np.zeros_like(w) for w in model.weights), tuple(np.zeros_like(b) for b in model.biases))


def check_sgd_hyperparameters(lr, momentum, weight_decay):
    if not lr > 0 or not np.isfinite(lr):
        raise ConfigError(f"learning rate must be positive, got {lr}")
    if not 0.0 <= momentum < 1.0:
        raise ConfigError(f"momentum must lie in [0, 1), got {momentum}")
    if not weight_decay >= 0 or not np.isfinite(weight_decay):
        raise ConfigError(f"weight decay must be non-negative, got {weight_decay}")


def sgd_step(model, grads, lr, momentum=0.0, velocity=None, weight_decay=0.0):
    """
    One update: v <- momentum * v - lr * (g + weight_decay * w); w <- w + v

    Returns:
        (updated model, updated velocity)
    """
    check_sgd_hyperparameters(lr, momentum, weight_decay)
    if velocity is None:
        velocity = Velocity.zeros_like(model)

    def update(params, gradients, velocities):
        new_params, new_velocities = [], []
        for w, g, v in zip(params, gradients, velocities):
            if g.shape != w.shape:
                raise ConfigError(f"gradient shape {g.shape} does not match parameter shape {w.shape}")
            v = momentum * v - lr * (g + weight_decay * w)
            new_velocities.append(v)
            new_params.append(w + v)
        return new_params, new_velocities

    weights, v_weights = update(model.weights, grads.weights, velocity.weights)
    biases, v_biases = update(model.biases, grads.biases, velocity.biases)
    return model.with_parameters(weights, biases), Velocity(tuple(v_weights), tuple(v_biases))
