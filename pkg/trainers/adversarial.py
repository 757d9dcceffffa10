"""
Minibatch update steps: plain SGD and adversarial training

The adversarial step moves every batch sample to its linearized worst-case
point before taking the SGD step there.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from networks.dropout import DEFAULT_DROPOUT_LAYERS
from networks.mlp import batch_loss_and_gradients
from networks.optim import sgd_step
from robustness.perturbation import perturb_batch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Batch:
    features: np.ndarray
    labels: np.ndarray
    weights: np.ndarray = None  # importance weights, None for uniform


@dataclass(frozen=True)
class OptimizerState:
    model: object
    velocity: object = None
    lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 0.0


def sgd_training_step(state, batch, bound, dropout_rate=0.0, dropout_layers=DEFAULT_DROPOUT_LAYERS, rng=None):
    _, grads = batch_loss_and_gradients(
        state.model, batch.features, batch.labels, bound,
        dropout_rate=dropout_rate, dropout_layers=dropout_layers, rng=rng, sample_weights=batch.weights,
    )
    model, velocity = sgd_step(state.model, grads, state.lr, state.momentum, state.velocity, state.weight_decay)
    return replace(state, model=model, velocity=velocity)


def adversarial_training_step(state, batch, spec, bound, dropout_rate=0.0,
                              dropout_layers=DEFAULT_DROPOUT_LAYERS, rng=None):
    """SGD step on the gradients evaluated at s + ds for every sample of the batch"""
    _, perturbed = perturb_batch(state.model, batch.features, batch.labels, spec, bound)
    adversarial = Batch(perturbed, batch.labels, batch.weights)
    return sgd_training_step(state, adversarial, bound, dropout_rate, dropout_layers, rng)
