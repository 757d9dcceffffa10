"""
Dense feed-forward network
Rectifier hidden layers, affine output layer, hand-derived gradients with
respect to both the parameters and the input
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from errors import ArchitectureError, ConfigError, NumericError, ShapeError
from networks.dropout import DEFAULT_DROPOUT_LAYERS, draw_masks
from networks.loss import batch_bounded_losses

logger = logging.getLogger(__name__)


def _frozen(array):
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


def check_layer_dims(layer_dims):
    dims = [int(d) for d in layer_dims]
    if len(dims) < 2:
        raise ArchitectureError(f"need an input and an output dimension, got {dims}")
    if any(d < 1 for d in dims):
        raise ArchitectureError(f"every layer dimension must be positive, got {dims}")
    return tuple(dims)


@dataclass(frozen=True)
class MlpModel:
    """
    Weights and biases of an L-layer perceptron

    weights[l] has shape (layer_dims[l+1], layer_dims[l]); arrays are read-only.
    """

    layer_dims: tuple
    weights: tuple
    biases: tuple

    def __post_init__(self):
        dims = check_layer_dims(self.layer_dims)
        weights = tuple(_frozen(w) for w in self.weights)
        biases = tuple(_frozen(b) for b in self.biases)
        if len(weights) != len(dims) - 1 or len(biases) != len(dims) - 1:
            raise ArchitectureError(
                f"{len(weights)} weight matrices and {len(biases)} bias vectors for {len(dims) - 1} layers"
            )
        for index, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (dims[index + 1], dims[index]):
                raise ShapeError(f"weight {index} has shape {w.shape}, expected {(dims[index + 1], dims[index])}")
            if b.shape != (dims[index + 1],):
                raise ShapeError(f"bias {index} has shape {b.shape}, expected {(dims[index + 1],)}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NumericError(f"non-finite parameters in layer {index}")
        object.__setattr__(self, "layer_dims", dims)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def num_layers(self):
        return len(self.weights)

    @property
    def input_dim(self):
        return self.layer_dims[0]

    @property
    def class_count(self):
        return self.layer_dims[-1]

    @property
    def hidden_widths(self):
        return list(self.layer_dims[1:-1])

    def with_parameters(self, weights, biases):
        return MlpModel(self.layer_dims, tuple(weights), tuple(biases))


@dataclass(frozen=True)
class ParamGrads:
    """Gradients shaped like an MlpModel's parameters"""

    weights: tuple
    biases: tuple

    def flat(self):
        return np.concatenate([a.ravel() for pair in zip(self.weights, self.biases) for a in pair])


def init_mlp(layer_dims, seed, scale=1.0):
    """
    Uniform fan-based initialization with zero biases

    Weights of layer l are drawn from [-s_l, s_l], s_l = scale * sqrt(6 / (fan_in + fan_out)).
    """
    dims = check_layer_dims(layer_dims)
    if not scale > 0:
        raise ConfigError(f"init scale must be positive, got {scale}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = scale * math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(dims, tuple(weights), tuple(biases))


def _as_batch(model, features):
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.input_dim:
        raise ShapeError(f"expected inputs of dimension {model.input_dim}, got shape {features.shape}")
    return features


def forward_pass(model, features, scales=None):
    """
    Batched forward pass keeping every intermediate

    Args:
        features: (B, d) inputs
        scales: per-hidden-layer multipliers (mask / (1 - rate)), or None

    Returns:
        (pre_activations, activations); activations[0] is the input and
        pre_activations[-1] the logits
    """
    activation = _as_batch(model, features)
    pre_activations, activations = [], [activation]
    last = model.num_layers - 1
    for index, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = activation @ w.T + b
        pre_activations.append(z)
        if index < last:
            activation = np.maximum(z, 0.0)
            if scales is not None:
                activation = activation * scales[index]
            activations.append(activation)
    if not np.all(np.isfinite(pre_activations[-1])):
        raise NumericError("non-finite logits")
    return pre_activations, activations


def backward_pass(model, features, labels, bound, scales=None, sample_weights=None):
    """
    Batched backpropagation of the bounded loss

    Args:
        sample_weights: coefficient of each row's loss in the objective (default 1)

    Returns:
        (losses, ParamGrads of the weighted sum, per-row input gradients)
    """
    labels = np.asarray(labels, dtype=np.int64)
    pre_activations, activations = forward_pass(model, features, scales)
    logits = pre_activations[-1]
    if labels.shape != (logits.shape[0],) or np.any(labels < 0) or np.any(labels >= model.class_count):
        raise ShapeError(f"labels must be {logits.shape[0]} indices below {model.class_count}")
    losses, active = batch_bounded_losses(logits, labels, bound)
    rows = np.arange(logits.shape[0])
    coefficients = active.astype(np.float64)
    if sample_weights is not None:
        coefficients = coefficients * np.asarray(sample_weights, dtype=np.float64)

    delta = softmax(logits, axis=1)
    delta[rows, labels] -= 1.0
    delta *= coefficients[:, None]

    grad_w = [None] * model.num_layers
    grad_b = [None] * model.num_layers
    for index in reversed(range(model.num_layers)):
        grad_w[index] = delta.T @ activations[index]
        grad_b[index] = delta.sum(axis=0)
        delta = delta @ model.weights[index]
        if index > 0:
            delta = delta * (pre_activations[index - 1] > 0.0)
            if scales is not None:
                delta = delta * scales[index - 1]
    return losses, ParamGrads(tuple(grad_w), tuple(grad_b)), delta


def _single_scales(model, dropout):
    if dropout is None:
        return None
    dropout.check_widths(model.hidden_widths)
    return dropout.scales()


def forward(model, sample, dropout=None):
    """Logits for one feature vector, optionally under a dropout mask"""
    sample = np.asarray(sample, dtype=np.float64)
    if sample.ndim != 1:
        raise ShapeError(f"expected a feature vector, got shape {sample.shape}")
    pre_activations, _ = forward_pass(model, sample[None, :], _single_scales(model, dropout))
    return pre_activations[-1][0]


def backward(model, sample, label, bound, dropout=None):
    """
    Exact gradients of bounded_cross_entropy(forward(model, sample), label)

    Returns:
        (ParamGrads, input gradient of length layer_dims[0]); all zero on the clamp plateau
    """
    sample = np.asarray(sample, dtype=np.float64)
    if sample.ndim != 1:
        raise ShapeError(f"expected a feature vector, got shape {sample.shape}")
    _, grads, input_grads = backward_pass(
        model, sample[None, :], np.array([label]), bound, _single_scales(model, dropout)
    )
    return grads, input_grads[0]


def predict(model, features):
    """Argmax class of every row, dropout off"""
    pre_activations, _ = forward_pass(model, features)
    return np.argmax(pre_activations[-1], axis=1)


def per_sample_losses(model, features, labels, bound):
    pre_activations, _ = forward_pass(model, features)
    losses, _ = batch_bounded_losses(pre_activations[-1], np.asarray(labels, dtype=np.int64), bound)
    return losses


def input_gradients(model, features, labels, bound):
    """
    Gradient of each row's own loss with respect to that row

    Returns:
        (losses, (B, d) gradient matrix)
    """
    losses, _, grads = backward_pass(model, features, labels, bound)
    return losses, grads


def batch_loss_and_gradients(model, features, labels, bound, dropout_rate=0.0,
                             dropout_layers=DEFAULT_DROPOUT_LAYERS, rng=None, sample_weights=None):
    """
    Mean bounded loss of a minibatch and its parameter gradients

    Each row gets its own dropout mask drawn from rng. Importance weights,
    when given, multiply each row's contribution to the mean.
    """
    features = _as_batch(model, features)
    batch = features.shape[0]
    scales = None
    if dropout_rate > 0.0:
        if rng is None:
            raise ConfigError("dropout requires a random generator")
        masks = draw_masks(dropout_rate, model.hidden_widths, rng, dropout_layers, batch=batch)
        scales = [mask / (1.0 - dropout_rate) for mask in masks]
    coefficients = np.full(batch, 1.0 / batch)
    if sample_weights is not None:
        coefficients = coefficients * np.asarray(sample_weights, dtype=np.float64)
    losses, grads, _ = backward_pass(model, features, labels, bound, scales, coefficients)
    return float(np.dot(coefficients, losses)), grads
