"""Dense perceptrons with analytic gradients, bounded loss and dropout"""

from .dropout import DropoutState, sample_dropout_mask
from .loss import DEFAULT_LOSS_BOUND, BoundedLoss, bounded_cross_entropy
from .mlp import (
    MlpModel,
    ParamGrads,
    backward,
    batch_loss_and_gradients,
    forward,
    init_mlp,
    input_gradients,
    per_sample_losses,
    predict,
)
from .optim import Velocity, sgd_step
from .serialization import load_model, save_model

__all__ = [
    'DEFAULT_LOSS_BOUND', 'BoundedLoss', 'DropoutState', 'MlpModel', 'ParamGrads', 'Velocity',
    'backward', 'batch_loss_and_gradients', 'bounded_cross_entropy', 'forward', 'init_mlp',
    'input_gradients', 'load_model', 'per_sample_losses', 'predict', 'sample_dropout_mask',
    'save_model', 'sgd_step',
]
