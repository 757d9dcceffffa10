"""Train/test error and loss gaps of a single hypothesis"""

import logging
from dataclasses import dataclass

import numpy as np

from errors import ShapeError
from networks.mlp import per_sample_losses, predict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GapResult:
    train_error: float
    test_error: float
    train_loss: float
    test_loss: float

    @property
    def error_gap(self):
        return self.test_error - self.train_error

    @property
    def loss_gap(self):
        return self.test_loss - self.train_loss


def _check(model, data, role):
    if data.n < 1:
        raise ShapeError(f"{role} set is empty")
    if data.dim != model.input_dim:
        raise ShapeError(f"{role} set has dimension {data.dim}, model expects {model.input_dim}")


def misclassification_rate(model, data):
    return float(np.mean(predict(model, data.features) != data.labels))


def mean_loss(model, data, bound):
    return float(np.mean(per_sample_losses(model, data.features, data.labels, bound)))


def generalization_gap(h, train, test, bound):
    """
    Test-minus-train misclassification and bounded-loss differences

    Returns:
        GapResult with error_gap and loss_gap properties
    """
    model = getattr(h, "model", h)
    _check(model, train, "train")
    _check(model, test, "test")
    return GapResult(
        train_error=misclassification_rate(model, train),
        test_error=misclassification_rate(model, test),
        train_loss=mean_loss(model, train, bound),
        test_loss=mean_loss(model, test, bound),
    )
