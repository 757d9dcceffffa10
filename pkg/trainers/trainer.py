"""
Trainer
Runs the epochs x minibatch loop of the selected algorithm. Every source of
randomness (initialization, shuffles, dropout masks, priority draws, weight
noise) comes from generators seeded by config.seed.
"""

import logging
import math

import numpy as np

from errors import ConfigError, NumericError, TrainingDivergedError
from loaders.dataset import minibatches
from networks.loss import BoundedLoss
from networks.mlp import init_mlp, per_sample_losses
from robustness.perturbation import PerturbationSpec
from trainers.adversarial import Batch, OptimizerState, adversarial_training_step, sgd_training_step
from trainers.bayes_by_backprop import bbb_step, init_posterior, sample_weights_model
from trainers.config import Hypothesis
from trainers.prioritized import PRIORITY_FLOOR_FRACTION, prioritized_sample

logger = logging.getLogger(__name__)

SEED_BOUND = 2 ** 63


def _check_data(config, data):
    if data.dim != config.layer_dims[0]:
        raise ConfigError(f"dataset dimension {data.dim} does not match input layer {config.layer_dims[0]}")
    if data.class_count != config.layer_dims[-1]:
        raise ConfigError(f"dataset has {data.class_count} classes, output layer has {config.layer_dims[-1]}")


def _epoch_batches(config, data, model, bound, rng):
    """Index batches and matching importance weights (None when uniform)"""
    epoch_seed = int(rng.integers(SEED_BOUND))
    if not config.uses_priority:
        return [(idx, None) for idx in minibatches(data, config.batch_size, epoch_seed)]
    losses = per_sample_losses(model, data.features, data.labels, bound)
    draw = prioritized_sample(
        losses, config.priority_exponent, data.n, np.random.default_rng(epoch_seed),
        floor=PRIORITY_FLOOR_FRACTION * bound.M,
    )
    return [
        (draw.indices[start:start + config.batch_size], draw.weights[start:start + config.batch_size])
        for start in range(0, data.n, config.batch_size)
    ]


def _mean_loss(model, data, bound):
    value = float(np.mean(per_sample_losses(model, data.features, data.labels, bound)))
    if not math.isfinite(value):
        raise NumericError("non-finite training loss")
    return value


def _fit_point_estimate(config, data, bound):
    rng = np.random.default_rng(config.seed)
    model = init_mlp(config.layer_dims, int(rng.integers(SEED_BOUND)), config.init_scale)
    spec = None
    if config.adversarial_norm is not None:
        spec = PerturbationSpec(config.adversarial_norm, config.adv_radius, config.clamp_adversarial)
    dropout_rate = config.dropout_rate if config.uses_dropout else 0.0

    state = OptimizerState(model, None, config.lr, config.momentum, config.weight_decay)
    curve = []
    for epoch in range(config.epochs):
        try:
            lr = config.lr * config.lr_decay ** epoch
            state = OptimizerState(state.model, state.velocity, lr, state.momentum, state.weight_decay)
            for indices, weights in _epoch_batches(config, data, state.model, bound, rng):
                batch = Batch(data.features[indices], data.labels[indices], weights)
                if spec is not None:
                    state = adversarial_training_step(state, batch, spec, bound, dropout_rate,
                                                      config.dropout_layers, rng)
                else:
                    state = sgd_training_step(state, batch, bound, dropout_rate, config.dropout_layers, rng)
            curve.append(_mean_loss(state.model, data, bound))
        except NumericError as e:
            raise TrainingDivergedError(epoch, detail=str(e)) from e
        logger.debug(f"{config.algorithm} seed={config.seed} epoch {epoch}: loss {curve[-1]:.6f}")
    return state.model, curve


def train_posterior(config, data):
    """
    Fit the Bayes-by-backprop weight posterior

    Returns:
        (WeightPosterior, per-epoch mean loss of the posterior-mean network)
    """
    if not config.is_bayesian:
        raise ConfigError(f"train_posterior needs bayes_by_backprop, got {config.algorithm}")
    _check_data(config, data)
    bound = BoundedLoss(config.loss_bound)
    rng = np.random.default_rng(config.seed)
    settings = config.bbb
    posterior = init_posterior(config.layer_dims, int(rng.integers(SEED_BOUND)),
                               settings.init_rho, settings.prior_sigma, config.init_scale)
    kl_weight = settings.kl_weight if settings.kl_weight is not None else 1.0 / data.n
    curve = []
    for epoch in range(config.epochs):
        lr = config.lr * config.lr_decay ** epoch
        try:
            for indices in minibatches(data, config.batch_size, int(rng.integers(SEED_BOUND))):
                batch = Batch(data.features[indices], data.labels[indices])
                posterior = bbb_step(posterior, batch, kl_weight, lr, rng, bound)
            curve.append(_mean_loss(posterior.mean_model(), data, bound))
        except NumericError as e:
            raise TrainingDivergedError(epoch, detail=str(e)) from e
        logger.debug(f"bayes_by_backprop seed={config.seed} epoch {epoch}: loss {curve[-1]:.6f}")
    return posterior, curve


def sample_bbb_hypothesis(posterior, seed, config=None, train_loss_curve=()):
    """One weight realization of the posterior packaged as a Hypothesis"""
    config_hash = config.config_hash() if config is not None else "posterior"
    return Hypothesis(
        model=sample_weights_model(posterior, seed),
        config_hash=config_hash,
        seed=int(seed),
        train_loss_curve=tuple(train_loss_curve),
        config=config.with_seed(seed) if config is not None else None,
    )


def train(config, data):
    """
    Train one hypothesis; deterministic per (config, data)

    For bayes_by_backprop the posterior is fitted and one realization drawn with config.seed.
    """
    _check_data(config, data)
    logger.info(f"Training {config.algorithm} {list(config.layer_dims)} seed={config.seed} "
                f"for {config.epochs} epochs on {data.n} samples")
    if config.is_bayesian:
        posterior, curve = train_posterior(config, data)
        return sample_bbb_hypothesis(posterior, config.seed, config, curve)
    model, curve = _fit_point_estimate(config, data, BoundedLoss(config.loss_bound))
    if curve:
        logger.info(f"Finished {config.algorithm} seed={config.seed}: final train loss {curve[-1]:.6f}")
    return Hypothesis(model, config.config_hash(), config.seed, tuple(curve), config)
