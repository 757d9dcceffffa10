"""
Bayes by Backprop
Learns a factorized Gaussian over every weight, sigma = softplus(rho), with a
single Gaussian prior N(0, prior_sigma^2). One Monte-Carlo weight sample per
step; gradients flow through w = mu + sigma * eps.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from errors import NumericError, ShapeError
from networks.mlp import MlpModel, batch_loss_and_gradients, init_mlp

logger = logging.getLogger(__name__)

# softplus(-40) ~ 4e-18; below this sigma is numerically indistinguishable from zero
RHO_FLOOR = -40.0


def softplus(rho):
    return np.logaddexp(0.0, rho)


def kl_terms(mu, sigma, prior_sigma):
    """Per-parameter KL(N(mu, sigma^2) || N(0, prior_sigma^2))"""
    return np.log(prior_sigma / sigma) + (sigma ** 2 + mu ** 2) / (2.0 * prior_sigma ** 2) - 0.5


def kl_gradients(mu, rho, prior_sigma):
    """(dKL/dmu, dKL/drho) per parameter"""
    sigma = softplus(rho)
    d_mu = mu / prior_sigma ** 2
    d_sigma = -1.0 / sigma + sigma / prior_sigma ** 2
    return d_mu, d_sigma * expit(rho)


@dataclass(frozen=True)
class WeightPosterior:
    """Means and softplus scales shaped like an MlpModel's parameters"""

    layer_dims: tuple
    mu: tuple  # weights then biases of layer 0, layer 1, ...
    rho: tuple
    prior_sigma: float = 1.0

    def __post_init__(self):
        if len(self.mu) != len(self.rho):
            raise ShapeError("mu and rho hold different numbers of arrays")
        for m, r in zip(self.mu, self.rho):
            if m.shape != r.shape:
                raise ShapeError(f"mu shape {m.shape} differs from rho shape {r.shape}")
        if any(np.any(r < RHO_FLOOR) for r in self.rho):
            raise NumericError(f"posterior scale underflow: rho below {RHO_FLOOR}")

    @classmethod
    def from_model(cls, model, init_rho, prior_sigma):
        mu = [a for pair in zip(model.weights, model.biases) for a in pair]
        return cls(model.layer_dims, tuple(np.array(a) for a in mu),
                   tuple(np.full(a.shape, float(init_rho)) for a in mu), prior_sigma)

    def sigmas(self):
        return [softplus(r) for r in self.rho]

    def realize(self, eps):
        """MlpModel with weights mu + sigma * eps"""
        arrays = [m + s * e for m, s, e in zip(self.mu, self.sigmas(), eps)]
        return MlpModel(self.layer_dims, tuple(arrays[0::2]), tuple(arrays[1::2]))

    def mean_model(self):
        return MlpModel(self.layer_dims, tuple(self.mu[0::2]), tuple(self.mu[1::2]))


def init_posterior(layer_dims, seed, init_rho, prior_sigma, scale=1.0):
    return WeightPosterior.from_model(init_mlp(layer_dims, seed, scale), init_rho, prior_sigma)


def draw_eps(posterior, rng):
    return [rng.standard_normal(m.shape) for m in posterior.mu]


def bbb_step(posterior, batch, kl_weight, lr, rng, bound):
    """
    One gradient step on batch loss + kl_weight * KL

    Returns:
        the updated posterior
    """
    eps = draw_eps(posterior, rng)
    model = posterior.realize(eps)
    _, grads = batch_loss_and_gradients(
        model, batch.features, batch.labels, bound, sample_weights=batch.weights
    )
    loss_grads = [g for pair in zip(grads.weights, grads.biases) for g in pair]

    new_mu, new_rho = [], []
    for m, r, e, g in zip(posterior.mu, posterior.rho, eps, loss_grads):
        kl_mu, kl_rho = kl_gradients(m, r, posterior.prior_sigma)
        d_mu = g + kl_weight * kl_mu
        d_rho = g * e * expit(r) + kl_weight * kl_rho
        new_mu.append(m - lr * d_mu)
        new_rho.append(r - lr * d_rho)
    for array in new_mu + new_rho:
        if not np.all(np.isfinite(array)):
            raise NumericError("non-finite posterior parameters")
    return WeightPosterior(posterior.layer_dims, tuple(new_mu), tuple(new_rho), posterior.prior_sigma)


def sample_weights_model(posterior, seed):
    """One weight realization, deterministic per seed"""
    return posterior.realize(draw_eps(posterior, np.random.default_rng(seed)))
