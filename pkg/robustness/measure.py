"""
Empirical ensemble robustness

For each hypothesis: the largest loss change over the training samples when
each sample is moved to its linearized adversarial point. Averaged over the
ensemble, with the across-run variance alongside.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from errors import ConfigError, ProtocolError
from networks.mlp import per_sample_losses, predict
from robustness.perturbation import PerturbationSpec, perturb_batch

logger = logging.getLogger(__name__)

# Rows per forward/backward chunk; reductions run over chunks in order
CHUNK_ROWS = 4096


@dataclass(frozen=True)
class RobustnessEstimate:
    """Mean of the per-run maximal deviations and their unbiased variance"""

    epsilon_bar_emp: float
    per_run_max: tuple
    variance_alpha: float
    T: int
    spec: PerturbationSpec


def _model_of(hypothesis):
    return getattr(hypothesis, "model", hypothesis)


def estimate_from_maxima(per_run_max, spec):
    """Assemble a RobustnessEstimate from per-run maxima (variance 0 when T = 1)"""
    values = np.asarray(per_run_max, dtype=np.float64)
    if values.size < 1:
        raise ConfigError("an ensemble needs at least one member")
    variance = float(np.var(values, ddof=1)) if values.size > 1 else 0.0
    return RobustnessEstimate(
        epsilon_bar_emp=float(np.mean(values)),
        per_run_max=tuple(float(v) for v in values),
        variance_alpha=variance,
        T=int(values.size),
        spec=spec,
    )


def capped_indices(n, sample_cap, cap_seed):
    """All indices, or a seeded sorted subset of size sample_cap"""
    if sample_cap is None or sample_cap >= n:
        return np.arange(n)
    if sample_cap < 1:
        raise ConfigError(f"sample cap must be positive, got {sample_cap}")
    chosen = np.random.default_rng(cap_seed).choice(n, size=sample_cap, replace=False)
    return np.sort(chosen)


def _chunks(indices):
    for start in range(0, len(indices), CHUNK_ROWS):
        yield indices[start:start + CHUNK_ROWS]


def sample_deviations(model, data, spec, bound, indices=None):
    """|l(h, s_i) - l(h, s_i + ds_i)| for every selected training sample"""
    indices = np.arange(data.n) if indices is None else indices
    pieces = []
    for chunk in _chunks(indices):
        features, labels = data.features[chunk], data.labels[chunk]
        clean, perturbed = perturb_batch(model, features, labels, spec, bound)
        pieces.append(np.abs(clean - per_sample_losses(model, perturbed, labels, bound)))
    return np.concatenate(pieces)


def per_hypothesis_max_deviation(h, data, spec, bound, sample_cap=None, cap_seed=0):
    """Largest loss deviation of one hypothesis over the training set, in [0, M]"""
    indices = capped_indices(data.n, sample_cap, cap_seed)
    deviations = sample_deviations(_model_of(h), data, spec, bound, indices)
    return float(np.max(deviations))


def check_shared_config(ensemble):
    if len(ensemble) < 1:
        raise ConfigError("an ensemble needs at least one member")
    hashes = {getattr(h, "config_hash", None) for h in ensemble}
    if len(hashes) != 1:
        raise ProtocolError(f"ensemble mixes {len(hashes)} configurations")


def empirical_ensemble_robustness(ensemble, data, spec, bound, sample_cap=None, cap_seed=0):
    """
    epsilon_bar_emp: mean over members of each member's maximal deviation

    Every member gets its own adversarial examples from its own gradients.
    """
    check_shared_config(ensemble)
    if sample_cap is not None and sample_cap < data.n:
        logger.warning(f"Robustness measured on {sample_cap} of {data.n} training samples")
    maxima = [per_hypothesis_max_deviation(h, data, spec, bound, sample_cap, cap_seed) for h in ensemble]
    estimate = estimate_from_maxima(maxima, spec)
    logger.info(
        f"{spec.norm} r={spec.radius}: epsilon_bar_emp={estimate.epsilon_bar_emp:.6f} "
        f"alpha={estimate.variance_alpha:.6g} over T={estimate.T}"
    )
    return estimate


def deviation_profile(ensemble, data, radii, norm, bound, clamp_to_unit_box=False, sample_cap=None, cap_seed=0):
    """
    One RobustnessEstimate per radius

    Returns:
        list of (radius, RobustnessEstimate) in the order of radii
    """
    radii = [float(r) for r in radii]
    if any(r < 0 for r in radii) or any(b < a for a, b in zip(radii, radii[1:])):
        raise ConfigError(f"radii must be non-negative and ascending, got {radii}")
    spec = PerturbationSpec(norm=norm, radius=0.0, clamp_to_unit_box=clamp_to_unit_box)
    profile = []
    for radius in radii:
        estimate = empirical_ensemble_robustness(
            ensemble, data, replace(spec, radius=radius), bound, sample_cap, cap_seed
        )
        profile.append((radius, estimate))
    return profile


def adversarial_mean_loss(h, data, spec, bound):
    """(1/n) sum_i l(h, s_i + ds_i), the empirical term of the adversarial risk bound"""
    model = _model_of(h)
    total = 0.0
    for chunk in _chunks(np.arange(data.n)):
        labels = data.labels[chunk]
        _, perturbed = perturb_batch(model, data.features[chunk], labels, spec, bound)
        total += float(np.sum(per_sample_losses(model, perturbed, labels, bound)))
    return total / data.n


def perturbed_error(target, source, data, spec, bound):
    """Misclassification rate of `target` on training samples perturbed against `source`"""
    source_model, target_model = _model_of(source), _model_of(target)
    wrong = 0
    for chunk in _chunks(np.arange(data.n)):
        labels = data.labels[chunk]
        _, perturbed = perturb_batch(source_model, data.features[chunk], labels, spec, bound)
        wrong += int(np.sum(predict(target_model, perturbed) != labels))
    return wrong / data.n


@dataclass(frozen=True)
class RobustnessComparison:
    """Deterministic (member 0 on its own attack) versus randomized (a random member on it)"""

    deterministic_train_error: float
    deterministic_perturbed_error: float
    randomized_member: int
    randomized_train_error: float
    randomized_perturbed_error: float


def robustness_comparison(ensemble, data, spec, bound, seed):
    """
    Compare a fixed hypothesis with a randomly drawn one on member 0's adversarial samples

    Only training data is perturbed.
    """
    check_shared_config(ensemble)
    source = ensemble[0]
    member = int(np.random.default_rng(seed).integers(len(ensemble)))
    chosen = ensemble[member]

    def clean_error(h):
        return float(np.mean(predict(_model_of(h), data.features) != data.labels))

    return RobustnessComparison(
        deterministic_train_error=clean_error(source),
        deterministic_perturbed_error=perturbed_error(source, source, data, spec, bound),
        randomized_member=member,
        randomized_train_error=clean_error(chosen),
        randomized_perturbed_error=perturbed_error(chosen, source, data, spec, bound),
    )
