"""
Generalization bounds from ensemble robustness

Closed-form evaluators; every function validates its inputs and raises
DomainError naming the offending field.
"""

import logging
import math
from dataclasses import dataclass

from errors import DomainError, PreconditionError

logger = logging.getLogger(__name__)

DROPOUT_FORMS = ("stated", "proof")


def _finite(name, value):
    if value is None or not math.isfinite(value):
        raise DomainError(name, f"must be a finite number, got {value}")


@dataclass(frozen=True)
class BoundInputs:
    """
    n: training samples, M: loss bound, delta: confidence, epsilon_bar: ensemble robustness.
    K (partition size), alpha (robustness variance), beta (dropout sensitivity) and
    L_layers (dropout-randomized layers) are only needed by the bounds that use them.
    """

    n: int
    M: float
    delta: float
    epsilon_bar: float
    K: int = None
    alpha: float = None
    beta: float = None
    L_layers: int = None

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError("n", f"must be an integer >= 1, got {self.n}")
        _finite("M", self.M)
        if self.M <= 0:
            raise DomainError("M", f"must be positive, got {self.M}")
        _finite("delta", self.delta)
        if not 0.0 < self.delta < 1.0:
            raise DomainError("delta", f"must lie in (0, 1), got {self.delta}")
        _finite("epsilon_bar", self.epsilon_bar)
        if self.epsilon_bar < 0:
            raise DomainError("epsilon_bar", f"must be non-negative, got {self.epsilon_bar}")
        if self.K is not None and (int(self.K) != self.K or self.K < 1):
            raise DomainError("K", f"must be an integer >= 1, got {self.K}")
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if value is not None:
                _finite(name, value)
                if value < 0:
                    raise DomainError(name, f"must be non-negative, got {value}")
        if self.L_layers is not None and (int(self.L_layers) != self.L_layers or self.L_layers < 1):
            raise DomainError("L_layers", f"must be an integer >= 1, got {self.L_layers}")

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise DomainError(name, "is required by this bound")


def theorem1_bound(inputs):
    """|L(h) - l_emp(h)| <= sqrt((n M eps + 2 M^2) / (delta n))"""
    n, M = inputs.n, inputs.M
    return math.sqrt((n * M * inputs.epsilon_bar + 2.0 * M * M) / (inputs.delta * n))


def corollary1_risk_bound(adv_empirical_mean, inputs):
    """Risk bound from the mean adversarial training loss plus the Theorem-1 deviation"""
    _finite("adv_empirical_mean", adv_empirical_mean)
    if not 0.0 <= adv_empirical_mean <= inputs.M:
        raise DomainError("adv_empirical_mean", f"must lie in [0, M={inputs.M}], got {adv_empirical_mean}")
    return adv_empirical_mean + theorem1_bound(inputs)


def _partition_term(K, n, log_arg):
    return math.sqrt((2.0 * K * math.log(2.0) + 2.0 * math.log(log_arg)) / n)


def theorem2_bound(inputs):
    """eps + alpha / sqrt(2 delta) + M sqrt((2K ln 2 + 2 ln(1/delta)) / n)"""
    inputs.require("K", "alpha")
    return (
        inputs.epsilon_bar
        + inputs.alpha / math.sqrt(2.0 * inputs.delta)
        + inputs.M * _partition_term(inputs.K, inputs.n, 1.0 / inputs.delta)
    )


def lemma1_bound(inputs):
    """Uniform ensemble robustness: theorem2_bound without the variance term"""
    inputs.require("K")
    return inputs.epsilon_bar + inputs.M * _partition_term(inputs.K, inputs.n, 1.0 / inputs.delta)


def dropout_bound(inputs, form="stated"):
    """
    Bound for networks trained with dropout on L_layers layers

    form="stated": eps + sqrt(2 ln(1/delta) / L) + sqrt((2K ln 2 + 2 ln(2/delta)) / n)
    form="proof":  the middle term becomes beta * sqrt(2 L ln(1/delta)), valid only when beta <= L^(-3/4)
    """
    if form not in DROPOUT_FORMS:
        raise DomainError("form", f"must be one of {DROPOUT_FORMS}, got {form!r}")
    inputs.require("K", "L_layers")
    L = inputs.L_layers
    log_inv_delta = math.log(1.0 / inputs.delta)
    if form == "stated":
        middle = math.sqrt(2.0 * log_inv_delta / L)
    else:
        inputs.require("beta")
        limit = L ** -0.75
        if inputs.beta > limit:
            raise PreconditionError(f"dropout bound needs beta <= L^(-3/4) = {limit:.6g}, got beta={inputs.beta}")
        middle = inputs.beta * math.sqrt(2.0 * L * log_inv_delta)
    return inputs.epsilon_bar + middle + _partition_term(inputs.K, inputs.n, 2.0 / inputs.delta)


def all_bounds(inputs, adv_empirical_mean=None, dropout_form=None):
    """
    Every bound computable from the given inputs, in a fixed order

    Bounds whose optional inputs are missing are left out. The dropout bound is
    only evaluated when dropout_form is given; its precondition errors propagate.
    """
    bounds = {"theorem1": theorem1_bound(inputs)}
    if adv_empirical_mean is not None:
        bounds["corollary1"] = corollary1_risk_bound(adv_empirical_mean, inputs)
    if inputs.K is not None:
        if inputs.alpha is not None:
            bounds["theorem2"] = theorem2_bound(inputs)
        bounds["lemma1"] = lemma1_bound(inputs)
        if dropout_form is not None and inputs.L_layers is not None:
            bounds[f"dropout_{dropout_form}"] = dropout_bound(inputs, dropout_form)
    logger.debug(f"Bounds at n={inputs.n} epsilon_bar={inputs.epsilon_bar:.6g}: {sorted(bounds)}")
    return bounds
