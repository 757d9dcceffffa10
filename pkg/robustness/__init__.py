"""Adversarial perturbations and empirical ensemble robustness"""

from .measure import (
    RobustnessComparison,
    RobustnessEstimate,
    adversarial_mean_loss,
    deviation_profile,
    empirical_ensemble_robustness,
    estimate_from_maxima,
    per_hypothesis_max_deviation,
    perturbed_error,
    robustness_comparison,
)
from .oracle import brute_force_deviation_oracle
from .perturbation import NORMS, PerturbationSpec, adversarial_perturbation, solve_linearized

__all__ = [
    'NORMS', 'PerturbationSpec', 'RobustnessComparison', 'RobustnessEstimate',
    'adversarial_mean_loss', 'adversarial_perturbation', 'brute_force_deviation_oracle',
    'deviation_profile', 'empirical_ensemble_robustness', 'estimate_from_maxima',
    'per_hypothesis_max_deviation', 'perturbed_error', 'robustness_comparison', 'solve_linearized',
]
