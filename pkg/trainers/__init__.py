"""Training algorithms producing hypotheses and seed ensembles"""

from .adversarial import Batch, OptimizerState, adversarial_training_step, sgd_training_step
from .bayes_by_backprop import WeightPosterior, bbb_step, init_posterior
from .config import ALGORITHMS, BbbSettings, Hypothesis, TrainConfig, baseline_defaults
from .ensemble import train_ensemble
from .prioritized import prioritized_sample
from .trainer import sample_bbb_hypothesis, train, train_posterior

__all__ = [
    'ALGORITHMS', 'Batch', 'BbbSettings', 'Hypothesis', 'OptimizerState', 'TrainConfig',
    'WeightPosterior', 'adversarial_training_step', 'bbb_step', 'init_posterior', 'baseline_defaults',
    'prioritized_sample', 'sample_bbb_hypothesis', 'sgd_training_step', 'train', 'train_ensemble',
    'train_posterior',
]
