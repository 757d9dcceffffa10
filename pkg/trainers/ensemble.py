"""
Ensembles: T hypotheses of one configuration that differ only in their seed
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from errors import ConfigError, TrainingDivergedError
from trainers.trainer import sample_bbb_hypothesis, train, train_posterior

logger = logging.getLogger(__name__)


def parallel_map(fn, items, workers=1):
    """Map in worker processes; results come back in the order of items"""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _train_member(config, data, member):
    seed, index = member
    try:
        return train(config.with_seed(seed), data)
    except TrainingDivergedError as e:
        raise TrainingDivergedError(e.epoch, member=index, detail=e.detail) from e


def train_ensemble(config, data, T, base_seed, workers=1):
    """
    Train T members, member t with seed base_seed + t

    bayes_by_backprop trains one posterior with base_seed and samples T
    realizations from it with seeds base_seed + t.
    """
    if T < 1:
        raise ConfigError(f"ensemble size T must be at least 1, got {T}")
    seeds = [int(base_seed) + t for t in range(T)]
    logger.info(f"Training ensemble of {T} x {config.algorithm} (base seed {base_seed}, workers {workers})")

    if config.is_bayesian:
        try:
            posterior, curve = train_posterior(config.with_seed(base_seed), data)
        except TrainingDivergedError as e:
            raise TrainingDivergedError(e.epoch, member=0, detail=e.detail) from e
        return [sample_bbb_hypothesis(posterior, seed, config, curve) for seed in seeds]

    members = parallel_map(partial(_train_member, config, data), list(zip(seeds, range(T))), workers)
    logger.info(f"Ensemble of {config.algorithm} complete")
    return members
