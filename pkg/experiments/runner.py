"""
Experiment runner
Trains each configuration's ensemble, measures its robustness, gaps and
bounds, and writes the result files once every configuration is done.
"""

import logging
import sys
from pathlib import Path

import numpy as np

from analysis.gap import generalization_gap, misclassification_rate
from analysis.report import ExperimentRecord, build_report
from bounds.generalization import BoundInputs, all_bounds
from errors import ProtocolError
from experiments.records import (
    profile_rows,
    write_measure,
    write_profiles,
    write_records,
    write_report,
)
from loaders.dataset import split
from loaders.idx_loader import load_idx
from loaders.synthetic import synthetic_blobs
from networks.loss import BoundedLoss
from networks.serialization import load_model, save_model
from robustness.measure import (
    adversarial_mean_loss,
    deviation_profile,
    empirical_ensemble_robustness,
    robustness_comparison,
)
from robustness.perturbation import PerturbationSpec
from trainers.config import Hypothesis
from trainers.ensemble import train_ensemble

logger = logging.getLogger(__name__)


def load_datasets(spec):
    """(train, test) for a DatasetSpec"""
    if spec.type == "synthetic":
        full = synthetic_blobs(spec.n, spec.d, spec.class_count, spec.separation, spec.noise, spec.seed)
        return split(full, spec.split_fraction, spec.split_seed)
    full = load_idx(spec.images, spec.labels, spec.class_count, spec.limit)
    if spec.test_images:
        return full, load_idx(spec.test_images, spec.test_labels, spec.class_count)
    return split(full, spec.split_fraction, spec.split_seed)


def measure_configuration(config, train_config, train_data, test_data, workers=1):
    """
    Train one configuration's ensemble and measure it

    Returns:
        (ExperimentRecord, deviation profile, ensemble members)
    """
    bound = BoundedLoss(config.loss_bound)
    spec = PerturbationSpec(config.norm, config.radius, config.clamp_to_unit_box)
    ensemble = train_ensemble(train_config, train_data, config.T, config.seed, workers)
    first = ensemble[0]

    estimate = empirical_ensemble_robustness(
        ensemble, train_data, spec, bound, config.sample_cap, config.cap_seed
    )
    gap = generalization_gap(first, train_data, test_data, bound)
    adv_mean = min(adversarial_mean_loss(first, train_data, spec, bound), config.loss_bound)
    inputs = BoundInputs(
        n=train_data.n,
        M=config.loss_bound,
        delta=config.delta,
        epsilon_bar=estimate.epsilon_bar_emp,
        K=config.K,
        alpha=estimate.variance_alpha,
    )
    bounds = all_bounds(inputs, adv_mean)
    comparison = robustness_comparison(ensemble, train_data, spec, bound, config.seed)
    profile = deviation_profile(
        ensemble, train_data, config.radii, config.norm, bound,
        config.clamp_to_unit_box, config.sample_cap, config.cap_seed,
    )

    record = ExperimentRecord(
        config_hash=first.config_hash,
        algorithm=train_config.algorithm,
        hyperparameters=train_config.to_dict(),
        T=estimate.T,
        norm=spec.norm,
        radius=spec.radius,
        epsilon_bar_emp=estimate.epsilon_bar_emp,
        variance_alpha=estimate.variance_alpha,
        robustness_T1=estimate.per_run_max[0],
        train_error=gap.train_error,
        test_error=gap.test_error,
        mean_test_error=float(np.mean([misclassification_rate(h.model, test_data) for h in ensemble])),
        error_gap=gap.error_gap,
        loss_gap=gap.loss_gap,
        adversarial_train_error=comparison.deterministic_perturbed_error,
        randomized_member=comparison.randomized_member,
        randomized_perturbed_error=comparison.randomized_perturbed_error,
        theorem1_bound=bounds["theorem1"],
        corollary1_bound=bounds["corollary1"],
        theorem2_bound=bounds["theorem2"],
        lemma1_bound=bounds["lemma1"],
    )
    logger.info(
        f"{train_config.algorithm} [{record.config_hash}]: epsilon_bar_emp={record.epsilon_bar_emp:.6f} "
        f"error_gap={record.error_gap:.4f} test_error={record.test_error:.4f}"
    )
    return record, profile, ensemble


def cmd_run(config, workers=1):
    """
    Run every configuration and write records.csv, profiles.csv, report.json
    and, when enabled, models/<config_hash>_<t>.bin

    Returns:
        the ExperimentReport
    """
    logger.info("=" * 60)
    logger.info(f"Experiment run: {len(config.train_configs)} configuration(s) from {config.source}")
    logger.info("=" * 60)
    train_data, test_data = load_datasets(config.dataset)
    logger.info(f"Train set {train_data.n} samples, test set {test_data.n} samples")

    records, profiles, ensembles = [], [], []
    for index, train_config in enumerate(config.train_configs):
        logger.info(f"Configuration {index + 1}/{len(config.train_configs)}: {train_config.algorithm}")
        record, profile, ensemble = measure_configuration(config, train_config, train_data, test_data, workers)
        records.append(record)
        profiles += profile_rows(record.config_hash, record.algorithm, profile)
        ensembles.append(ensemble)

    out = Path(config.output_dir)
    report = build_report(records)
    write_records(out / "records.csv", records)
    write_profiles(out / "profiles.csv", profiles)
    write_report(out / "report.json", report)
    if config.save_models:
        for ensemble in ensembles:
            for t, h in enumerate(ensemble):
                save_model(out / "models" / f"{h.config_hash}_{t}.bin", h.model, h.metadata())
    logger.info("=" * 60)
    logger.info(f"Run complete: {len(records)} record(s) in {out}")
    logger.info("=" * 60)
    return report


def cmd_bounds(n, M, delta, epsilon_bar, alpha=None, K=None, beta=None, L_layers=None,
               form=None, adv_mean=None, stream=None):
    """Print every applicable bound as 'name value' with 9 decimals"""
    stream = stream or sys.stdout
    inputs = BoundInputs(n=n, M=M, delta=delta, epsilon_bar=epsilon_bar, K=K, alpha=alpha,
                         beta=beta, L_layers=L_layers)
    bounds = all_bounds(inputs, adv_mean, form)
    for name, value in bounds.items():
        print(f"{name} {value:.9f}", file=stream)
    return bounds


def cmd_measure(model_paths, data, spec, bound, sample_cap=None, cap_seed=0, output_dir=None, stream=None):
    """
    Empirical ensemble robustness of serialized models on a dataset

    Every file must hold the same architecture.
    """
    stream = stream or sys.stdout
    if not model_paths:
        raise ProtocolError("no model files given")
    models = [load_model(p)[0] for p in model_paths]
    dims = models[0].layer_dims
    for path, model in zip(model_paths, models):
        if model.layer_dims != dims:
            raise ProtocolError(f"{path} has architecture {list(model.layer_dims)}, expected {list(dims)}")
    if data.dim != dims[0]:
        raise ProtocolError(f"dataset dimension {data.dim} does not match model input {dims[0]}")

    config_hash = "measure:" + "-".join(str(d) for d in dims)
    ensemble = [Hypothesis(model, config_hash, t) for t, model in enumerate(models)]
    estimate = empirical_ensemble_robustness(ensemble, data, spec, bound, sample_cap, cap_seed)

    print(f"T {estimate.T}", file=stream)
    print(f"epsilon_bar_emp {estimate.epsilon_bar_emp:.9f}", file=stream)
    print(f"variance_alpha {estimate.variance_alpha:.9f}", file=stream)
    for t, value in enumerate(estimate.per_run_max):
        print(f"member_{t} {value:.9f}", file=stream)
    if output_dir is not None:
        write_measure(Path(output_dir) / "measure.csv", model_paths, estimate)
    return estimate
