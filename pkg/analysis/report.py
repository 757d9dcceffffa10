"""
Experiment records and the correlation report built from them

One ExperimentRecord per configuration. The report relates ensemble
robustness (and single-run robustness) to the generalization gap, overall
and per algorithm, and carries scatter-ready points.
"""

import json
import logging
from dataclasses import dataclass, field, fields

import numpy as np

from analysis.correlation import pearson, spearman
from errors import ConfigError, CorrelationUndefinedError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentRecord:
    config_hash: str
    algorithm: str
    hyperparameters: dict
    T: int
    norm: str
    radius: float
    epsilon_bar_emp: float
    variance_alpha: float
    robustness_T1: float
    train_error: float
    test_error: float
    mean_test_error: float
    error_gap: float
    loss_gap: float
    adversarial_train_error: float
    randomized_member: int
    randomized_perturbed_error: float
    theorem1_bound: float
    corollary1_bound: float
    theorem2_bound: float
    lemma1_bound: float

    def __post_init__(self):
        for name in ("train_error", "test_error", "mean_test_error", "adversarial_train_error",
                     "randomized_perturbed_error"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if not -1.0 <= self.error_gap <= 1.0:
            raise ConfigError(f"error_gap must lie in [-1, 1], got {self.error_gap}")
        if self.epsilon_bar_emp < 0:
            raise ConfigError(f"epsilon_bar_emp must be non-negative, got {self.epsilon_bar_emp}")

    def to_row(self):
        """Strings for one CSV row; floats in repr form so rows round-trip exactly"""
        row = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "hyperparameters":
                row[f.name] = json.dumps(value, sort_keys=True, separators=(",", ":"))
            elif isinstance(value, float):
                row[f.name] = repr(value)
            else:
                row[f.name] = str(value)
        return row

    @classmethod
    def from_row(cls, row):
        missing = [name for name in RECORD_COLUMNS if name not in row]
        if missing:
            raise ConfigError(f"record row lacks columns {missing}")
        values = {}
        for f in fields(cls):
            raw = row[f.name]
            if f.name == "hyperparameters":
                values[f.name] = json.loads(raw)
            elif f.name in ("config_hash", "algorithm", "norm"):
                values[f.name] = raw
            elif f.name in ("T", "randomized_member"):
                values[f.name] = int(raw)
            else:
                values[f.name] = float(raw)
        return cls(**values)


RECORD_COLUMNS = tuple(f.name for f in fields(ExperimentRecord))


@dataclass
class ExperimentReport:
    record_count: int
    correlations: dict = field(default_factory=dict)
    per_algorithm: dict = field(default_factory=dict)
    error_table: dict = field(default_factory=dict)
    perturbed_error_table: dict = field(default_factory=dict)
    points: list = field(default_factory=list)

    def to_dict(self):
        return {
            "record_count": self.record_count,
            "correlations": self.correlations,
            "per_algorithm": self.per_algorithm,
            "error_table": self.error_table,
            "perturbed_error_table": self.perturbed_error_table,
            "points": self.points,
        }


def _safe(estimator, xs, ys, label):
    try:
        return estimator(xs, ys)
    except CorrelationUndefinedError as e:
        logger.warning(f"Correlation {label} unavailable: {e}")
        return None


def _correlations(records, scope):
    eps = [r.epsilon_bar_emp for r in records]
    t1 = [r.robustness_T1 for r in records]
    alpha = [r.variance_alpha for r in records]
    error_gap = [r.error_gap for r in records]
    loss_gap = [r.loss_gap for r in records]
    return {
        "pearson_epsilon_bar_vs_error_gap": _safe(pearson, eps, error_gap, f"{scope} pearson eps/error"),
        "spearman_epsilon_bar_vs_error_gap": _safe(spearman, eps, error_gap, f"{scope} spearman eps/error"),
        "pearson_epsilon_bar_vs_loss_gap": _safe(pearson, eps, loss_gap, f"{scope} pearson eps/loss"),
        "spearman_epsilon_bar_vs_loss_gap": _safe(spearman, eps, loss_gap, f"{scope} spearman eps/loss"),
        "pearson_robustness_T1_vs_error_gap": _safe(pearson, t1, error_gap, f"{scope} pearson T1/error"),
        "spearman_robustness_T1_vs_error_gap": _safe(spearman, t1, error_gap, f"{scope} spearman T1/error"),
        "spearman_variance_vs_error_gap": _safe(spearman, alpha, error_gap, f"{scope} spearman alpha/error"),
    }


def build_report(records):
    """
    Aggregate records into correlations, per-algorithm summaries and points

    Correlations that cannot be computed (fewer than 2 records, zero variance)
    are None.
    """
    records = list(records)
    report = ExperimentReport(record_count=len(records))
    report.points = [
        {
            "config_hash": r.config_hash,
            "algorithm": r.algorithm,
            "epsilon_bar_emp": r.epsilon_bar_emp,
            "robustness_T1": r.robustness_T1,
            "error_gap": r.error_gap,
            "loss_gap": r.loss_gap,
        }
        for r in records
    ]
    if not records:
        return report
    report.correlations = _correlations(records, "overall")

    groups = {}
    for r in records:
        groups.setdefault(r.algorithm, []).append(r)
    for algorithm in sorted(groups):
        group = groups[algorithm]
        mean_test_error = float(np.mean([r.mean_test_error for r in group]))
        report.per_algorithm[algorithm] = {
            "count": len(group),
            "mean_test_error": mean_test_error,
            "mean_test_accuracy": 1.0 - mean_test_error,
            "mean_variance_alpha": float(np.mean([r.variance_alpha for r in group])),
            "mean_epsilon_bar_emp": float(np.mean([r.epsilon_bar_emp for r in group])),
            "correlations": _correlations(group, algorithm),
        }
        report.error_table[algorithm] = round(100.0 * mean_test_error, 4)
        # member 0 on its own adversarial samples vs a randomly drawn member on them, in percent
        report.perturbed_error_table[algorithm] = {
            "deterministic": round(100.0 * float(np.mean([r.adversarial_train_error for r in group])), 4),
            "randomized": round(100.0 * float(np.mean([r.randomized_perturbed_error for r in group])), 4),
        }
    logger.info(f"Report over {len(records)} records and {len(groups)} algorithms")
    return report
