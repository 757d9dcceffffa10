"""
Result files: records.csv, profiles.csv, measure.csv and report.json

Rows are written in the order given and floats in repr form, so identical
runs produce identical bytes.
"""

import csv
import json
import logging
from pathlib import Path

from analysis.report import RECORD_COLUMNS, ExperimentRecord

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ("config_hash", "algorithm", "norm", "radius", "epsilon_bar_emp", "variance_alpha")
MEASURE_COLUMNS = ("member", "model", "max_deviation")


def _write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    logger.info(f"Wrote {path}")


def write_records(path, records):
    _write_csv(path, RECORD_COLUMNS, (r.to_row() for r in records))


def read_records(path):
    """Parse records.csv back into ExperimentRecords"""
    with open(path, "r", newline="") as f:
        return [ExperimentRecord.from_row(row) for row in csv.DictReader(f)]


def profile_rows(config_hash, algorithm, profile):
    return [
        {
            "config_hash": config_hash,
            "algorithm": algorithm,
            "norm": estimate.spec.norm,
            "radius": radius,
            "epsilon_bar_emp": estimate.epsilon_bar_emp,
            "variance_alpha": estimate.variance_alpha,
        }
        for radius, estimate in profile
    ]


def write_profiles(path, rows):
    _write_csv(path, PROFILE_COLUMNS, rows)


def write_measure(path, model_paths, estimate):
    rows = [
        {"member": t, "model": str(p), "max_deviation": value}
        for t, (p, value) in enumerate(zip(model_paths, estimate.per_run_max))
    ]
    _write_csv(path, MEASURE_COLUMNS, rows)


def write_report(path, report):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote {path}")
