"""
Tests for configuration parsing, the experiment runner and the command line
"""

import io
import json
import math
import os
import sys
from dataclasses import replace

import pytest

# Add parent directory to path to import modules
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from errors import ConfigError, PreconditionError, ProtocolError
from experiments.config_parser import parse_config, parse_config_dict
from experiments.records import read_records
from experiments.runner import cmd_bounds, cmd_measure, cmd_run, load_datasets
from loaders.synthetic import synthetic_blobs
from main import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from networks.loss import BoundedLoss
from networks.mlp import init_mlp
from networks.serialization import save_model
from robustness.measure import per_hypothesis_max_deviation
from robustness.perturbation import PerturbationSpec

SMALL_DATASET = {"type": "synthetic", "n": 60, "d": 3, "classes": 3, "separation": 0.3, "noise": 0.05, "seed": 4}


def small_config(tmp_path, **sections):
    data = {
        "dataset": SMALL_DATASET,
        "train": {"algorithm": "sgd", "hidden_dims": [5], "epochs": 0, "batch_size": 8},
        "measurement": {"T": 2, "radius": 0.1, "radii": [0.0, 0.1]},
        "output": {"directory": str(tmp_path / "out")},
        "seed": 3,
    }
    data.update(sections)
    return data


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2))
    return path


# ============================================================
# CONFIG PARSING
# ============================================================

def test_minimal_config_defaults():
    config = parse_config_dict({"dataset": {"type": "synthetic"}, "train": {"algorithm": "sgd"}})
    assert config.T == 5
    assert config.delta == 0.1
    assert config.loss_bound == math.log(100.0)
    assert config.norm == "Linf"
    assert len(config.train_configs) == 1
    assert config.train_configs[0].layer_dims == (2, 16, 2)
    assert not config.is_sweep


def test_unknown_train_key_is_named():
    with pytest.raises(ConfigError, match="lerning_rate"):
        parse_config_dict({"train": {"lerning_rate": 0.1}})


def test_unknown_section_key_is_named():
    with pytest.raises(ConfigError, match="measurement.Tee"):
        parse_config_dict({"measurement": {"Tee": 3}})


def test_syntax_error_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "seed": 1,\n  "train": {"lr": }\n}\n')
    with pytest.raises(ConfigError, match="line 3"):
        parse_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "absent.json")


def test_grid_is_cartesian_product():
    config = parse_config_dict({
        "train": {"epochs": 1},
        "grid": {"algorithms": ["sgd", "adversarial_linf"], "adv_radius": [0.1, 0.2, 0.3]},
    })
    assert len(config.train_configs) == 6
    assert config.is_sweep
    pairs = {(c.algorithm, c.adv_radius) for c in config.train_configs}
    assert len(pairs) == 6


def test_random_search_is_seeded():
    data = {"train": {"epochs": 1}, "random_search": {"count": 4, "seed": 9, "widths": [4, 8], "depths": [1]}}
    first = parse_config_dict(data).train_configs
    second = parse_config_dict(data).train_configs
    assert first == second
    assert len(first) == 4
    assert all(c.layer_dims[1] in (4, 8) and len(c.layer_dims) == 3 for c in first)
    assert all(0.005 <= c.lr <= 0.05 for c in first)


@pytest.mark.parametrize("name,count", [("minimal", 1), ("adversarial_vs_sgd", 2), ("correlation_sweep", 12)])
def test_shipped_configs_parse(name, count):
    root = os.path.dirname(os.path.abspath(__file__))
    config = parse_config(os.path.join(root, "configs", f"{name}.json"))
    assert len(config.train_configs) == count


def test_invalid_measurement_values():
    with pytest.raises(ConfigError):
        parse_config_dict({"measurement": {"T": 0}})
    with pytest.raises(ConfigError):
        parse_config_dict({"measurement": {"norm": "L3"}})


def test_train_list_gives_one_config_each():
    config = parse_config_dict({"train": [{"algorithm": "sgd"}, {"algorithm": "sgd_dropout"}]})
    assert [c.algorithm for c in config.train_configs] == ["sgd", "sgd_dropout"]
    assert config.train_configs[1].dropout_rate == 0.5


# ============================================================
# RUN
# ============================================================

def test_run_untrained_smoke(tmp_path):
    config = parse_config_dict(small_config(tmp_path))
    report = cmd_run(config)
    out = tmp_path / "out"
    records = read_records(out / "records.csv")
    assert len(records) == 1 and report.record_count == 1
    record = records[0]
    assert record.T == 2
    assert 0.0 <= record.epsilon_bar_emp <= config.loss_bound
    assert record.theorem1_bound > 0
    assert (out / "profiles.csv").read_text().count("\n") == 1 + 2
    assert (out / "models" / f"{record.config_hash}_0.bin").exists()
    assert (out / "models" / f"{record.config_hash}_1.bin.json").exists()
    assert 0 <= record.randomized_member < 2
    assert 0.0 <= record.randomized_perturbed_error <= 1.0
    saved_report = json.loads((out / "report.json").read_text())
    assert set(saved_report["perturbed_error_table"]["sgd"]) == {"deterministic", "randomized"}


def test_rerun_is_byte_identical(tmp_path):
    data = small_config(tmp_path, train={"algorithm": "sgd_dropout", "hidden_dims": [5], "epochs": 2, "batch_size": 8})
    config = parse_config_dict(data)
    cmd_run(replace(config, output_dir=str(tmp_path / "a")), workers=1)
    cmd_run(replace(config, output_dir=str(tmp_path / "b")), workers=1)
    cmd_run(replace(config, output_dir=str(tmp_path / "c")), workers=4)
    first = (tmp_path / "a" / "records.csv").read_bytes()
    assert first == (tmp_path / "b" / "records.csv").read_bytes()
    assert first == (tmp_path / "c" / "records.csv").read_bytes()
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "c" / "report.json").read_bytes()


def test_twelve_point_sweep_report_fields(tmp_path):
    data = small_config(
        tmp_path,
        train={"epochs": 1, "batch_size": 8},
        grid={
            "algorithms": ["sgd", "sgd_dropout", "prioritized", "adversarial_linf"],
            "hidden_dims": [[3], [5], [8]],
        },
    )
    config = parse_config_dict(data)
    assert len(config.train_configs) == 12
    cmd_run(replace(config, save_models=False))
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["record_count"] == 12
    assert "pearson_epsilon_bar_vs_error_gap" in report["correlations"]
    assert "spearman_epsilon_bar_vs_error_gap" in report["correlations"]
    assert sorted(report["per_algorithm"]) == ["adversarial_linf", "prioritized", "sgd", "sgd_dropout"]
    assert not (tmp_path / "out" / "models").exists()


def test_load_datasets_split_sizes():
    config = parse_config_dict({"dataset": SMALL_DATASET})
    train, test = load_datasets(config.dataset)
    assert (train.n, test.n) == (48, 12)


# ============================================================
# BOUNDS COMMAND
# ============================================================

def test_bounds_theorem1_line():
    out = io.StringIO()
    cmd_bounds(n=100, M=1.0, delta=0.1, epsilon_bar=0.0, stream=out)
    assert out.getvalue().splitlines() == ["theorem1 0.447213595"]


def test_bounds_without_alpha_omits_theorem2():
    out = io.StringIO()
    cmd_bounds(n=1000, M=1.0, delta=0.1, epsilon_bar=0.1, K=4, stream=out)
    printed = dict(line.split() for line in out.getvalue().splitlines())
    assert list(printed) == ["theorem1", "lemma1"]
    assert float(printed["lemma1"]) == pytest.approx(0.200749, abs=1e-5)


def test_bounds_all_forms():
    out = io.StringIO()
    bounds = cmd_bounds(n=800, M=1.0, delta=0.2, epsilon_bar=0.05, alpha=0.01, K=2, L_layers=8,
                        form="stated", adv_mean=0.1, stream=out)
    assert list(bounds) == ["theorem1", "corollary1", "theorem2", "lemma1", "dropout_stated"]
    assert all(len(line.split()[1].split(".")[1]) == 9 for line in out.getvalue().splitlines())


def test_bounds_proof_precondition():
    with pytest.raises(PreconditionError, match="beta"):
        cmd_bounds(n=800, M=1.0, delta=0.2, epsilon_bar=0.05, K=2, beta=0.9, L_layers=8,
                   form="proof", stream=io.StringIO())


# ============================================================
# MEASURE COMMAND
# ============================================================

@pytest.fixture
def measure_data():
    return synthetic_blobs(30, 3, 3, 0.3, 0.05, seed=1)


def saved(tmp_path, seed, dims=(3, 5, 3)):
    path = tmp_path / f"model_{seed}_{len(dims)}.bin"
    save_model(path, init_mlp(list(dims), seed=seed))
    return path


def measure_lines(estimate_stream):
    return dict(line.split() for line in estimate_stream.getvalue().splitlines())


def test_measure_single_model(tmp_path, measure_data):
    out = io.StringIO()
    estimate = cmd_measure([saved(tmp_path, 0)], measure_data, PerturbationSpec("Linf", 0.1), BoundedLoss(),
                           output_dir=tmp_path / "m", stream=out)
    lines = measure_lines(out)
    assert lines["T"] == "1"
    assert lines["variance_alpha"] == "0.000000000"
    assert estimate.variance_alpha == 0.0
    assert (tmp_path / "m" / "measure.csv").read_text().splitlines()[0] == "member,model,max_deviation"


def test_measure_zero_radius(tmp_path, measure_data):
    paths = [saved(tmp_path, 0), saved(tmp_path, 1)]
    estimate = cmd_measure(paths, measure_data, PerturbationSpec("L2", 0.0), BoundedLoss(), stream=io.StringIO())
    assert estimate.epsilon_bar_emp == 0.0


def test_measure_duplicated_model(tmp_path, measure_data):
    path = saved(tmp_path, 2)
    spec = PerturbationSpec("Linf", 0.1)
    estimate = cmd_measure([path, path], measure_data, spec, BoundedLoss(), stream=io.StringIO())
    assert estimate.variance_alpha == 0.0
    single = per_hypothesis_max_deviation(init_mlp([3, 5, 3], seed=2), measure_data, spec, BoundedLoss())
    assert estimate.epsilon_bar_emp == single


def test_measure_mismatched_architectures(tmp_path, measure_data):
    paths = [saved(tmp_path, 0), saved(tmp_path, 1, dims=(3, 4, 3))]
    with pytest.raises(ProtocolError):
        cmd_measure(paths, measure_data, PerturbationSpec(), BoundedLoss(), stream=io.StringIO())


def test_measure_dimension_mismatch(tmp_path, measure_data):
    with pytest.raises(ProtocolError):
        cmd_measure([saved(tmp_path, 0, dims=(4, 3))], measure_data, PerturbationSpec(), BoundedLoss(),
                    stream=io.StringIO())


# ============================================================
# COMMAND LINE
# ============================================================

def test_main_bounds_exit_ok(capsys):
    code = main(["bounds", "--n", "100", "--M", "1", "--delta", "0.1", "--epsilon-bar", "0"])
    assert code == EXIT_OK
    assert "theorem1 0.447213595" in capsys.readouterr().out


def test_main_domain_error_is_config_exit():
    assert main(["bounds", "--n", "100", "--delta", "1.5", "--epsilon-bar", "0"]) == EXIT_CONFIG


def test_main_missing_flag_is_config_exit(capsys):
    assert main(["bounds", "--delta", "0.1", "--epsilon-bar", "0"]) == EXIT_CONFIG
    assert "--n" in capsys.readouterr().err


def test_main_malformed_flag_is_config_exit():
    assert main(["bounds", "--n", "abc", "--delta", "0.1", "--epsilon-bar", "0"]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG


def test_main_missing_config_is_config_exit(tmp_path):
    assert main(["run", str(tmp_path / "absent.json")]) == EXIT_CONFIG


def test_main_sweep_needs_grid(tmp_path):
    path = write_config(tmp_path, small_config(tmp_path))
    assert main(["sweep", str(path)]) == EXIT_CONFIG


def test_main_run_writes_records(tmp_path):
    path = write_config(tmp_path, small_config(tmp_path))
    assert main(["run", str(path), "--workers", "1", "--output", str(tmp_path / "cli")]) == EXIT_OK
    assert (tmp_path / "cli" / "records.csv").exists()


def test_main_bad_model_file_is_runtime_exit(tmp_path):
    bogus = tmp_path / "bogus.bin"
    bogus.write_bytes(b"not a model file at all")
    config = write_config(tmp_path, small_config(tmp_path))
    assert main(["measure", str(bogus), "--config", str(config)]) == EXIT_RUNTIME


def test_main_corrupt_sidecar_is_runtime_exit(tmp_path):
    path = tmp_path / "m.bin"
    save_model(path, init_mlp([3, 5, 3], seed=0), {"seed": 0})
    (tmp_path / "m.bin.json").write_text("{not json")
    config = write_config(tmp_path, small_config(tmp_path))
    assert main(["measure", str(path), "--config", str(config)]) == EXIT_RUNTIME


# ============================================================
# MNIST SMOKE
# ============================================================

@pytest.mark.slow
@pytest.mark.skipif(not os.getenv("ENSROB_MNIST_DIR"), reason="ENSROB_MNIST_DIR not set")
def test_mnist_smoke():
    from analysis.gap import misclassification_rate
    from loaders.idx_loader import load_idx
    from trainers.config import baseline_defaults
    from trainers.trainer import train

    root = os.getenv("ENSROB_MNIST_DIR")
    train_data = load_idx(os.path.join(root, "train-images-idx3-ubyte"), os.path.join(root, "train-labels-idx1-ubyte"))
    test_data = load_idx(os.path.join(root, "t10k-images-idx3-ubyte"), os.path.join(root, "t10k-labels-idx1-ubyte"))
    config = replace(baseline_defaults([784, 128, 10]), epochs=5)
    h = train(config, train_data)
    assert misclassification_rate(h.model, test_data) <= 0.05
    bound = BoundedLoss()
    deviation = per_hypothesis_max_deviation(h, train_data, PerturbationSpec("Linf", 0.1), bound, sample_cap=5000)
    assert 0.0 < deviation < bound.M


# ============================================================
# SHIPPED EXPERIMENTS
# ============================================================

def shipped_config(name):
    root = os.path.dirname(os.path.abspath(__file__))
    return parse_config(os.path.join(root, "configs", f"{name}.json"))


@pytest.mark.slow
def test_adversarial_training_lowers_epsilon_bar(tmp_path):
    config = shipped_config("adversarial_vs_sgd")
    wins = 0
    for seed in (0, 100, 200, 300, 400):
        out = tmp_path / f"s{seed}"
        cmd_run(replace(config, seed=seed, radii=(0.1,), output_dir=str(out), save_models=False))
        eps = {r.algorithm: r.epsilon_bar_emp for r in read_records(out / "records.csv")}
        wins += eps["adversarial_linf"] < eps["sgd"]
    assert wins >= 4


@pytest.mark.slow
def test_sweep_epsilon_bar_tracks_error_gap(tmp_path):
    config = shipped_config("correlation_sweep")
    cmd_run(replace(config, radii=(0.1,), output_dir=str(tmp_path), save_models=False))
    correlations = json.loads((tmp_path / "report.json").read_text())["correlations"]
    assert correlations["spearman_epsilon_bar_vs_error_gap"] >= 0.5
    assert (correlations["pearson_epsilon_bar_vs_error_gap"]
            >= correlations["pearson_robustness_T1_vs_error_gap"] - 0.05)
