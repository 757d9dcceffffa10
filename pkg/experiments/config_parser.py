"""
Experiment configuration
JSON file with sections dataset, train, grid, random_search, measurement,
bounds and output (schema in README.md). Unknown keys anywhere are errors.
"""

import itertools
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from errors import ConfigError
from loaders.idx_loader import peek_image_dim
from networks.loss import DEFAULT_LOSS_BOUND
from robustness.perturbation import NORMS
from trainers.config import (
    ALGORITHMS,
    REVISED_BATCH_SIZE,
    REVISED_LR_RANGE,
    REVISED_RADII,
    REVISED_WIDTHS,
    TrainConfig,
)

logger = logging.getLogger(__name__)

DEFAULT_T = 5
DEFAULT_DELTA = 0.1
DEFAULT_K = 10
DEFAULT_NORM = "Linf"
DEFAULT_RADIUS = 0.1
DEFAULT_RADII = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
DEFAULT_SPLIT_FRACTION = 0.8
DEFAULT_HIDDEN_DIMS = (16,)
DEFAULT_IDX_CLASSES = 10
DEFAULT_SYNTHETIC_CLASSES = 2

TOP_LEVEL_KEYS = ("dataset", "train", "grid", "random_search", "measurement", "bounds", "output", "seed")
DATASET_KEYS = ("type", "n", "d", "classes", "separation", "noise", "seed", "images", "labels",
                "test_images", "test_labels", "limit", "split_fraction", "split_seed")
GRID_KEYS = ("algorithms", "hidden_dims", "lr", "adv_radius")
RANDOM_SEARCH_KEYS = ("count", "seed", "algorithms", "widths", "depths", "lr_range", "radii", "batch_size")
MEASUREMENT_KEYS = ("T", "norm", "radius", "radii", "clamp_to_unit_box", "sample_cap", "cap_seed", "loss_bound")
BOUNDS_KEYS = ("delta", "K", "beta", "L_layers")
OUTPUT_KEYS = ("directory", "save_models")


@dataclass(frozen=True)
class DatasetSpec:
    """Synthetic blob parameters or IDX paths, plus the train/test split"""

    type: str = "synthetic"
    n: int = 1000
    d: int = 2
    classes: int = None  # synthetic default 2, idx default 10
    separation: float = 0.5
    noise: float = 0.05
    seed: int = 0
    images: str = None
    labels: str = None
    test_images: str = None
    test_labels: str = None
    limit: int = None
    split_fraction: float = DEFAULT_SPLIT_FRACTION
    split_seed: int = 0

    def __post_init__(self):
        if self.type not in ("synthetic", "idx"):
            raise ConfigError(f"dataset.type must be 'synthetic' or 'idx', got {self.type!r}")
        if self.type == "idx" and not (self.images and self.labels):
            raise ConfigError("dataset.images and dataset.labels are required for idx datasets")
        if bool(self.test_images) != bool(self.test_labels):
            raise ConfigError("dataset.test_images and dataset.test_labels go together")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError(f"dataset.split_fraction must lie in (0, 1), got {self.split_fraction}")

    def shape(self):
        """(input dimension, class count) without loading the samples"""
        if self.type == "synthetic":
            return self.d, self.class_count
        return peek_image_dim(self.images), self.class_count

    @property
    def class_count(self):
        if self.classes is not None:
            return int(self.classes)
        return DEFAULT_SYNTHETIC_CLASSES if self.type == "synthetic" else DEFAULT_IDX_CLASSES


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec
    train_configs: tuple
    T: int = DEFAULT_T
    norm: str = DEFAULT_NORM
    radius: float = DEFAULT_RADIUS
    radii: tuple = DEFAULT_RADII
    clamp_to_unit_box: bool = False
    sample_cap: int = None
    cap_seed: int = 0
    loss_bound: float = DEFAULT_LOSS_BOUND
    delta: float = DEFAULT_DELTA
    K: int = DEFAULT_K
    beta: float = None
    L_layers: int = None
    output_dir: str = "results"
    save_models: bool = True
    seed: int = 0
    is_sweep: bool = False
    source: str = field(default="<dict>", compare=False)

    def __post_init__(self):
        if not self.train_configs:
            raise ConfigError("no training configuration after grid expansion")
        if self.T < 1:
            raise ConfigError(f"measurement.T must be at least 1, got {self.T}")
        if self.norm not in NORMS:
            raise ConfigError(f"measurement.norm must be one of {NORMS}, got {self.norm!r}")
        if self.sample_cap is not None and self.sample_cap < 1:
            raise ConfigError(f"measurement.sample_cap must be positive, got {self.sample_cap}")


def _section(data, name, keys):
    section = data.get(name, {})
    if section is None:
        return {}
    if not isinstance(section, dict):
        raise ConfigError(f"'{name}' must be an object")
    for key in section:
        if key not in keys:
            raise ConfigError(f"unknown key '{name}.{key}'")
    return dict(section)


def _layer_dims(template, shape):
    hidden = template.pop("hidden_dims", None)
    if "layer_dims" in template:
        if hidden is not None:
            raise ConfigError("give either layer_dims or hidden_dims, not both")
        return template
    hidden = DEFAULT_HIDDEN_DIMS if hidden is None else hidden
    template["layer_dims"] = [shape[0], *hidden, shape[1]]
    return template


def _train_config(template, shape, loss_bound, prefix):
    if not isinstance(template, dict):
        raise ConfigError(f"'{prefix}' must be an object")
    template = _layer_dims(dict(template), shape)
    template.setdefault("loss_bound", loss_bound)
    return TrainConfig.from_dict(template, prefix)


def expand_grid(template, grid):
    """Cartesian product of the grid axes applied over the template"""
    axes = [(key, list(grid[key])) for key in GRID_KEYS if key in grid]
    renamed = {"algorithms": "algorithm"}
    expanded = []
    for values in itertools.product(*(v for _, v in axes)):
        entry = dict(template)
        for (key, _), value in zip(axes, values):
            entry[renamed.get(key, key)] = value
        expanded.append(entry)
    return expanded


def sample_random_search(template, search):
    """Configurations drawn from the revised-setup ranges with a seeded generator"""
    count = search.get("count", 0)
    if count < 1:
        raise ConfigError(f"random_search.count must be at least 1, got {count}")
    algorithms = search.get("algorithms", list(ALGORITHMS))
    widths = search.get("widths", list(REVISED_WIDTHS))
    depths = search.get("depths", [1, 2])
    low, high = search.get("lr_range", list(REVISED_LR_RANGE))
    radii = search.get("radii", list(REVISED_RADII))
    if not (0 < low <= high):
        raise ConfigError(f"random_search.lr_range must satisfy 0 < low <= high, got {[low, high]}")

    rng = np.random.default_rng(search.get("seed", 0))
    sampled = []
    for _ in range(count):
        entry = dict(template)
        entry["algorithm"] = algorithms[int(rng.integers(len(algorithms)))]
        width = int(widths[int(rng.integers(len(widths)))])
        entry["hidden_dims"] = [width] * int(depths[int(rng.integers(len(depths)))])
        entry["lr"] = float(rng.uniform(low, high))
        entry["adv_radius"] = float(radii[int(rng.integers(len(radii)))])
        entry.setdefault("batch_size", search.get("batch_size", REVISED_BATCH_SIZE))
        sampled.append(entry)
    return sampled


def parse_config_dict(data, source="<dict>"):
    """Build an ExperimentConfig from already-decoded JSON"""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be an object")
    for key in data:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"unknown key '{key}'")

    try:
        dataset = DatasetSpec(**_section(data, "dataset", DATASET_KEYS))
    except TypeError as e:
        raise ConfigError(f"dataset: {e}") from e
    measurement = _section(data, "measurement", MEASUREMENT_KEYS)
    bounds = _section(data, "bounds", BOUNDS_KEYS)
    output = _section(data, "output", OUTPUT_KEYS)
    grid = _section(data, "grid", GRID_KEYS) if "grid" in data else None
    search = _section(data, "random_search", RANDOM_SEARCH_KEYS) if "random_search" in data else None
    loss_bound = measurement.get("loss_bound", DEFAULT_LOSS_BOUND)

    train = data.get("train", {})
    templates = list(train) if isinstance(train, list) else [train]
    if grid is not None or search is not None:
        if len(templates) != 1:
            raise ConfigError("grid and random_search need a single 'train' template")
        expanded = []
        if grid is not None:
            expanded += expand_grid(templates[0], grid)
        if search is not None:
            expanded += sample_random_search(templates[0], search)
        templates = expanded

    shape = dataset.shape()
    train_configs = tuple(
        _train_config(template, shape, loss_bound, "train" if len(templates) == 1 else f"train[{i}]")
        for i, template in enumerate(templates)
    )

    config = ExperimentConfig(
        dataset=dataset,
        train_configs=train_configs,
        T=int(measurement.get("T", DEFAULT_T)),
        norm=measurement.get("norm", DEFAULT_NORM),
        radius=float(measurement.get("radius", DEFAULT_RADIUS)),
        radii=tuple(float(r) for r in measurement.get("radii", DEFAULT_RADII)),
        clamp_to_unit_box=bool(measurement.get("clamp_to_unit_box", False)),
        sample_cap=measurement.get("sample_cap"),
        cap_seed=int(measurement.get("cap_seed", 0)),
        loss_bound=float(loss_bound),
        delta=float(bounds.get("delta", DEFAULT_DELTA)),
        K=int(bounds.get("K", DEFAULT_K)),
        beta=bounds.get("beta"),
        L_layers=bounds.get("L_layers"),
        output_dir=output.get("directory", "results"),
        save_models=bool(output.get("save_models", True)),
        seed=int(data.get("seed", 0)),
        is_sweep=grid is not None or search is not None,
        source=source,
    )
    logger.info(f"Parsed {source}: {len(train_configs)} configuration(s), T={config.T}")
    return config


def parse_config(path):
    """Read and validate a JSON experiment configuration"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}: {e.msg}") from e
    return parse_config_dict(data, str(path))
