"""
Training configuration and the Hypothesis it produces
"""

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace

from errors import ConfigError
from networks.dropout import DEFAULT_DROPOUT_LAYERS
from networks.loss import DEFAULT_LOSS_BOUND
from networks.mlp import MlpModel, check_layer_dims

logger = logging.getLogger(__name__)

ALGORITHMS = (
    "sgd",
    "sgd_dropout",
    "prioritized",
    "prioritized_dropout",
    "adversarial_l1",
    "adversarial_l2",
    "adversarial_linf",
    "bayes_by_backprop",
)

ADVERSARIAL_NORMS = {"adversarial_l1": "L1", "adversarial_l2": "L2", "adversarial_linf": "Linf"}

# Used when a dropout / adversarial variant is configured without its knob
DEFAULT_DROPOUT_RATE = 0.5
DEFAULT_ADV_RADIUS = 0.1

# Revised experimental setup, used by random search
REVISED_WIDTHS = (400, 800, 1200)
REVISED_LR_RANGE = (0.005, 0.05)
REVISED_RADII = (0.1, 0.3, 0.5)
REVISED_BATCH_SIZE = 128


@dataclass(frozen=True)
class BbbSettings:
    """Bayes-by-backprop prior and posterior initialization"""

    prior_sigma: float = 1.0
    init_rho: float = -5.0
    kl_weight: float = None  # None: 1/n, the per-sample share of the KL term

    def __post_init__(self):
        if not (math.isfinite(self.prior_sigma) and self.prior_sigma > 0):
            raise ConfigError(f"bbb.prior_sigma must be positive, got {self.prior_sigma}")
        if not math.isfinite(self.init_rho):
            raise ConfigError(f"bbb.init_rho must be finite, got {self.init_rho}")
        if self.kl_weight is not None and not (math.isfinite(self.kl_weight) and self.kl_weight >= 0):
            raise ConfigError(f"bbb.kl_weight must be non-negative, got {self.kl_weight}")


@dataclass(frozen=True)
class TrainConfig:
    """One algorithm with all of its hyperparameters; defaults follow the first experimental setup"""

    algorithm: str = "sgd"
    layer_dims: tuple = (2, 16, 2)
    lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 1e-6
    lr_decay: float = 1.0
    batch_size: int = 100
    epochs: int = 10
    dropout_rate: float = 0.0
    dropout_layers: tuple = DEFAULT_DROPOUT_LAYERS
    adv_radius: float = 0.0
    clamp_adversarial: bool = False
    priority_exponent: float = 0.6
    bbb: BbbSettings = field(default_factory=BbbSettings)
    loss_bound: float = DEFAULT_LOSS_BOUND
    init_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layer_dims", check_layer_dims(self.layer_dims))
        object.__setattr__(self, "dropout_layers", tuple(int(i) for i in self.dropout_layers))
        if isinstance(self.bbb, dict):
            object.__setattr__(self, "bbb", _build(BbbSettings, self.bbb, "bbb"))
        self._validate()

    def _validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        numeric = ("lr", "momentum", "weight_decay", "lr_decay", "dropout_rate", "adv_radius",
                   "priority_exponent", "loss_bound", "init_scale")
        for name in numeric:
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        checks = [
            (self.lr > 0, "lr must be positive"),
            (0.0 <= self.momentum < 1.0, "momentum must lie in [0, 1)"),
            (self.weight_decay >= 0, "weight_decay must be non-negative"),
            (0.0 < self.lr_decay <= 1.0, "lr_decay must lie in (0, 1]"),
            (self.batch_size >= 1, "batch_size must be at least 1"),
            (self.epochs >= 0, "epochs must be non-negative"),
            (0.0 <= self.dropout_rate < 1.0, "dropout_rate must lie in [0, 1)"),
            (self.adv_radius >= 0, "adv_radius must be non-negative"),
            (self.priority_exponent >= 0, "priority_exponent must be non-negative"),
            (self.loss_bound > 0, "loss_bound must be positive"),
            (self.init_scale > 0, "init_scale must be positive"),
            (not self.uses_dropout or self.dropout_rate > 0, f"{self.algorithm} requires dropout_rate > 0"),
            (self.adversarial_norm is None or self.adv_radius > 0, f"{self.algorithm} requires adv_radius > 0"),
            (all(0 <= i < len(self.layer_dims) - 2 for i in self.dropout_layers) or not self.uses_dropout,
             f"dropout_layers {list(self.dropout_layers)} outside the hidden layers"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    @property
    def uses_dropout(self):
        return self.algorithm.endswith("_dropout")

    @property
    def uses_priority(self):
        return self.algorithm.startswith("prioritized")

    @property
    def adversarial_norm(self):
        return ADVERSARIAL_NORMS.get(self.algorithm)

    @property
    def is_bayesian(self):
        return self.algorithm == "bayes_by_backprop"

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_dict(self):
        data = asdict(self)
        data["layer_dims"] = list(self.layer_dims)
        data["dropout_layers"] = list(self.dropout_layers)
        return data

    def config_hash(self):
        """SHA-256 of the canonical JSON of every field except the seed"""
        data = self.to_dict()
        data.pop("seed")
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data, prefix="train"):
        """Build from a plain dict; unknown keys raise ConfigError naming the dotted key"""
        data = dict(data)
        algorithm = data.get("algorithm", "sgd")
        if algorithm.endswith("_dropout"):
            data.setdefault("dropout_rate", DEFAULT_DROPOUT_RATE)
        if algorithm in ADVERSARIAL_NORMS:
            data.setdefault("adv_radius", DEFAULT_ADV_RADIUS)
        if isinstance(data.get("bbb"), dict):
            data["bbb"] = _build(BbbSettings, data["bbb"], f"{prefix}.bbb")
        return _build(cls, data, prefix)


def _build(cls, data, prefix):
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key '{prefix}.{key}'")
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigError(f"{prefix}: {e}") from e


def baseline_defaults(layer_dims, algorithm="sgd", seed=0):
    """First experimental setup: batch 100, lr 0.01, momentum 0.9, decay 1e-6, dropout 0.5"""
    return TrainConfig.from_dict({
        "algorithm": algorithm,
        "layer_dims": list(layer_dims),
        "lr": 0.01,
        "momentum": 0.9,
        "weight_decay": 1e-6,
        "batch_size": 100,
        "seed": seed,
    })


@dataclass(frozen=True)
class Hypothesis:
    """A trained model and where it came from: one draw from the algorithm's output distribution"""

    model: MlpModel
    config_hash: str
    seed: int
    train_loss_curve: tuple = ()
    config: TrainConfig = None

    @property
    def algorithm(self):
        return self.config.algorithm if self.config is not None else None

    def metadata(self):
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "train_loss_curve": list(self.train_loss_curve),
            "config": self.config.to_dict() if self.config is not None else None,
        }
