"""
Ensemble Robustness Toolkit
Command-line orchestrator: run / sweep experiments, evaluate bounds, measure saved models
"""

import argparse
import logging
import os
import sys
from dataclasses import replace

from errors import ConfigError, EnsembleRobustnessError
from experiments.config_parser import parse_config
from experiments.runner import cmd_bounds, cmd_measure, cmd_run, load_datasets
from loaders.idx_loader import load_idx
from networks.loss import DEFAULT_LOSS_BOUND, BoundedLoss
from robustness.perturbation import NORMS, PerturbationSpec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def configure_logging(level_name):
    level = getattr(logging, (level_name or "INFO").upper(), None)
    if not isinstance(level, int):
        raise ConfigError(f"unknown log level {level_name!r}")
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def default_workers(config):
    """ENSROB_WORKERS if set, else the ensemble size capped by the available cores"""
    env = os.getenv("ENSROB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as e:
            raise ConfigError(f"ENSROB_WORKERS must be an integer, got {env!r}") from e
    return max(1, min(config.T, os.cpu_count() or 1))


class ArgumentParser(argparse.ArgumentParser):
    """Raises ConfigError on bad or missing flags so they exit with code 1"""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser():
    parser = ArgumentParser(prog="ensrob", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--log-level", default=os.getenv("ENSROB_LOG_LEVEL", "INFO"))
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run", "sweep"):
        p = sub.add_parser(name, help="train, measure and report the configured experiment"
                           if name == "run" else "run with a grid or random_search section")
        p.add_argument("config", help="JSON experiment configuration")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--output", default=None, help="override output.directory")

    p = sub.add_parser("bounds", help="evaluate the generalization bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--M", type=float, default=DEFAULT_LOSS_BOUND)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--epsilon-bar", type=float, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--L", type=int, default=None, dest="L_layers")
    p.add_argument("--form", choices=("stated", "proof"), default="stated")
    p.add_argument("--adv-mean", type=float, default=None)

    p = sub.add_parser("measure", help="empirical ensemble robustness of saved models")
    p.add_argument("models", nargs="+")
    p.add_argument("--config", default=None, help="take the dataset from this experiment config")
    p.add_argument("--images", default=None)
    p.add_argument("--labels", default=None)
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--norm", choices=NORMS, default="Linf")
    p.add_argument("--radius", type=float, default=0.1)
    p.add_argument("--clamp", action="store_true")
    p.add_argument("--M", type=float, default=DEFAULT_LOSS_BOUND)
    p.add_argument("--sample-cap", type=int, default=None)
    p.add_argument("--output", default=None, help="directory for measure.csv")
    return parser


def _run(args):
    config = parse_config(args.config)
    if args.command == "sweep" and not config.is_sweep:
        raise ConfigError("sweep needs a 'grid' or 'random_search' section")
    if args.output:
        config = replace(config, output_dir=args.output)
    workers = args.workers if args.workers is not None else default_workers(config)
    cmd_run(config, workers=max(1, workers))


def _measure(args):
    if args.config:
        data, _ = load_datasets(parse_config(args.config).dataset)
    elif args.images and args.labels:
        data = load_idx(args.images, args.labels, args.classes)
    else:
        raise ConfigError("measure needs --config or both --images and --labels")
    spec = PerturbationSpec(args.norm, args.radius, args.clamp)
    cmd_measure(args.models, data, spec, BoundedLoss(args.M), args.sample_cap, output_dir=args.output)


def main(argv=None):
    """Parse arguments, dispatch the subcommand, map failures to exit codes"""
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    stage = args.command
    try:
        if args.command in ("run", "sweep"):
            _run(args)
        elif args.command == "bounds":
            cmd_bounds(args.n, args.M, args.delta, args.epsilon_bar, args.alpha, args.K,
                       args.beta, args.L_layers, args.form, args.adv_mean)
        elif args.command == "measure":
            _measure(args)
    except ConfigError as e:
        logger.error(f"{stage} failed: {e}")
        return EXIT_CONFIG
    except (EnsembleRobustnessError, OSError) as e:
        logger.error(f"{stage} failed: {e}", exc_info=True)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
