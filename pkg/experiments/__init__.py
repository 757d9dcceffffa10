"""Experiment configuration, orchestration and result files"""

from .config_parser import DatasetSpec, ExperimentConfig, parse_config, parse_config_dict
from .records import read_records, write_records
from .runner import cmd_bounds, cmd_measure, cmd_run, load_datasets

__all__ = [
    'DatasetSpec', 'ExperimentConfig', 'cmd_bounds', 'cmd_measure', 'cmd_run', 'load_datasets',
    'parse_config', 'parse_config_dict', 'read_records', 'write_records',
]
