"""Generalization gaps, correlation estimators and the experiment report"""

from .correlation import pearson, spearman
from .gap import GapResult, generalization_gap, mean_loss, misclassification_rate
from .report import RECORD_COLUMNS, ExperimentRecord, ExperimentReport, build_report

__all__ = [
    'RECORD_COLUMNS', 'ExperimentRecord', 'ExperimentReport', 'GapResult', 'build_report',
    'generalization_gap', 'mean_loss', 'misclassification_rate', 'pearson', 'spearman',
]
