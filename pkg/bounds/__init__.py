"""Closed-form generalization bounds"""

from .generalization import (
    DROPOUT_FORMS,
    BoundInputs,
    all_bounds,
    corollary1_risk_bound,
    dropout_bound,
    lemma1_bound,
    theorem1_bound,
    theorem2_bound,
)

__all__ = [
    'DROPOUT_FORMS', 'BoundInputs', 'all_bounds', 'corollary1_risk_bound', 'dropout_bound',
    'lemma1_bound', 'theorem1_bound', 'theorem2_bound',
]
