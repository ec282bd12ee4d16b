"""Evaluation reports and the statistical comparison of systems."""

from .metrics import (
    EvalReport,
    EvaluationError,
    accuracy_pct,
    accuracy_table,
    error_table,
    evaluate,
    mean_improvement,
    relative_improvement,
)
from .stats import (
    EffectSize,
    PairComparison,
    StatsError,
    cohens_d,
    comparison_table,
    magnitude_label,
    studentized_range_cdf,
    studentized_range_quantile,
    tukey_hsd,
)

__all__ = [
    "EffectSize", "EvalReport", "EvaluationError", "PairComparison", "StatsError",
    "accuracy_pct", "accuracy_table", "cohens_d", "comparison_table", "error_table",
    "evaluate", "magnitude_label", "mean_improvement", "relative_improvement",
    "studentized_range_cdf", "studentized_range_quantile", "tukey_hsd",
]
