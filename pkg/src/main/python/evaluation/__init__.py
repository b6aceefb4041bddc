"""
評估模組

- confusion / macro_prf: 巨觀平均 P/R/F1
- aggregate_reports: 多種子平均與標準差
- ExperimentRunner / run_experiment: K-shot × 模式 × 種子網格
"""

from .experiment import CellResult, ExperimentResult, ExperimentRunner, run_experiment, write_results
from .metrics import (
    ClassScores,
    ConfusionTable,
    MetricsReport,
    aggregate_reports,
    class_scores,
    confusion,
    evaluate_predictions,
    macro_prf,
)

__all__ = [
    "CellResult",
    "ExperimentResult",
    "ExperimentRunner",
    "run_experiment",
    "write_results",
    "ClassScores",
    "ConfusionTable",
    "MetricsReport",
    "aggregate_reports",
    "class_scores",
    "confusion",
    "evaluate_predictions",
    "macro_prf",
]
