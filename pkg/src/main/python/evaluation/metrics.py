"""
巨觀平均 Precision / Recall / F1

分母為 0 時指標記為 0；none 類別預設不納入巨觀平均
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from ..core.exceptions import InputError
from ..data.dataset import NONE_LABEL

logger = logging.getLogger(__name__)


@dataclass
class ConfusionTable:
    """每個標籤的 TP / FP / FN 計數"""
    labels: List[str]
    tp: Dict[str, int] = field(default_factory=dict)
    fp: Dict[str, int] = field(default_factory=dict)
    fn: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for label in self.labels:
            self.tp.setdefault(label, 0)
            self.fp.setdefault(label, 0)
            self.fn.setdefault(label, 0)

    @property
    def total_predictions(self) -> int:
        return sum(self.tp[label] + self.fp[label] for label in self.labels)

    def counts(self) -> Dict[str, Dict[str, int]]:
        return {label: {"tp": self.tp[label], "fp": self.fp[label], "fn": self.fn[label]} for label in self.labels}


@dataclass
class ClassScores:
    precision: float
    recall: float
    f1: float


@dataclass
class MetricsReport:
    """單一 (K, mode, seed) 格的評估結果"""
    per_class: Dict[str, ClassScores]
    macro_p: float
    macro_r: float
    macro_f1: float
    shots: int = 0
    mode: str = ""
    seed: int = 0
    counts: Dict[str, Dict[str, int]] = field(default_factory=dict)
    include_none: bool = False

    def to_row(self) -> Dict[str, Any]:
        """CSV 列：shots, mode, seed, macro 指標，再接每類的 f1/p/r"""
        row: Dict[str, Any] = {
            "shots": self.shots,
            "mode": self.mode,
            "seed": self.seed,
            "macro_f1": self.macro_f1,
            "macro_p": self.macro_p,
            "macro_r": self.macro_r,
        }
        for label, scores in self.per_class.items():
            row[f"{label}_f1"] = scores.f1
            row[f"{label}_p"] = scores.precision
            row[f"{label}_r"] = scores.recall
        return row

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.to_row(),
            "include_none": self.include_none,
            "counts": self.counts,
        }


def confusion(preds: Sequence[str], golds: Sequence[str], labels: Sequence[str]) -> ConfusionTable:
    """多類別 TP/FP/FN 統計"""
    if len(preds) != len(golds):
        raise InputError(f"{len(preds)} predictions for {len(golds)} gold labels")
    known = set(labels)
    table = ConfusionTable(labels=list(labels))
    for pred, gold in zip(preds, golds):
        for label in (pred, gold):
            if label not in known:
                raise InputError(f"unknown label '{label}'")
        if pred == gold:
            table.tp[gold] += 1
        else:
            table.fp[pred] += 1
            table.fn[gold] += 1
    return table


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def class_scores(tp: int, fp: int, fn: int) -> ClassScores:
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return ClassScores(precision=p, recall=r, f1=f1)


def macro_prf(table: ConfusionTable,
              include_none: bool = False,
              shots: int = 0,
              mode: str = "",
              seed: int = 0) -> MetricsReport:
    """每類 P/R/F1 與事件類型上的未加權平均"""
    per_class = {label: class_scores(table.tp[label], table.fp[label], table.fn[label]) for label in table.labels}
    averaged = [label for label in table.labels if include_none or label != NONE_LABEL]

    def mean(attr: str) -> float:
        if not averaged:
            return 0.0
        return sum(getattr(per_class[label], attr) for label in averaged) / len(averaged)

    return MetricsReport(
        per_class=per_class,
        macro_p=mean("precision"),
        macro_r=mean("recall"),
        macro_f1=mean("f1"),
        shots=shots,
        mode=mode,
        seed=seed,
        counts=table.counts(),
        include_none=include_none,
    )


def evaluate_predictions(preds: Sequence[str],
                         golds: Sequence[str],
                         labels: Sequence[str],
                         include_none: bool = False,
                         shots: int = 0,
                         mode: str = "",
                         seed: int = 0) -> MetricsReport:
    return macro_prf(confusion(preds, golds, labels), include_none, shots, mode, seed)


SUMMARY_COLUMNS = ["shots", "mode", "seeds", "macro_f1_mean", "macro_f1_std",
                   "macro_p_mean", "macro_p_std", "macro_r_mean", "macro_r_std"]


def aggregate_reports(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    """依 (K, mode) 彙總多個種子：平均與母體標準差"""
    rows = []
    groups: Dict[tuple, List[MetricsReport]] = {}
    for report in reports:
        groups.setdefault((report.shots, report.mode), []).append(report)

    for (shots, mode), group in groups.items():
        row: Dict[str, Any] = {"shots": shots, "mode": mode, "seeds": len(group)}
        for metric in ("macro_f1", "macro_p", "macro_r"):
            values = np.array([getattr(r, metric) for r in group], dtype=np.float64)
            row[f"{metric}_mean"] = float(values.mean())
            row[f"{metric}_std"] = float(values.std())
        rows.append(row)
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
