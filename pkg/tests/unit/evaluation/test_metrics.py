"""巨觀 P/R/F1 測試"""

import numpy as np
import pytest

from src.main.python.core.exceptions import InputError
from src.main.python.evaluation.metrics import (
    SUMMARY_COLUMNS,
    ConfusionTable,
    aggregate_reports,
    class_scores,
    confusion,
    evaluate_predictions,
    macro_prf,
)


def _oracle_f1(tp, fp, fn):
    return 2 * tp / (2 * tp + fp + fn) if tp else 0.0


def test_hand_computed_example():
    table = ConfusionTable(["E1", "E2"], tp={"E1": 3, "E2": 2}, fp={"E1": 1, "E2": 2}, fn={"E1": 1, "E2": 0})
    report = macro_prf(table)
    assert report.per_class["E1"].f1 == pytest.approx(0.75)
    assert report.per_class["E2"].precision == pytest.approx(0.5)
    assert report.per_class["E2"].recall == pytest.approx(1.0)
    assert report.macro_f1 == pytest.approx(0.708333, abs=1e-6)


def test_random_tables_match_brute_force():
    rng = np.random.default_rng(0)
    labels = ["E1", "E2", "E3", "none"]
    for _ in range(1000):
        counts = rng.integers(0, 6, size=(3, len(labels)))
        table = ConfusionTable(
            labels,
            tp=dict(zip(labels, counts[0].tolist())),
            fp=dict(zip(labels, counts[1].tolist())),
            fn=dict(zip(labels, counts[2].tolist())),
        )
        report = macro_prf(table)
        expected = np.mean([_oracle_f1(table.tp[l], table.fp[l], table.fn[l]) for l in labels[:-1]])
        assert abs(report.macro_f1 - expected) < 1e-12


def test_zero_denominators_score_zero():
    scores = class_scores(0, 0, 0)
    assert (scores.precision, scores.recall, scores.f1) == (0.0, 0.0, 0.0)
    assert class_scores(0, 2, 3).f1 == 0.0


def test_confusion_counts_and_none_handling():
    labels = ["A", "B", "none"]
    preds = ["A", "B", "none", "A", "B"]
    golds = ["A", "A", "none", "B", "B"]
    table = confusion(preds, golds, labels)
    assert table.counts()["A"] == {"tp": 1, "fp": 1, "fn": 1}
    assert table.total_predictions == len(preds)

    without_none = macro_prf(table)
    with_none = macro_prf(table, include_none=True)
    assert without_none.macro_f1 == pytest.approx(0.5)
    assert with_none.macro_f1 == pytest.approx((0.5 + 0.5 + 1.0) / 3)


def test_macro_f1_is_permutation_invariant():
    rng = np.random.default_rng(1)
    labels = ["A", "B", "C", "none"]
    preds = rng.choice(labels, size=40).tolist()
    golds = rng.choice(labels, size=40).tolist()
    base = evaluate_predictions(preds, golds, labels).macro_f1
    for _ in range(5):
        order = rng.permutation(40).tolist()
        shuffled = evaluate_predictions([preds[i] for i in order], [golds[i] for i in order], labels)
        assert shuffled.macro_f1 == base


def test_invalid_inputs():
    with pytest.raises(InputError):
        confusion(["A"], ["A", "B"], ["A", "B"])
    with pytest.raises(InputError):
        confusion(["Z"], ["A"], ["A", "B"])


def test_report_row_layout():
    report = evaluate_predictions(["A", "none"], ["A", "none"], ["A", "none"], shots=5, mode="imagine", seed=2)
    row = report.to_row()
    assert list(row)[:6] == ["shots", "mode", "seed", "macro_f1", "macro_p", "macro_r"]
    assert row["A_f1"] == 1.0
    assert report.to_dict()["counts"]["none"]["tp"] == 1


def test_aggregate_reports_mean_and_population_std():
    labels = ["A", "none"]
    reports = [
        evaluate_predictions(["A", "A"], ["A", "A"], labels, shots=5, mode="zero", seed=0),
        evaluate_predictions(["none", "none"], ["A", "A"], labels, shots=5, mode="zero", seed=1),
        evaluate_predictions(["A"], ["A"], labels, shots=10, mode="zero", seed=0),
    ]
    summary = aggregate_reports(reports)
    assert list(summary.columns) == SUMMARY_COLUMNS
    first = summary.iloc[0]
    assert (first["shots"], first["mode"], first["seeds"]) == (5, "zero", 2)
    assert first["macro_f1_mean"] == pytest.approx(0.5)
    assert first["macro_f1_std"] == pytest.approx(0.5)
    assert summary.iloc[1]["macro_f1_std"] == 0.0
