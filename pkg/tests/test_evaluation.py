"""
Tests for confusion matrices, metrics and comparison reports.
"""

import numpy as np
import pytest

from core.evaluation import (
    ConfusionMatrix,
    ModelEvaluation,
    MetricsReport,
    compare,
    confusion,
    evaluate_predictions,
    metrics,
)
from core.exceptions import ReportConflictError


def report_with_accuracy(correct: int, n: int = 1000) -> MetricsReport:
    """Balanced classes with the errors split as evenly as possible."""
    wrong = n - correct
    fp, fn = wrong // 2, wrong - wrong // 2
    half = n // 2
    return metrics(ConfusionMatrix(tn=half - fp, fp=fp, fn=fn, tp=half - fn))


def evaluation(name, train_correct, test_correct) -> ModelEvaluation:
    return ModelEvaluation(name, report_with_accuracy(train_correct), report_with_accuracy(test_correct))


class TestConfusion:

    def test_perfect(self):
        assert confusion([1, 0, 1], [1, 0, 1]) == ConfusionMatrix(tn=1, fp=0, fn=0, tp=2)

    def test_hand_count(self):
        assert confusion([1, 0, 1, 1], [1, 0, 0, 1]) == ConfusionMatrix(tn=1, fp=1, fn=0, tp=2)

    def test_swap_transposes(self, rng):
        preds, labels = rng.integers(0, 2, 50), rng.integers(0, 2, 50)
        assert confusion(labels, preds) == confusion(preds, labels).transposed()

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion([1, 0], [1, 0, 1])

    def test_out_of_domain(self):
        with pytest.raises(ValueError, match="preds"):
            confusion([2, 0], [1, 0])
        with pytest.raises(ValueError, match="labels"):
            confusion([1, 0], [1, -1])

    def test_grid_layout(self):
        assert ConfusionMatrix(tn=4, fp=3, fn=2, tp=1).grid() == [[4, 3], [2, 1]]


class TestMetrics:

    def test_perfect(self):
        report = metrics(ConfusionMatrix(tn=3, fp=0, fn=0, tp=5))
        assert report.accuracy == 1.0
        assert list(report.headline().values()) == [1.0, 1.0, 1.0, 1.0]
        assert report.zero_division_flags == ()

    def test_hand_case(self):
        report = metrics(ConfusionMatrix(tn=1, fp=1, fn=0, tp=2))
        assert report.accuracy == 0.75
        assert report.per_class[1].precision == pytest.approx(2 / 3)
        assert report.per_class[1].recall == 1.0
        assert report.per_class[1].f1 == pytest.approx(0.8)
        assert report.per_class[0].precision == 1.0
        assert report.per_class[0].recall == 0.5
        assert report.per_class[0].f1 == pytest.approx(2 / 3)
        assert report.weighted_recall == pytest.approx(0.75, abs=1e-12)
        assert report.per_class[0].support == 2 and report.per_class[1].support == 2

    def test_headline_order(self):
        report = metrics(ConfusionMatrix(tn=1, fp=1, fn=0, tp=2))
        assert list(report.headline()) == ["accuracy", "recall", "precision", "f1"]

    def test_zero_division_flags(self):
        report = metrics(ConfusionMatrix(tn=0, fp=0, fn=3, tp=0))
        assert report.accuracy == 0.0
        assert report.per_class[1].f1 == 0.0
        assert set(report.zero_division_flags) == {"recall_0", "f1_0", "precision_1", "f1_1"}

    def test_empty(self):
        with pytest.raises(ValueError):
            metrics(ConfusionMatrix(0, 0, 0, 0))

    def test_negative_count(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(tn=-1, fp=0, fn=0, tp=1)

    def test_weighted_recall_is_accuracy(self, rng):
        for _ in range(100):
            cm = ConfusionMatrix(*(int(v) for v in rng.integers(0, 50, 4)))
            if cm.n == 0:
                continue
            report = metrics(cm)
            assert abs(report.weighted_recall - report.accuracy) <= 1e-12

    def test_values_in_unit_interval(self, rng):
        for _ in range(100):
            cm = ConfusionMatrix(*(int(v) for v in rng.integers(0, 20, 4)))
            if cm.n == 0:
                continue
            report = metrics(cm)
            values = [report.accuracy, report.weighted_precision, report.weighted_recall, report.weighted_f1]
            values += [getattr(m, a) for m in report.per_class.values() for a in ("precision", "recall", "f1")]
            assert all(0.0 <= v <= 1.0 for v in values)

    def test_joint_permutation_invariance(self, rng):
        preds, labels = rng.integers(0, 2, 40), rng.integers(0, 2, 40)
        perm = rng.permutation(40)
        assert evaluate_predictions(preds, labels) == evaluate_predictions(preds[perm], labels[perm])

    def test_relabeling_swaps_classes(self, rng):
        preds, labels = rng.integers(0, 2, 40), rng.integers(0, 2, 40)
        a = evaluate_predictions(preds, labels)
        b = evaluate_predictions(1 - preds, 1 - labels)
        assert a.accuracy == b.accuracy
        assert a.per_class[0] == b.per_class[1]
        assert a.per_class[1] == b.per_class[0]

    def test_dict_round_trip(self):
        report = metrics(ConfusionMatrix(tn=0, fp=0, fn=3, tp=1))
        assert MetricsReport.from_dict(report.to_dict()) == report


class TestCompare:

    def test_single_model(self):
        report = compare([evaluation("only", 900, 900)])
        row = report.row("only")
        assert row.generalization_gap == 0.0
        assert row.margin is None

    def test_reported_comparison(self):
        report = compare([
            evaluation("decision_tree", 800, 752),
            evaluation("random_forest", 820, 781),
            evaluation("xgboost_style_gbt", 830, 784),
            evaluation("lstm_adaboost", 937, 920),
        ])
        improved = report.row("lstm_adaboost")
        assert improved.test["accuracy"] == pytest.approx(0.92)
        assert improved.margin == pytest.approx(0.136, abs=1e-9)
        assert improved.generalization_gap == pytest.approx(0.017, abs=1e-9)
        assert report.row("decision_tree").margin == pytest.approx(0.752 - 0.92, abs=1e-9)
        assert report.names == ["decision_tree", "random_forest", "xgboost_style_gbt", "lstm_adaboost"]

    def test_chart_rows(self):
        report = compare([evaluation("a", 900, 800), evaluation("b", 950, 850)])
        rows = report.chart_rows()
        assert len(rows) == 2 * 2 * 4
        assert rows[0] == ("a", "train", "accuracy", 0.9)
        assert {(model, partition) for model, partition, _, _ in rows} == {
            ("a", "train"), ("a", "test"), ("b", "train"), ("b", "test")
        }

    def test_duplicate_names(self):
        with pytest.raises(ReportConflictError, match="dup"):
            compare([evaluation("dup", 900, 800), evaluation("dup", 950, 850)])

    def test_empty(self):
        with pytest.raises(ValueError):
            compare([])

    def test_evaluation_dict_round_trip(self):
        original = evaluation("m", 900, 850)
        data = original.to_dict()
        assert data["generalization_gap"] == pytest.approx(0.05)
        assert ModelEvaluation.from_dict(data) == original


def test_confusion_counts_sum(rng):
    preds, labels = rng.integers(0, 2, 77), rng.integers(0, 2, 77)
    cm = confusion(preds, labels)
    assert cm.n == 77
    assert cm.tp + cm.fn == int(np.sum(labels))
