"""
Confusion matrices, support-weighted classification metrics and
multi-model comparison reports.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ReportConflictError


HEADLINE_METRICS = ("accuracy", "recall", "precision", "f1")
PARTITIONS = ("train", "test")


@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fp: int
    fn: int
    tp: int

    def __post_init__(self):
        if min(self.tn, self.fp, self.fn, self.tp) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def n(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def transposed(self) -> "ConfusionMatrix":
        """The matrix obtained by swapping predictions and labels."""
        return ConfusionMatrix(self.tn, self.fn, self.fp, self.tp)

    def grid(self) -> List[List[int]]:
        """Rows are true labels (0, 1), columns predicted labels (0, 1)."""
        return [[self.tn, self.fp], [self.fn, self.tp]]

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> "ConfusionMatrix":
        return cls(int(data["tn"]), int(data["fp"]), int(data["fn"]), int(data["tp"]))


def confusion(preds: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    """
    Count predictions by (label, prediction) cell.

    Args:
        preds: Predicted labels in {0, 1}
        labels: True labels in {0, 1}

    Returns:
        ConfusionMatrix
    """
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape or preds.ndim != 1:
        raise ValueError(f"preds and labels must be equal-length vectors, got {preds.shape} and {labels.shape}")
    for name, values in (("preds", preds), ("labels", labels)):
        if not np.all((values == 0) | (values == 1)):
            raise ValueError(f"{name} must only contain 0 or 1")
    preds = preds.astype(bool)
    labels = labels.astype(bool)
    return ConfusionMatrix(
        tn=int(np.sum(~labels & ~preds)),
        fp=int(np.sum(~labels & preds)),
        fn=int(np.sum(labels & ~preds)),
        tp=int(np.sum(labels & preds)),
    )


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    """
    Accuracy, per-class metrics and support-weighted averages.

    Any 0/0 evaluates to 0 and is named in `zero_division_flags`.
    """
    accuracy: float
    per_class: Dict[int, ClassMetrics]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    confusion: ConfusionMatrix
    zero_division_flags: Tuple[str, ...] = ()

    def headline(self) -> Dict[str, float]:
        """The four numbers shown in the evaluation tables."""
        return {
            "accuracy": self.accuracy,
            "recall": self.weighted_recall,
            "precision": self.weighted_precision,
            "f1": self.weighted_f1,
        }

    def to_dict(self) -> Dict:
        return {
            "accuracy": self.accuracy,
            "weighted_precision": self.weighted_precision,
            "weighted_recall": self.weighted_recall,
            "weighted_f1": self.weighted_f1,
            "per_class": {str(c): asdict(m) for c, m in sorted(self.per_class.items())},
            "confusion": self.confusion.to_dict(),
            "zero_division_flags": list(self.zero_division_flags),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "MetricsReport":
        return cls(
            accuracy=float(data["accuracy"]),
            per_class={int(c): ClassMetrics(**m) for c, m in data["per_class"].items()},
            weighted_precision=float(data["weighted_precision"]),
            weighted_recall=float(data["weighted_recall"]),
            weighted_f1=float(data["weighted_f1"]),
            confusion=ConfusionMatrix.from_dict(data["confusion"]),
            zero_division_flags=tuple(data.get("zero_division_flags", ())),
        )


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """
    Compute the metrics report of a confusion matrix.

    Args:
        cm: ConfusionMatrix with at least one sample

    Returns:
        MetricsReport
    """
    n = cm.n
    if n == 0:
        raise ValueError("Cannot compute metrics of an empty confusion matrix")
    flags: List[str] = []

    def ratio(num: float, den: float, flag: str) -> float:
        if den == 0:
            flags.append(flag)
            return 0.0
        return num / den

    def class_metrics(c: int, hits: int, predicted: int, support: int) -> ClassMetrics:
        precision = ratio(hits, predicted, f"precision_{c}")
        recall = ratio(hits, support, f"recall_{c}")
        f1 = ratio(2.0 * precision * recall, precision + recall, f"f1_{c}")
        return ClassMetrics(precision, recall, f1, support)

    per_class = {
        0: class_metrics(0, cm.tn, cm.tn + cm.fn, cm.tn + cm.fp),
        1: class_metrics(1, cm.tp, cm.tp + cm.fp, cm.fn + cm.tp),
    }

    def weighted(attr: str) -> float:
        return sum(m.support * getattr(m, attr) for m in per_class.values()) / n

    return MetricsReport(
        accuracy=(cm.tp + cm.tn) / n,
        per_class=per_class,
        weighted_precision=weighted("precision"),
        weighted_recall=weighted("recall"),
        weighted_f1=weighted("f1"),
        confusion=cm,
        zero_division_flags=tuple(flags),
    )


def evaluate_predictions(preds: Sequence[int], labels: Sequence[int]) -> MetricsReport:
    return metrics(confusion(preds, labels))


@dataclass(frozen=True)
class ModelEvaluation:
    """Train and test reports of one named model."""
    name: str
    train: MetricsReport
    test: MetricsReport
    kind: Optional[str] = None

    @property
    def generalization_gap(self) -> float:
        return self.train.accuracy - self.test.accuracy

    def to_dict(self) -> Dict:
        return {
            "model": self.name,
            "kind": self.kind,
            "train": self.train.to_dict(),
            "test": self.test.to_dict(),
            "generalization_gap": self.generalization_gap,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ModelEvaluation":
        return cls(
            name=data["model"],
            train=MetricsReport.from_dict(data["train"]),
            test=MetricsReport.from_dict(data["test"]),
            kind=data.get("kind"),
        )


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    train: Dict[str, float]
    test: Dict[str, float]
    generalization_gap: float
    margin: Optional[float]


@dataclass
class ComparisonReport:
    """Side-by-side headline metrics with gaps and margins over the best other model."""
    rows: List[ComparisonRow] = field(default_factory=list)

    @property
    def names(self) -> List[str]:
        return [row.name for row in self.rows]

    def row(self, name: str) -> ComparisonRow:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    def chart_rows(self) -> List[Tuple[str, str, str, float]]:
        """(model, partition, metric, value) for every model, partition and headline metric."""
        records = []
        for row in self.rows:
            for partition in PARTITIONS:
                values = getattr(row, partition)
                for metric in HEADLINE_METRICS:
                    records.append((row.name, partition, metric, values[metric]))
        return records

    def to_dict(self) -> Dict:
        return {"models": [asdict(row) for row in self.rows]}


def compare(evaluations: Sequence[ModelEvaluation]) -> ComparisonReport:
    """
    Tabulate headline metrics per model and partition.

    Args:
        evaluations: One ModelEvaluation per model, names unique

    Returns:
        ComparisonReport in input order
    """
    if not evaluations:
        raise ValueError("compare needs at least one model")
    names = [e.name for e in evaluations]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise ReportConflictError(f"Duplicate model names in comparison: {duplicates}")

    report = ComparisonReport()
    for evaluation in evaluations:
        others = [e.test.accuracy for e in evaluations if e.name != evaluation.name]
        margin = evaluation.test.accuracy - max(others) if others else None
        report.rows.append(ComparisonRow(
            name=evaluation.name,
            train=evaluation.train.headline(),
            test=evaluation.test.headline(),
            generalization_gap=evaluation.generalization_gap,
            margin=margin,
        ))
    return report
