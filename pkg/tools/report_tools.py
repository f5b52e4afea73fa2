"""
Text and delimited renderings of statistics, evaluation and comparison reports.
"""

import io
from typing import Iterable, List, Optional, Sequence

import pandas as pd
from rich import box
from rich.console import Console
from rich.table import Table

from core.dataset import StatsSummary
from core.evaluation import HEADLINE_METRICS, ComparisonReport, ConfusionMatrix, ModelEvaluation


TABLE_WIDTH = 120
CHART_COLUMNS = ("model", "partition", "metric", "value")


class ReportTools:
    """Render reports as aligned plain-text tables."""

    @staticmethod
    def format_number(value: Optional[float], digits: int = 3) -> str:
        """
        Round to `digits` decimals and drop trailing zeros (35.940 -> 35.94, 60.000 -> 60).

        Args:
            value: Number or None
            digits: Decimal places

        Returns:
            Formatted string; "-" for None
        """
        if value is None:
            return "-"
        text = f"{value:.{digits}f}"
        if "." in text:
            text = text.rstrip("0").rstrip(".")
        return "0" if text == "-0" else text

    @staticmethod
    def render(*tables: Table) -> str:
        """Render rich tables to plain text with a fixed width and no color codes."""
        buffer = io.StringIO()
        console = Console(file=buffer, width=TABLE_WIDTH, color_system=None,
                          force_terminal=False, highlight=False)
        for table in tables:
            console.print(table)
        return buffer.getvalue()

    @staticmethod
    def _table(title: str, headers: Sequence[str]) -> Table:
        table = Table(title=title, box=box.ASCII2, title_justify="left")
        for i, header in enumerate(headers):
            table.add_column(header, justify="left" if i == 0 else "right")
        return table

    @staticmethod
    def stats_table(summary: StatsSummary) -> str:
        """
        Per-column statistics: Variable Name, Maximum, Minimum, Mean, Median, Variance.

        Args:
            summary: Output of dataset.summarize

        Returns:
            Table text
        """
        table = ReportTools._table(
            f"Statistical analysis of data ({summary.n_rows} rows)",
            ["Variable Name", "Maximum", "Minimum", "Mean", "Median", "Variance"],
        )
        fmt = ReportTools.format_number
        for name, stats in summary.columns.items():
            table.add_row(name, fmt(stats.maximum), fmt(stats.minimum), fmt(stats.mean),
                          fmt(stats.median), fmt(stats.variance))
        return ReportTools.render(table)

    @staticmethod
    def confusion_table(title: str, cm: ConfusionMatrix) -> Table:
        table = ReportTools._table(title, ["", "Predicted 0", "Predicted 1"])
        table.add_row("Actual 0", str(cm.tn), str(cm.fp))
        table.add_row("Actual 1", str(cm.fn), str(cm.tp))
        return table

    @staticmethod
    def evaluation_table(evaluation: ModelEvaluation) -> str:
        """
        Rows Training Set / Test set with Accuracy, Recall, Precision, F1, then both confusion matrices.

        Args:
            evaluation: Train/test reports of one model

        Returns:
            Table text
        """
        table = ReportTools._table(
            f"Evaluation metrics for training and test sets: {evaluation.name}",
            ["", "Accuracy", "Recall", "Precision", "F1"],
        )
        for label, report in (("Training Set", evaluation.train), ("Test set", evaluation.test)):
            headline = report.headline()
            table.add_row(label, *(ReportTools.format_number(headline[m]) for m in HEADLINE_METRICS))
        return ReportTools.render(
            table,
            ReportTools.confusion_table("Confusion matrix (training set)", evaluation.train.confusion),
            ReportTools.confusion_table("Confusion matrix (test set)", evaluation.test.confusion),
        )

    @staticmethod
    def comparison_table(report: ComparisonReport) -> str:
        """
        One line per model and partition; gap and margin sit on the test line.

        Args:
            report: ComparisonReport

        Returns:
            Rendered table
        """
        headers = ["Model", "Set", *(m.capitalize() for m in HEADLINE_METRICS), "Gap", "Margin"]
        table = ReportTools._table("Comparison of model evaluation indicators", headers)
        fmt = ReportTools.format_number
        for row in report.rows:
            table.add_row(row.name, "train", *(fmt(row.train[m]) for m in HEADLINE_METRICS), "", "")
            table.add_row("", "test", *(fmt(row.test[m]) for m in HEADLINE_METRICS),
                          fmt(row.generalization_gap), fmt(row.margin))
        return ReportTools.render(table)

    @staticmethod
    def records_csv(records: Iterable[Sequence], columns: Sequence[str]) -> str:
        frame = pd.DataFrame(list(records), columns=list(columns))
        return frame.to_csv(index=False, lineterminator="\n")

    @staticmethod
    def chart_data_csv(report: ComparisonReport) -> str:
        """Flat (model, partition, metric, value) rows sufficient to redraw the comparison chart."""
        return ReportTools.records_csv(report.chart_rows(), CHART_COLUMNS)

    @staticmethod
    def stats_csv(summary: StatsSummary) -> str:
        records: List[dict] = summary.to_records()
        return pd.DataFrame(records).to_csv(index=False, lineterminator="\n")
