"""Binary classification metrics and comparison-table rendering.

All metrics derive from the confusion counts; a class with a zero
denominator gets precision/recall 0, and F1 is 0 when precision and
recall are both 0.
"""

import csv
import io
from dataclasses import dataclass

from .errors import SarcfuseError


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class MetricsReport:
    accuracy: float
    precision_macro: float
    recall_macro: float
    f1_macro: float
    precision_weighted: float
    recall_weighted: float
    f1_weighted: float
    per_class: dict

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "precision_macro": self.precision_macro,
            "recall_macro": self.recall_macro,
            "f1_macro": self.f1_macro,
            "precision_weighted": self.precision_weighted,
            "recall_weighted": self.recall_weighted,
            "f1_weighted": self.f1_weighted,
            "per_class": {
                str(label): {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for label, m in self.per_class.items()
            },
        }

    @classmethod
    def from_dict(cls, data):
        per_class = {
            int(label): ClassMetrics(**values)
            for label, values in data["per_class"].items()
        }
        return cls(
            accuracy=data["accuracy"],
            precision_macro=data["precision_macro"],
            recall_macro=data["recall_macro"],
            f1_macro=data["f1_macro"],
            precision_weighted=data["precision_weighted"],
            recall_weighted=data["recall_weighted"],
            f1_weighted=data["f1_weighted"],
            per_class=per_class,
        )


def _safe_div(num, den):
    return num / den if den else 0.0


def score(predictions, gold) -> MetricsReport:
    """Score binary predictions against gold labels.

    Pure function of its inputs; raises on length mismatch or empty input.
    """
    predictions = list(predictions)
    gold = list(gold)
    if len(predictions) != len(gold):
        raise SarcfuseError(
            f"got {len(predictions)} predictions for {len(gold)} gold labels"
        )
    if not gold:
        raise SarcfuseError("cannot score zero examples")
    for value in predictions + gold:
        if value not in (0, 1):
            raise SarcfuseError(f"labels must be 0 or 1, got {value!r}")

    correct = 0
    predicted_as = {0: 0, 1: 0}
    actual_as = {0: 0, 1: 0}
    true_pos = {0: 0, 1: 0}
    for pred, actual in zip(predictions, gold):
        actual_as[actual] += 1
        predicted_as[pred] += 1
        if pred == actual:
            correct += 1
            true_pos[actual] += 1

    per_class = {}
    for label in (0, 1):
        precision = _safe_div(true_pos[label], predicted_as[label])
        recall = _safe_div(true_pos[label], actual_as[label])
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class[label] = ClassMetrics(precision, recall, f1, actual_as[label])

    total = len(gold)
    macro = {
        field: (getattr(per_class[0], field) + getattr(per_class[1], field)) / 2
        for field in ("precision", "recall", "f1")
    }
    weighted = {
        field: (
            getattr(per_class[0], field) * per_class[0].support
            + getattr(per_class[1], field) * per_class[1].support
        )
        / total
        for field in ("precision", "recall", "f1")
    }
    return MetricsReport(
        accuracy=correct / total,
        precision_macro=macro["precision"],
        recall_macro=macro["recall"],
        f1_macro=macro["f1"],
        precision_weighted=weighted["precision"],
        recall_weighted=weighted["recall"],
        f1_weighted=weighted["f1"],
        per_class=per_class,
    )


COLUMNS = ("dataset", "model", "precision", "recall", "accuracy", "f1", "best")


@dataclass
class ResultsTable:
    """Comparison rows, one per (dataset, model), best-F1 flagged per dataset."""

    rows: list

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=COLUMNS)
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row)
        return buffer.getvalue()

    def to_text(self) -> str:
        header = f"{'Dataset':<16} {'Model':<16} {'Prec':>6} {'Rec':>6} {'Acc':>6} {'F1':>6}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            marker = " *" if row["best"] else ""
            lines.append(
                f"{row['dataset']:<16} {row['model']:<16} "
                f"{row['precision']:>6.3f} {row['recall']:>6.3f} "
                f"{row['accuracy']:>6.3f} {row['f1']:>6.3f}{marker}"
            )
        lines.append("(* = best F1 on that dataset)")
        return "\n".join(lines)


def render_results_table(reports: dict) -> ResultsTable:
    """Build the comparison table from {(dataset, model): MetricsReport}.

    Precision/recall columns are the macro averages; the per-dataset max-F1
    row carries best=True.
    """
    if not reports:
        raise SarcfuseError("no reports to render")
    best_f1 = {}
    for (dataset, _), report in reports.items():
        best_f1[dataset] = max(best_f1.get(dataset, 0.0), report.f1_macro)
    rows = []
    for (dataset, model), report in reports.items():
        rows.append(
            {
                "dataset": dataset,
                "model": model,
                "precision": report.precision_macro,
                "recall": report.recall_macro,
                "accuracy": report.accuracy,
                "f1": report.f1_macro,
                "best": report.f1_macro == best_f1[dataset],
            }
        )
    return ResultsTable(rows=rows)
