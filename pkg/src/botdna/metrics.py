"""Confusion-matrix accounting and binary classification metrics.

Bot is the positive class throughout. Zero-denominator conventions:
precision and recall fall back to 0, F1 to 0 when precision+recall is 0,
and MCC to 0 when any marginal factor vanishes. The text report repeats
these conventions so exported tables are self-describing.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyMatrix, LengthMismatch

LABEL_BOT = "bot"
LABEL_HUMAN = "human"

ZERO_DENOMINATOR_NOTE = (
    "conventions: precision/recall are 0 when their denominator is 0; "
    "f1 is 0 when precision+recall is 0; mcc is 0 when any factor is 0"
)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def swap_classes(self) -> "ConfusionMatrix":
        """Same predictions scored with human as the positive class."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)

    def invert_predictions(self) -> "ConfusionMatrix":
        """Counts after flipping every predicted label."""
        return ConfusionMatrix(tp=self.fn, fp=self.tn, fn=self.tp, tn=self.fp)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    mcc: float


def confusion(predictions: Sequence[str], truths: Sequence[str]) -> ConfusionMatrix:
    """Tally a 2x2 confusion matrix from parallel label vectors."""
    if len(predictions) != len(truths):
        raise LengthMismatch(
            f"{len(predictions)} predictions vs {len(truths)} truths"
        )
    if not predictions:
        raise LengthMismatch("empty label vectors")
    tp = fp = fn = tn = 0
    for pred, truth in zip(predictions, truths):
        if pred == LABEL_BOT:
            if truth == LABEL_BOT:
                tp += 1
            else:
                fp += 1
        else:
            if truth == LABEL_BOT:
                fn += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Accuracy, precision, recall, F1 and MCC for one confusion matrix."""
    if cm.total == 0:
        raise EmptyMatrix("cannot compute metrics for an empty matrix")
    tp, fp, fn, tn = cm.tp, cm.fp, cm.fn, cm.tn
    accuracy = (tp + tn) / cm.total
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(denom) if denom > 0 else 0.0
    return MetricsReport(accuracy=accuracy, precision=precision,
                         recall=recall, f1=f1, mcc=mcc)


def metrics_table(report: MetricsReport, row_label: str = "compact-cnn") -> str:
    """Aligned text table with the Accuracy / Recall / F1 / MCC columns."""
    headers = ("", "Accuracy", "Recall", "F1", "MCC")
    values = (row_label, f"{report.accuracy:.4f}", f"{report.recall:.4f}",
              f"{report.f1:.4f}", f"{report.mcc:.4f}")
    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    head = "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()
    body = "  ".join(v.ljust(w) for v, w in zip(values, widths)).rstrip()
    return f"{head}\n{body}\n# {ZERO_DENOMINATOR_NOTE}\n"


def metrics_csv(report: MetricsReport) -> str:
    """Single-row CSV with all five metrics."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["accuracy", "precision", "recall", "f1", "mcc"])
    writer.writerow([repr(report.accuracy), repr(report.precision),
                     repr(report.recall), repr(report.f1), repr(report.mcc)])
    return buf.getvalue()
