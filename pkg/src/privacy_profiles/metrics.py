"""Confusion-count metrics, one-vs-rest ROC curves, and top-N PR curves."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError, UndefinedMetricError


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn + other.fn,
            self.tn + other.tn,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass
class RocCurve:
    points: list[tuple[float, float]]  # (fpr, tpr), sorted, (0,0) .. (1,1)
    auc: float
    class_id: int


@dataclass
class PrCurve:
    points: list[tuple[float, float]]  # (recall, precision); index i is cutoff N=i+1
    alpha: float
    k: int
    n_skipped: int = 0  # degenerate (fold, N) cells excluded from the average
    reference_note: str = field(default="", repr=False)


def confusion_from_decisions(predicted: np.ndarray, actual: np.ndarray) -> ConfusionCounts:
    """Counts from parallel binary decision/truth arrays."""
    p = np.asarray(predicted).astype(bool)
    a = np.asarray(actual).astype(bool)
    if p.shape != a.shape:
        raise ParameterError("predicted and actual differ in shape")
    return ConfusionCounts(
        tp=int((p & a).sum()),
        fp=int((p & ~a).sum()),
        fn=int((~p & a).sum()),
        tn=int((~p & ~a).sum()),
    )


def precision_recall(counts: ConfusionCounts) -> tuple[float, float, bool]:
    """(precision, recall, degenerate).  A zero denominator yields 0 for that
    component and sets the degenerate flag."""
    degenerate = False
    if counts.tp + counts.fp > 0:
        precision = counts.tp / (counts.tp + counts.fp)
    else:
        precision = 0.0
        degenerate = True
    if counts.tp + counts.fn > 0:
        recall = counts.tp / (counts.tp + counts.fn)
    else:
        recall = 0.0
        degenerate = True
    return precision, recall, degenerate


def fpr(counts: ConfusionCounts) -> float:
    """False positive rate FP/(TN+FP); 0 when the denominator is 0."""
    denom = counts.tn + counts.fp
    if denom == 0:
        return 0.0
    return counts.fp / denom


def roc_curve(scores: np.ndarray, labels: np.ndarray, class_id: int) -> RocCurve:
    """One-vs-rest ROC for one class.

    ``scores`` is either the (n, kappa) score matrix (the class_id column is
    used) or the positive-class score vector directly.  Sweeps every distinct
    score as a threshold (predict positive when score >= threshold), from
    strictest to loosest, and prepends (0, 0).  AUC by the trapezoidal rule.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim == 2:
        scores = scores[:, class_id]
    if scores.shape != labels.shape:
        raise ParameterError("scores and labels differ in length")
    positive = labels == class_id
    n_pos = int(positive.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            f"class {class_id}: need both positive and negative examples"
        )

    points = [(0.0, 0.0)]
    for threshold in np.unique(scores)[::-1]:
        predicted = scores >= threshold
        tp = int((predicted & positive).sum())
        fp_count = int((predicted & ~positive).sum())
        points.append((fp_count / n_neg, tp / n_pos))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))

    auc = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return RocCurve(points=points, auc=auc, class_id=class_id)


def write_roc_csv(curve: RocCurve, out_dir: str | Path) -> Path:
    path = Path(out_dir) / f"roc_class{curve.class_id}.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "tpr"])
        for x, y in curve.points:
            writer.writerow([repr(x), repr(y)])
    return path


def write_pr_csv(curve: PrCurve, out_dir: str | Path) -> Path:
    name = f"pr_a{curve.alpha:g}_k{curve.k}.csv"
    path = Path(out_dir) / name
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "precision", "recall"])
        for i, (recall, precision) in enumerate(curve.points):
            writer.writerow([i + 1, repr(precision), repr(recall)])
    return path
