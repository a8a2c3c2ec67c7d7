"""Classification metrics: accuracy, macro precision/recall/F1, rank-based
AUC, and ROC curve points."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata


def auc_rank(y_true: np.ndarray, scores: np.ndarray) -> Optional[float]:
    """AUC via the Mann-Whitney rank statistic on binary membership.

    Equals the fraction of (positive, negative) pairs ordered correctly,
    ties counting half. None when only one class is present.
    """
    y_true = np.asarray(y_true, dtype=bool)
    n_pos = int(y_true.sum())
    n_neg = len(y_true) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)
    return float(
        (ranks[y_true].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)
    )


def roc_points(y_true: np.ndarray, scores: np.ndarray) -> list[tuple[float, float]]:
    """(FPR, TPR) at every distinct threshold, from (0,0) to (1,1)."""
    y_true = np.asarray(y_true, dtype=bool)
    n_pos = int(y_true.sum())
    n_neg = len(y_true) - n_pos
    if n_pos == 0 or n_neg == 0:
        return []
    order = np.argsort(-np.asarray(scores), kind="stable")
    sorted_scores = np.asarray(scores)[order]
    sorted_true = y_true[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    for i in range(len(order)):
        if sorted_true[i]:
            tp += 1
        else:
            fp += 1
        last = i == len(order) - 1
        if last or sorted_scores[i + 1] != sorted_scores[i]:
            points.append((fp / n_neg, tp / n_pos))
    return points


@dataclass
class FoldMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: Optional[float]
    roc: dict = field(default_factory=dict)  # class value -> [(fpr, tpr)]


def compute_metrics(
    y_true: Sequence,
    y_pred: Sequence,
    scores: Optional[np.ndarray] = None,
    classes: Optional[Sequence] = None,
) -> FoldMetrics:
    """Macro-averaged metrics over all classes present in the data.

    ``scores`` is either a 1-D array of positive-class scores (binary, the
    second class in sorted order is positive) or an (n, n_classes) matrix
    aligned with ``classes``; AUC is then macro one-vs-rest. With a
    single-class ``y_true`` the AUC is reported absent.
    """
    if len(y_true) != len(y_pred) or len(y_true) == 0:
        raise ValueError("y_true and y_pred must be equal nonzero length")
    y_true = list(y_true)
    y_pred = list(y_pred)
    if classes is None:
        classes = sorted(set(y_true) | set(y_pred), key=str)
    classes = list(classes)

    accuracy = sum(t == p for t, p in zip(y_true, y_pred)) / len(y_true)
    precisions, recalls, f1s = [], [], []
    for cls in classes:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == cls and p == cls)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != cls and p == cls)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == cls and p != cls)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)

    auc = None
    roc: dict = {}
    if scores is not None:
        scores = np.asarray(scores)
        if scores.ndim == 1:
            positive = classes[-1]
            membership = np.array([t == positive for t in y_true])
            auc = auc_rank(membership, scores)
            roc[getattr(positive, "value", positive)] = roc_points(membership, scores)
        else:
            aucs = []
            for j, cls in enumerate(classes):
                membership = np.array([t == cls for t in y_true])
                cls_auc = auc_rank(membership, scores[:, j])
                if cls_auc is not None:
                    aucs.append(cls_auc)
                    roc[getattr(cls, "value", cls)] = roc_points(
                        membership, scores[:, j]
                    )
            auc = float(np.mean(aucs)) if aucs else None

    return FoldMetrics(
        accuracy=accuracy,
        precision=float(np.mean(precisions)),
        recall=float(np.mean(recalls)),
        f1=float(np.mean(f1s)),
        auc=auc,
        roc=roc,
    )


@dataclass
class MetricsReport:
    """Mean ± std across folds, Table-style."""

    name: str
    folds: list[FoldMetrics]

    def _stat(self, attr: str) -> tuple[float, float]:
        values = [getattr(f, attr) for f in self.folds if getattr(f, attr) is not None]
        if not values:
            return float("nan"), float("nan")
        return float(np.mean(values)), float(np.std(values))

    @property
    def accuracy(self):
        return self._stat("accuracy")

    @property
    def precision(self):
        return self._stat("precision")

    @property
    def recall(self):
        return self._stat("recall")

    @property
    def f1(self):
        return self._stat("f1")

    @property
    def auc(self):
        return self._stat("auc")

    def row(self) -> str:
        cells = [self.name]
        for attr in ("accuracy", "precision", "recall", "f1", "auc"):
            mean, std = self._stat(attr)
            cells.append(f"{mean:.3f} (+/- {std:.2f})")
        return "\t".join(cells)


REPORT_HEADER = "model\taccuracy\tprecision\trecall\tf1\tauc"


def report_table(reports: Sequence[MetricsReport]) -> str:
    return "\n".join([REPORT_HEADER] + [r.row() for r in reports]) + "\n"
