"""Classification metrics: confusion matrices, binary rates, ROC curves."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import LabelRangeError, SingleClassError
from .validation import check_same_length


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Count matrix with true labels on rows and predictions on columns."""
    t = np.asarray(y_true, dtype=int)
    p = np.asarray(y_pred, dtype=int)
    check_same_length(t, p, names=("y_true", "y_pred"))
    if n_classes < 1:
        raise ValueError("n_classes must be >= 1")
    cm = np.zeros((n_classes, n_classes), dtype=int)
    if len(t) == 0:
        return cm
    if t.min() < 0 or t.max() >= n_classes or p.min() < 0 or p.max() >= n_classes:
        raise LabelRangeError(f"labels must lie in [0, {n_classes})")
    np.add.at(cm, (t, p), 1)
    return cm


def _ratio(num: float, den: float, name: str) -> float:
    if den == 0:
        warnings.warn(f"{name} is 0/0; reporting 0", stacklevel=3)
        return 0.0
    return num / den


def binary_metrics(cm) -> dict[str, float]:
    """Accuracy/precision/recall/F1 from a 2x2 matrix, positive class 1.

    Undefined ratios (no predicted positives, no true positives) report 0
    and emit a warning.
    """
    M = np.asarray(cm, dtype=float)
    if M.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got {M.shape}")
    tn, fp = M[0]
    fn, tp = M[1]
    total = tn + fp + fn + tp
    precision = _ratio(tp, tp + fp, "precision")
    recall = _ratio(tp, tp + fn, "recall")
    f1 = _ratio(2 * precision * recall, precision + recall, "f1")
    return {
        "accuracy": _ratio(tp + tn, total, "accuracy"),
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }


def roc_curve_points(scores, labels) -> list[tuple[float, float]]:
    """(fpr, tpr) points swept over descending unique thresholds.

    Starts at (0, 0), ends at (1, 1); tied scores advance as one step.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    check_same_length(s, y, names=("scores", "labels"))
    pos = int(np.sum(y == 1))
    neg = int(np.sum(y == 0))
    if pos == 0 or neg == 0:
        raise SingleClassError("ROC needs both classes present")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    n = len(s_sorted)
    while i < n:
        j = i
        while j < n and s_sorted[j] == s_sorted[i]:
            j += 1
        tp += int(np.sum(y_sorted[i:j] == 1))
        fp += int(np.sum(y_sorted[i:j] == 0))
        points.append((fp / neg, tp / pos))
        i = j
    return points


def roc_auc(scores, labels) -> tuple[float, list[tuple[float, float]]]:
    """Area under the ROC curve plus the curve itself.

    The trapezoidal area over threshold sweeps equals the pairwise
    concordance probability with ties counted one half.
    """
    points = roc_curve_points(scores, labels)
    auc = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        auc += (x1 - x0) * (y1 + y0) / 2.0
    return auc, points


@dataclass(frozen=True)
class ClassRoc:
    """One-vs-rest ROC for one class; auc/curve are None if the class is absent."""

    class_id: int
    auc: float | None
    curve: list[tuple[float, float]] | None

    def to_dict(self) -> dict:
        return {
            "class": self.class_id,
            "auc": self.auc,
            "curve": None if self.curve is None else [[x, y] for x, y in self.curve],
        }


def per_class_roc(model, X, y, n_classes: int | None = None) -> list[ClassRoc]:
    """One-vs-rest ROC per class from a model with a decision_function."""
    scores = model.decision_function(X)
    yv = np.asarray(y, dtype=int)
    k = n_classes if n_classes is not None else scores.shape[1]
    out: list[ClassRoc] = []
    for c in range(k):
        mask = (yv == c).astype(int)
        if mask.sum() == 0 or mask.sum() == len(mask):
            out.append(ClassRoc(class_id=c, auc=None, curve=None))
            continue
        col = scores[:, c]
        if not np.isfinite(col).all():
            out.append(ClassRoc(class_id=c, auc=None, curve=None))
            continue
        auc, curve = roc_auc(col, mask)
        out.append(ClassRoc(class_id=c, auc=auc, curve=curve))
    return out
