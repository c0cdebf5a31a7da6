"""Classification metrics: balanced accuracy, sensitivity, specificity, AUROC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.metrics import roc_auc_score


def sensitivity(y_true, y_pred) -> float:
    """True-positive rate: TP / (TP + FN)."""
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    pos = y_true.sum()
    if pos == 0:
        return float("nan")
    return float((y_true & y_pred).sum() / pos)


def specificity(y_true, y_pred) -> float:
    """True-negative rate: TN / (TN + FP)."""
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    neg = (~y_true).sum()
    if neg == 0:
        return float("nan")
    return float((~y_true & ~y_pred).sum() / neg)


def balanced_accuracy(y_true, y_pred) -> float:
    """Mean of sensitivity and specificity."""
    return 0.5 * (sensitivity(y_true, y_pred) + specificity(y_true, y_pred))


def auroc(y_true, scores) -> float:
    return float(roc_auc_score(np.asarray(y_true), np.asarray(scores)))


@dataclass(frozen=True)
class MeanStd:
    mean: float
    std: float

    @classmethod
    def of(cls, values) -> "MeanStd":
        arr = np.asarray(values, dtype=np.float64)
        return cls(float(arr.mean()), float(arr.std()))


@dataclass(frozen=True)
class FoldResult:
    """Validation metrics of one fold's selected checkpoint."""

    fold: int
    balanced_accuracy: float
    sensitivity: float
    specificity: float
    auroc: float
    best_epoch: int

    def to_dict(self) -> dict:
        return {
            "fold": self.fold,
            "balanced_accuracy": self.balanced_accuracy,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "auroc": self.auroc,
            "best_epoch": self.best_epoch,
        }


@dataclass(frozen=True)
class AggregateResult:
    """Mean +/- std over folds."""

    folds: tuple[FoldResult, ...]
    balanced_accuracy: MeanStd
    sensitivity: MeanStd
    specificity: MeanStd
    auroc: MeanStd

    @classmethod
    def of(cls, folds) -> "AggregateResult":
        folds = tuple(folds)
        if not folds:
            raise ValueError("no fold results to aggregate")
        return cls(
            folds=folds,
            balanced_accuracy=MeanStd.of([f.balanced_accuracy for f in folds]),
            sensitivity=MeanStd.of([f.sensitivity for f in folds]),
            specificity=MeanStd.of([f.specificity for f in folds]),
            auroc=MeanStd.of([f.auroc for f in folds]),
        )
