"""Confusion-matrix metrics and ROC AUC."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ConfusionMatrix", "EvalEntry", "confusion", "auc_trapezoid", "auc_rank"]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    def f1(self) -> float:
        denom = self.tp + 0.5 * (self.fp + self.fn)
        return self.tp / denom if denom else 0.0

    def mcc(self) -> float:
        tp, tn, fp, fn = self.tp, self.tn, self.fp, self.fn
        denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
        if denom == 0:
            return 0.0
        return (tp * tn - fp * fn) / math.sqrt(denom)


def confusion(y_true: np.ndarray, y_pred: np.ndarray) -> ConfusionMatrix:
    t = np.asarray(y_true, dtype=bool)
    p = np.asarray(y_pred, dtype=bool)
    return ConfusionMatrix(
        tp=int(np.sum(t & p)), tn=int(np.sum(~t & ~p)), fp=int(np.sum(~t & p)), fn=int(np.sum(t & ~p))
    )


def auc_trapezoid(y_true: np.ndarray, scores: np.ndarray) -> float:
    """Area under the ROC curve by trapezoidal integration.

    Tied scores form one step of the curve, so a tie counts half.  Returns
    ``nan`` when either class is absent.
    """
    t = np.asarray(y_true, dtype=bool)
    s = np.asarray(scores, dtype=float)
    pos, neg = int(t.sum()), int((~t).sum())
    if pos == 0 or neg == 0:
        return math.nan
    order = np.argsort(-s, kind="stable")
    s, t = s[order], t[order]
    # the last index of each run of equal scores is a point on the curve
    cut = np.r_[np.nonzero(np.diff(s))[0], len(s) - 1]
    tpr = np.r_[0.0, np.cumsum(t)[cut] / pos]
    fpr = np.r_[0.0, np.cumsum(~t)[cut] / neg]
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))


def auc_rank(y_true: np.ndarray, scores: np.ndarray) -> float:
    """AUC as the Mann-Whitney U statistic over ``P * N``, with mid-ranks for ties."""
    t = np.asarray(y_true, dtype=bool)
    s = np.asarray(scores, dtype=float)
    pos, neg = int(t.sum()), int((~t).sum())
    if pos == 0 or neg == 0:
        return math.nan
    uniq, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts)
    mid = upper - (counts - 1) / 2.0
    ranks = mid[inverse]
    u = ranks[t].sum() - pos * (pos + 1) / 2.0
    return float(u / (pos * neg))


@dataclass(frozen=True)
class EvalEntry:
    confusion: ConfusionMatrix
    accuracy: float
    f1: float
    mcc: float
    auc: float

    @classmethod
    def from_predictions(cls, y_true: np.ndarray, y_pred: np.ndarray, scores: np.ndarray) -> EvalEntry:
        cm = confusion(y_true, y_pred)
        return cls(cm, cm.accuracy(), cm.f1(), cm.mcc(), auc_trapezoid(y_true, scores))

    def to_json(self) -> dict[str, object]:
        c = self.confusion
        return {
            "tp": c.tp,
            "tn": c.tn,
            "fp": c.fp,
            "fn": c.fn,
            "accuracy": round(self.accuracy, 6),
            "f1": round(self.f1, 6),
            "mcc": round(self.mcc, 6),
            "auc": None if math.isnan(self.auc) else round(self.auc, 6),
        }
