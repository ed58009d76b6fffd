"""Evaluation statistics: confusion counts, precision/recall/F1, sky-fraction
series metrics (RMSE, R^2, Willmott's index of agreement d), and top-k
selector accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total


@dataclass(frozen=True)
class SeriesStats:
    rmse: float
    r2: float
    d: float


def confusion(pred: np.ndarray, truth: np.ndarray) -> Confusion:
    """Pixel confusion counts with sky as the positive class."""
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if pred.shape != truth.shape:
        raise ValueError(f"mask shapes differ: {pred.shape} vs {truth.shape}")
    tp = int(np.count_nonzero(pred & truth))
    fp = int(np.count_nonzero(pred & ~truth))
    fn = int(np.count_nonzero(~pred & truth))
    tn = pred.size - tp - fp - fn
    return Confusion(tp=tp, fp=fp, tn=tn, fn=fn)


def prf1(c: Confusion) -> tuple[float, float, float]:
    """Precision, recall, F1.

    Degenerate conventions: with no positive predictions, precision is 1
    when there was also nothing to find, else 0; with no positive truth,
    recall is 1; F1 is 0 when precision = recall = 0.
    """
    if c.tp + c.fp == 0:
        precision = 1.0 if c.tp + c.fn == 0 else 0.0
    else:
        precision = c.tp / (c.tp + c.fp)
    recall = 1.0 if c.tp + c.fn == 0 else c.tp / (c.tp + c.fn)
    if precision == 0.0 and recall == 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def series_stats(pred_fracs, obs_fracs) -> SeriesStats:
    """RMSE, squared Pearson correlation, and Willmott's d for two
    equal-length fraction series (predictions vs observations)."""
    p = np.asarray(pred_fracs, dtype=np.float64)
    o = np.asarray(obs_fracs, dtype=np.float64)
    if p.shape != o.shape or p.ndim != 1:
        raise ValueError("series must be equal-length 1-D vectors")
    if p.size == 0:
        raise ValueError("series must be non-empty")

    rmse = float(np.sqrt(np.mean((p - o) ** 2)))

    pv = p - p.mean()
    ov = o - o.mean()
    denom = np.sqrt(np.sum(pv**2) * np.sum(ov**2))
    r2 = float((np.sum(pv * ov) / denom) ** 2) if denom > 0 else 0.0

    num = np.sum((p - o) ** 2)
    den = np.sum((np.abs(p - o.mean()) + np.abs(o - o.mean())) ** 2)
    d = 1.0 if num == 0.0 and den == 0.0 else float(1.0 - num / den)
    return SeriesStats(rmse=rmse, r2=r2, d=d)


def topk_accuracy(ranked_predictions, labels, k: int) -> float:
    """Fraction of items whose label appears in the first k ranked entries."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = list(ranked_predictions)
    labels = list(labels)
    if len(ranked) != len(labels):
        raise ValueError("ranked predictions and labels differ in length")
    if not ranked:
        raise ValueError("empty inputs")
    hits = sum(1 for r, y in zip(ranked, labels) if y in list(r)[:k])
    return hits / len(labels)
