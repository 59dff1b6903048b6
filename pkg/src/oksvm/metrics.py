"""Binary classification metrics and paired-comparison measures.

+1 is the positive class everywhere. Precision, recall, and F1 fall back
to 0 when their denominator is empty; AUC is the Mann-Whitney rank
statistic with half credit for ties, identical to trapezoidal ROC
integration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class MetricsRecord:
    """Scores of one train/test evaluation. auc is None when no
    continuous scores were available."""

    acc: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int
    auc: float | None = None

    def __post_init__(self) -> None:
        counts = (self.tp, self.fp, self.tn, self.fn)
        if any(v < 0 for v in counts):
            raise ValueError(f"negative confusion counts: {counts}")
        total = sum(counts)
        if total == 0:
            raise ValueError("empty evaluation")
        rates = [self.acc, self.precision, self.recall, self.f1]
        if self.auc is not None:
            rates.append(self.auc)
        if any(not 0.0 <= r <= 1.0 for r in rates):
            raise ValueError(f"rates outside [0, 1]: {rates}")
        if abs(self.acc - (self.tp + self.tn) / total) > 1e-12:
            raise ValueError("acc does not match the confusion counts")

    def with_auc(self, auc: float) -> "MetricsRecord":
        return MetricsRecord(
            self.acc, self.precision, self.recall, self.f1,
            self.tp, self.fp, self.tn, self.fn, auc,
        )


@dataclass(frozen=True)
class ComparisonRecord:
    """One paired run: the scaled F1 gap and its sign (win/draw/loss)."""

    f1_diff: float
    wl: int

    def __post_init__(self) -> None:
        expected = 1 if self.f1_diff > 0 else (-1 if self.f1_diff < 0 else 0)
        if self.wl != expected:
            raise ValueError(f"wl={self.wl} inconsistent with f1_diff={self.f1_diff}")

    @classmethod
    def from_pair(cls, f1_first: float, f1_second: float) -> "ComparisonRecord":
        diff = f1_diff(f1_first, f1_second)
        return cls(diff, 1 if diff > 0 else (-1 if diff < 0 else 0))


def confusion(true_labels: np.ndarray, predicted_labels: np.ndarray) -> tuple[int, int, int, int]:
    """(tp, fp, tn, fn) with +1 as the positive class."""
    t = np.asarray(true_labels)
    p = np.asarray(predicted_labels)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError(f"label vectors must match, got shapes {t.shape} and {p.shape}")
    for arr, name in ((t, "true"), (p, "predicted")):
        if not np.all(np.isin(arr, (-1, 1))):
            raise ValueError(f"{name} labels must be -1 or +1")
    tp = int(np.count_nonzero((t == 1) & (p == 1)))
    fp = int(np.count_nonzero((t == -1) & (p == 1)))
    tn = int(np.count_nonzero((t == -1) & (p == -1)))
    fn = int(np.count_nonzero((t == 1) & (p == -1)))
    return tp, fp, tn, fn


def basic_metrics(tp: int, fp: int, tn: int, fn: int) -> MetricsRecord:
    """Accuracy, precision, recall, F1 from confusion counts (no AUC)."""
    total = tp + fp + tn + fn
    if total <= 0:
        raise ValueError("empty evaluation")
    acc = (tp + tn) / total
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    denom = precision + recall
    f1 = 2.0 * precision * recall / denom if denom > 0 else 0.0
    return MetricsRecord(acc, precision, recall, f1, tp, fp, tn, fn)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank range."""
    order = np.argsort(values, kind="stable")
    n = values.size
    ranks = np.empty(n)
    boundaries = np.flatnonzero(np.diff(values[order]) != 0)
    starts = np.concatenate([[0], boundaries + 1])
    ends = np.concatenate([boundaries + 1, [n]])
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = 0.5 * (s + 1 + e)
    return ranks


def auc(true_labels: np.ndarray, scores: np.ndarray) -> float:
    """Area under the ROC curve via the Mann-Whitney U statistic."""
    t = np.asarray(true_labels)
    s = np.asarray(scores, dtype=np.float64)
    if t.shape != s.shape or t.ndim != 1:
        raise ValueError(f"shapes must match, got {t.shape} and {s.shape}")
    pos = t == 1
    n_pos = int(np.count_nonzero(pos))
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("single-class truth vector: AUC undefined")
    ranks = _average_ranks(s)
    u = float(ranks[pos].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def f1_diff(f1_first: float, f1_second: float) -> float:
    """100 * (first - second); positive means the first method won."""
    return 100.0 * (f1_first - f1_second)


def wins_losses_ratio(f1_diffs: Sequence[float]) -> float:
    """100 * mean of per-run signs; draws contribute zero."""
    if len(f1_diffs) == 0:
        raise ValueError("need at least one paired run")
    signs = [1 if d > 0 else (-1 if d < 0 else 0) for d in f1_diffs]
    return 100.0 * sum(signs) / len(signs)
