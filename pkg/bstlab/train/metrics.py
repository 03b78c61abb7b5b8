"""Ranking and calibration metrics."""

from collections.abc import Sequence

import numpy as np

from bstlab.core.errors import MetricError
from bstlab.tensor.kernel import PROB_CLAMP


def _validate(scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray):
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if s.shape != y.shape:
        raise MetricError(f"{s.size} scores but {y.size} labels")
    if not np.isin(y, (0, 1)).all():
        raise MetricError("Labels must be 0 or 1")
    if not np.isfinite(s).all():
        raise MetricError("Scores must be finite")
    return s, y.astype(bool)


def auc(scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray) -> float:
    """
    Area under the ROC curve via the rank-sum statistic.

    Tied scores share their average rank, so a tied positive/negative pair
    counts one half.

    Raises:
        MetricError: If only one class is present.
    """
    s, positive = _validate(scores, labels)
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError(f"AUC is undefined with {n_pos} positives and {n_neg} negatives")

    _, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts)
    average_rank = upper - (counts - 1) / 2.0
    rank_sum = average_rank[inverse][positive].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def logloss(probs: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray) -> float:
    """Mean binary cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12]."""
    p, y = _validate(probs, labels)
    if p.size == 0:
        raise MetricError("Log-loss of an empty set is undefined")
    p = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(-np.mean(np.where(y, np.log(p), np.log(1.0 - p))))
