"""Clustering quality metrics and per-run result rows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Labeling
from .tracking import hungarian_match


@dataclass
class RunRecord:
    """One result row: metrics for a (trial, time step, method) triple.

    Metrics are None when ground truth is unavailable; alpha is None for
    arms without a smoothing parameter.
    """

    trial: int
    t: int
    method: str
    clustering_error_pct: float | None
    rand_index_pct: float | None
    alpha: float | None
    wall_time_s: float


def clustering_error(pred: Labeling, truth: Labeling) -> float:
    """Best-matching misclassification rate, in percent.

    100 * (1 - max over one-to-one label matchings of the fraction of
    points assigned consistently), with the matching found by the same
    assignment solver used for cluster tracking.
    """
    if pred.n_points != truth.n_points:
        raise ValueError("labelings must cover the same number of points")
    if pred.n_points == 0:
        raise ValueError("labelings are empty")
    match = hungarian_match(truth, pred)
    return 100.0 * (1.0 - match.matched_weight / pred.n_points)


def rand_index(pred: Labeling, truth: Labeling) -> float:
    """Unadjusted Rand index, in percent.

    A pair of points agrees when both labelings co-cluster it or both
    separate it; the score is the fraction of agreeing pairs.
    """
    if pred.n_points != truth.n_points:
        raise ValueError("labelings must cover the same number of points")
    n = pred.n_points
    if n < 2:
        raise ValueError("Rand index needs at least two points")

    def pairs(x):
        return x * (x - 1) // 2

    pl = pred.labels
    tl = truth.labels
    # contingency counts via a joint key; integer arithmetic throughout
    joint = {}
    for a, b in zip(tl, pl):
        joint[(int(a), int(b))] = joint.get((int(a), int(b)), 0) + 1
    same_both = sum(pairs(v) for v in joint.values())
    _, tc = np.unique(tl, return_counts=True)
    _, pc = np.unique(pl, return_counts=True)
    same_truth = int(sum(pairs(c) for c in tc))
    same_pred = int(sum(pairs(c) for c in pc))
    total = pairs(n)
    agree = total + 2 * same_both - same_truth - same_pred
    return 100.0 * agree / total
