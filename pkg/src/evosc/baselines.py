"""Comparison arms: memoryless static clustering and affinity smoothing.

The affinity-smoothing arm combines the affinity built from the current
snapshot with the previous combined affinity through a fixed convex weight,
the classical evolutionary-clustering recipe. Both arms reuse the same
representation learners as the evolutionary model so comparisons isolate
the temporal strategy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AffinityMatrix, RepresentationMatrix, Snapshot
from .learners import LearnerConfig, learn_representation


@dataclass
class AffectState:
    """Carries the previous combined affinity and the fixed smoothing weight."""

    A_prev: AffinityMatrix
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


def static_step(snapshot: Snapshot, learner: LearnerConfig) -> RepresentationMatrix:
    """Per-step representation with no history: the target is the data itself."""
    X = snapshot.data
    return learn_representation(X, X, learner)


def affect_step(state: AffectState, A_bar: AffinityMatrix) -> AffinityMatrix:
    """Convex combination alpha * A_bar + (1 - alpha) * A_prev."""
    if A_bar.n != state.A_prev.n:
        raise ValueError("affinity dimensions do not match; align point ids first")
    w = state.alpha * A_bar.weights + (1.0 - state.alpha) * state.A_prev.weights
    return AffinityMatrix(w)


def align_affinity(A_prev: AffinityMatrix, old_ids, new_ids) -> AffinityMatrix:
    """Reindex a previous affinity onto a new point set.

    Vanished points are dropped; new points get zero rows/columns.
    """
    old_ids, new_ids = list(old_ids), list(new_ids)
    if old_ids == new_ids:
        return A_prev
    old_pos = {pid: i for i, pid in enumerate(old_ids)}
    n_new = len(new_ids)
    W = np.zeros((n_new, n_new))
    keep_new = [i for i, pid in enumerate(new_ids) if pid in old_pos]
    keep_old = [old_pos[new_ids[i]] for i in keep_new]
    W[np.ix_(keep_new, keep_new)] = A_prev.weights[np.ix_(keep_old, keep_old)]
    return AffinityMatrix(W)
