"""Evolutionary engine: per-step alternating minimization over (alpha, U).

Each time step fits the convex evolutionary self-expressive model

    C_t = alpha * U + (1 - alpha) * C_{t-1}

by first picking the smoothing parameter alpha with a golden-section
search (using the previous innovation U_{t-1}), then learning a fresh
innovation U on the reformulated target, and finally assembling C_t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .core import RepresentationMatrix, Snapshot
from .learners import ALPHA_MIN, LearnerConfig, compute_xtilde, learn_representation

# flat-objective convention and assembly sparsification floor
_FLAT_DIRECTION_TOL = 1e-10
_ASSEMBLY_FLOOR = 1e-8

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class DegenerateProblemError(ValueError):
    """Too few points for self-expression (no candidate atoms exist)."""


@dataclass
class CesmState:
    """Carry-over between consecutive time steps of one evolving sequence."""

    C_prev: RepresentationMatrix
    U_prev: RepresentationMatrix
    alpha_prev: float
    point_ids: list
    learner: LearnerConfig

    def __post_init__(self):
        if self.C_prev.shape != self.U_prev.shape:
            raise ValueError("C_prev and U_prev must have the same shape")
        if not 0.0 <= self.alpha_prev <= 1.0:
            raise ValueError("alpha_prev must lie in [0, 1]")
        if len(self.point_ids) != self.C_prev.n:
            raise ValueError("point_ids must match the representation dimension")


def golden_section_alpha(X: np.ndarray, U: RepresentationMatrix,
                         C_prev: RepresentationMatrix,
                         tol: float = 1e-4, max_iters: int = 60) -> float:
    """Minimize ||X - X (a U + (1-a) C_prev)||_F^2 over a in [0, 1].

    The objective is quadratic (hence unimodal) in a, so golden-section
    bracketing converges to the clamped minimizer. When the search
    direction X (U - C_prev) is numerically zero the objective is flat and
    the midpoint 0.5 is returned by convention.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    R = X - C_prev.apply(X)
    M = X @ (U.coeffs - C_prev.coeffs)
    if np.linalg.norm(M) <= _FLAT_DIRECTION_TOL:
        return 0.5

    def objective(a: float) -> float:
        diff = R - a * M
        return float(np.sum(diff * diff))

    lo, hi = 0.0, 1.0
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = objective(c), objective(d)
    for _ in range(max_iters):
        if hi - lo <= tol:
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = objective(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = objective(d)
    return (lo + hi) / 2.0


def _assemble(alpha: float, U: RepresentationMatrix,
              C_prev: RepresentationMatrix) -> RepresentationMatrix:
    """C = alpha U + (1 - alpha) C_prev, with tiny entries dropped to bound
    support growth across steps."""
    C = alpha * U.coeffs + (1.0 - alpha) * C_prev.coeffs
    C.data[np.abs(C.data) < _ASSEMBLY_FLOOR] = 0.0
    C.eliminate_zeros()
    return RepresentationMatrix(C)


def cesm_initial_step(snapshot: Snapshot, learner: LearnerConfig) -> CesmState:
    """Static start: learn C_1 with no history (target equals the data itself)
    and seed the state with U_prev = C_prev = C_1, alpha = 0.5."""
    if snapshot.n_points < 2:
        raise DegenerateProblemError("self-expression needs at least two points")
    X = snapshot.data
    C1 = learn_representation(X, X, learner)
    return CesmState(C_prev=C1, U_prev=C1, alpha_prev=0.5,
                     point_ids=list(snapshot.point_ids), learner=learner)


def cesm_step(snapshot: Snapshot, state: CesmState):
    """One evolutionary step; mutates ``state`` to carry the new (C, U, alpha).

    Alternates once per time step: the innovation is learned on the target
    reformulated with the carried smoothing weight, then the weight is
    re-optimized for the freshly learned innovation by golden-section
    search, and the new representation is assembled as their convex
    combination. Learning the innovation before re-fitting the weight keeps
    both subproblems well posed; re-fitting the weight first, against the
    stale innovation, drives the weight toward zero on drifting data and
    the reformulation target degenerates.

    Returns (C_t, alpha_t, U_t). The caller is responsible for aligning the
    state to the snapshot's point ids first (see adjust_state).
    """
    if list(snapshot.point_ids) != list(state.point_ids):
        raise ValueError("state is not aligned with the snapshot point ids; "
                         "call adjust_state first")
    X = snapshot.data
    alpha_ref = min(max(state.alpha_prev, ALPHA_MIN), 1.0)
    Xtilde = compute_xtilde(X, state.C_prev, alpha_ref)
    U = learn_representation(X, Xtilde, state.learner)
    alpha = golden_section_alpha(X, U, state.C_prev)
    alpha = min(max(alpha, ALPHA_MIN), 1.0)
    C = _assemble(alpha, U, state.C_prev)
    state.C_prev, state.U_prev, state.alpha_prev = C, U, alpha
    return C, alpha, U


def adjust_state(state: CesmState, new_ids: list) -> CesmState:
    """Align carried representations with a new point set.

    Rows/columns of vanished points are removed; all-zero rows/columns are
    inserted for new points, positioned per ``new_ids`` order. Surviving
    coefficients are preserved bitwise. Returns a new state; the input is
    left untouched.
    """
    new_ids = list(new_ids)
    if len(set(new_ids)) != len(new_ids):
        raise ValueError("new_ids must be unique")
    if new_ids == list(state.point_ids):
        return CesmState(C_prev=state.C_prev, U_prev=state.U_prev,
                         alpha_prev=state.alpha_prev, point_ids=new_ids,
                         learner=state.learner)

    old_pos = {pid: i for i, pid in enumerate(state.point_ids)}
    survivors = [(old_pos[pid], new_pos) for new_pos, pid in enumerate(new_ids)
                 if pid in old_pos]
    n_new = len(new_ids)

    def remap(C: RepresentationMatrix) -> RepresentationMatrix:
        if not survivors:
            return RepresentationMatrix.zeros(n_new)
        old_idx = np.array([o for o, _ in survivors])
        new_idx = np.array([p for _, p in survivors])
        sub = C.coeffs[old_idx][:, old_idx].tocoo()
        mat = sparse.csc_array(
            (sub.data, (new_idx[sub.row], new_idx[sub.col])), shape=(n_new, n_new))
        return RepresentationMatrix(mat)

    return CesmState(C_prev=remap(state.C_prev), U_prev=remap(state.U_prev),
                     alpha_prev=state.alpha_prev, point_ids=new_ids,
                     learner=state.learner)
