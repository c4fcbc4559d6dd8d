"""Representation learners for the innovation subproblem.

Given data X (unit-norm columns) and a target matrix Xtilde, every learner
approximates

    min_U  loss(Xtilde - X U)   s.t.  diag(U) = 0,

column by column: greedy pursuit (OMP, accelerated OLS) enforces a hard
sparsity budget, while basis pursuit solves an l1-penalized convex program
via ADMM.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy import sparse

from .core import RepresentationMatrix

ALPHA_MIN = 1e-3

# candidates whose projection onto the unselected complement is this small
# are already spanned by the selected atoms and cannot be scored stably
_SPAN_TOL = 1e-12

# sparsification floor for ADMM output: keeps spectral clustering free of
# numerical dust far below meaningful coefficients on unit-norm data
_BP_FLOOR = 1e-6


class AlphaTooSmallError(ValueError):
    """Smoothing parameter below the floor that keeps 1/alpha well defined."""

    def __init__(self, alpha: float):
        self.alpha = alpha
        super().__init__(f"alpha = {alpha:g} is below the floor {ALPHA_MIN:g}")


class NotConvergedWarning(UserWarning):
    """ADMM hit its iteration cap before meeting the primal tolerance."""


@dataclass
class LearnerConfig:
    """Configuration shared by all representation learners.

    Parameters
    ----------
    method : str
        One of ``omp``, ``aols``, ``bp``.
    k : int
        Sparsity level per column for the greedy methods (iteration budget).
    L : int
        Atoms selected per AOLS iteration; total support is at most k*L.
    lam : float or None
        Data-fit weight of the basis pursuit program. None selects
        20 / mu where mu is the smallest over columns of the largest
        off-diagonal absolute correlation, a standard sparse
        self-expression convention.
    rho : float or None
        ADMM penalty parameter; None ties it to the effective lam.
    admm_max_iters, admm_tol : int, float
        ADMM iteration cap and relative primal-residual tolerance.
    admm_update : str
        ``derived`` uses the stationarity-derived quadratic update (the
        system matrix involves X); ``as_printed`` uses the variant whose
        system matrix involves Xtilde instead.
    residual_stop : float
        Greedy early stop: abandon a column once its residual norm drops
        below residual_stop times its initial value.
    """

    method: str = "omp"
    k: int = 5
    L: int = 1
    lam: float | None = None
    rho: float | None = None
    admm_max_iters: int = 200
    admm_tol: float = 1e-5
    admm_update: str = "derived"
    residual_stop: float = 1e-7

    def __post_init__(self):
        if self.method not in ("omp", "aols", "bp"):
            raise ValueError(f"unknown learner method {self.method!r}")
        if self.k < 1:
            raise ValueError("sparsity level k must be at least 1")
        if self.L < 1:
            raise ValueError("lookahead count L must be at least 1")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.rho is not None and self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.admm_update not in ("derived", "as_printed"):
            raise ValueError(f"unknown admm_update {self.admm_update!r}")


@dataclass
class GreedyState:
    """Per-column pursuit state: selected atoms, residual, orthogonal basis."""

    support: list[int] = field(default_factory=list)
    residual_vec: np.ndarray | None = None
    orthogonal_basis: np.ndarray | None = None


def compute_xtilde(X: np.ndarray, C_prev: RepresentationMatrix, alpha: float) -> np.ndarray:
    """Target matrix of the innovation subproblem: (X - (1-alpha) X C_prev) / alpha."""
    if alpha < ALPHA_MIN:
        raise AlphaTooSmallError(alpha)
    if alpha > 1.0:
        raise ValueError(f"alpha = {alpha:g} exceeds 1")
    return (X - (1.0 - alpha) * C_prev.apply(X)) / alpha


def soft_threshold(x, eta):
    """Shrinkage-thresholding operator (|x| - eta)_+ sgn(x), elementwise."""
    if eta < 0:
        raise ValueError("threshold must be nonnegative")
    return np.sign(x) * np.maximum(np.abs(x) - eta, 0.0)


def _check_unit_columns(X: np.ndarray):
    norms = np.linalg.norm(X, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError("greedy learners require unit-norm data columns")


def _pursuit_column(X, target, j, k, L, use_ols, residual_stop):
    """Greedy column subproblem shared by OMP (L=1, correlation rule) and AOLS.

    Returns the ordered support and the least-squares coefficients of
    ``target`` on the selected columns of X. The column's own index j is
    never a candidate. Stops early once the residual norm falls below
    residual_stop times its initial value (exact representation found).
    """
    D, N = X.shape
    r = target.astype(float, copy=True)
    r0 = float(np.linalg.norm(r))
    if r0 == 0.0:
        return GreedyState(support=[], residual_vec=r, orthogonal_basis=np.empty((D, 0))), np.empty(0)
    stop_norm = residual_stop * r0

    budget = k * L
    Q = np.empty((D, budget))
    nq = 0
    support: list[int] = []
    eligible = np.ones(N, dtype=bool)
    eligible[j] = False

    if use_ols:
        # projections of all candidates onto the complement of the selected span,
        # maintained incrementally so no pseudo-inverse is formed per step
        P = X.copy()
        pnorm2 = np.ones(N)  # unit columns

    for _ in range(k):
        corr2 = (r @ X) ** 2
        if use_ols:
            scores = np.where(eligible & (pnorm2 > _SPAN_TOL), corr2 / np.maximum(pnorm2, _SPAN_TOL), -np.inf)
        else:
            scores = np.where(eligible, corr2, -np.inf)
        # stable sort on -scores breaks ties toward the lowest index
        order = np.argsort(-scores, kind="stable")
        picked = [int(i) for i in order[:L] if np.isfinite(scores[i]) and scores[i] > 0.0]
        if not picked:
            break  # residual orthogonal to every remaining candidate
        for i in picked:
            support.append(i)
            eligible[i] = False
            v = X[:, i] - Q[:, :nq] @ (Q[:, :nq].T @ X[:, i])
            nv = np.linalg.norm(v)
            if nv < 1e-10:
                continue  # atom already spanned; keep it in the support only
            q = v / nv
            Q[:, nq] = q
            nq += 1
            r = r - q * (q @ r)
            if use_ols:
                w = q @ P
                P -= np.outer(q, w)
                np.subtract(pnorm2, w * w, out=pnorm2)
                np.maximum(pnorm2, 0.0, out=pnorm2)
        if np.linalg.norm(r) <= stop_norm:
            break

    if support:
        coeffs, *_ = np.linalg.lstsq(X[:, support], target, rcond=None)
    else:
        coeffs = np.empty(0)
    state = GreedyState(support=support, residual_vec=r, orthogonal_basis=Q[:, :nq])
    return state, coeffs


def omp_column(X, target, j, k, residual_stop=1e-7):
    """OMP selection for one column: argmax of squared residual correlation."""
    return _pursuit_column(X, target, j, k, L=1, use_ols=False, residual_stop=residual_stop)


def aols_column(X, target, j, k, L=1, residual_stop=1e-7):
    """Accelerated OLS selection for one column: projection-normalized
    correlation rule, L atoms per iteration."""
    return _pursuit_column(X, target, j, k, L=L, use_ols=True, residual_stop=residual_stop)


def learn_omp(X: np.ndarray, Xtilde: np.ndarray, k: int,
              residual_stop: float = 1e-7) -> RepresentationMatrix:
    """Innovation matrix via orthogonal matching pursuit, column by column."""
    _check_unit_columns(X)
    N = X.shape[1]
    if k >= N:
        raise ValueError("sparsity level k must be smaller than the number of points")
    supports, values = [], []
    for j in range(N):
        state, coeffs = omp_column(X, Xtilde[:, j], j, k, residual_stop)
        supports.append(state.support)
        values.append(coeffs)
    return RepresentationMatrix.from_columns(N, supports, values)


def learn_aols(X: np.ndarray, Xtilde: np.ndarray, k: int, L: int = 1,
               residual_stop: float = 1e-7) -> RepresentationMatrix:
    """Innovation matrix via accelerated orthogonal least squares."""
    _check_unit_columns(X)
    N = X.shape[1]
    if k >= N:
        raise ValueError("sparsity level k must be smaller than the number of points")
    supports, values = [], []
    for j in range(N):
        state, coeffs = aols_column(X, Xtilde[:, j], j, k, L, residual_stop)
        supports.append(state.support)
        values.append(coeffs)
    return RepresentationMatrix.from_columns(N, supports, values)


def default_bp_weight(X: np.ndarray, Xtilde: np.ndarray) -> float:
    """Data-fit weight 20 / mu, mu = min over columns of the largest
    off-diagonal absolute correlation with the target column."""
    corr = np.abs(X.T @ Xtilde)
    np.fill_diagonal(corr, -np.inf)
    mu = float(np.min(np.max(corr, axis=0)))
    return 20.0 / max(mu, 1e-12)


def make_gram_solver(B: np.ndarray, lam: float, rho: float):
    """Factored solver for (lam B^T B + rho I) Z = RHS.

    Uses the matrix inversion lemma against the D x D core so each solve
    costs O(D N^2) instead of O(N^3); the small factorization is computed
    once and cached in the returned closure.
    """
    D = B.shape[0]
    core = np.eye(D) / lam + (B @ B.T) / rho
    cho = sla.cho_factor(core)

    def solve(rhs: np.ndarray) -> np.ndarray:
        return rhs / rho - B.T @ sla.cho_solve(cho, B @ rhs) / rho**2

    return solve


def learn_bp_admm(X: np.ndarray, Xtilde: np.ndarray, cfg: LearnerConfig) -> RepresentationMatrix:
    """Innovation matrix via l1-penalized basis pursuit solved with ADMM.

    Approximately solves

        min_U ||U||_1 + (lam/2) ||Xtilde - X U||_F^2   s.t. diag(U) = 0

    by alternating a cached quadratic solve for the auxiliary variable, an
    elementwise shrinkage for U, and dual ascent. Terminates once
    ||Z - U||_F <= admm_tol * max(||Z||_F, 1). If the iteration cap is hit
    first, a NotConvergedWarning is emitted and the best iterate (smallest
    primal residual seen) is returned. Entries below 1e-6 are truncated to
    exact zeros in the returned sparse matrix.
    """
    N = X.shape[1]
    lam = cfg.lam if cfg.lam is not None else default_bp_weight(X, Xtilde)
    rho = cfg.rho if cfg.rho is not None else lam

    if cfg.admm_update == "derived":
        solve = make_gram_solver(X, lam, rho)
        G = lam * (X.T @ Xtilde)
    else:
        solve = make_gram_solver(Xtilde, lam, rho)
        G = lam * (Xtilde.T @ Xtilde)

    U = np.zeros((N, N))
    Y = np.zeros((N, N))
    best_U, best_primal = U, np.inf
    converged = False
    for _ in range(cfg.admm_max_iters):
        Z = solve(G - Y + rho * U)
        J = soft_threshold(Z + Y / rho, 1.0 / rho)
        np.fill_diagonal(J, 0.0)
        U = J
        Y += rho * (Z - U)
        primal = float(np.linalg.norm(Z - U))
        if primal < best_primal:
            best_primal, best_U = primal, U
        if primal <= cfg.admm_tol * max(float(np.linalg.norm(Z)), 1.0):
            converged = True
            break
    if not converged:
        warnings.warn(
            f"ADMM stopped after {cfg.admm_max_iters} iterations with primal "
            f"residual {best_primal:.3e}; returning best iterate",
            NotConvergedWarning,
        )
        U = best_U

    U = np.where(np.abs(U) >= _BP_FLOOR, U, 0.0)
    np.fill_diagonal(U, 0.0)
    return RepresentationMatrix(sparse.csc_array(U))


def bp_objective(X: np.ndarray, Xtilde: np.ndarray, U: RepresentationMatrix, lam: float) -> float:
    """True basis pursuit objective ||U||_1 + (lam/2) ||Xtilde - X U||_F^2."""
    fit = Xtilde - U.apply(X)
    return float(np.abs(U.coeffs).sum() + 0.5 * lam * np.sum(fit * fit))


def learn_representation(X: np.ndarray, Xtilde: np.ndarray, cfg: LearnerConfig) -> RepresentationMatrix:
    """Dispatch to the configured learner."""
    if cfg.method == "omp":
        return learn_omp(X, Xtilde, cfg.k, cfg.residual_stop)
    if cfg.method == "aols":
        return learn_aols(X, Xtilde, cfg.k, cfg.L, cfg.residual_stop)
    return learn_bp_admm(X, Xtilde, cfg)
