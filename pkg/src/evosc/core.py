"""Core data containers and shared matrix operations.

Conventions used throughout the package:

* data matrices are dense ``D x N`` arrays whose columns are points,
* representation matrices are sparse ``N x N`` with an exactly zero diagonal,
* affinity matrices are dense, symmetric, entrywise nonnegative, zero diagonal.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

ZERO_COLUMN_TOL = 1e-12


class ZeroColumnError(ValueError):
    """A data column has numerically zero norm and cannot be normalized."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"column {index} has norm below {ZERO_COLUMN_TOL:g}")


class RankDeficientWarning(UserWarning):
    """Requested PCA dimension exceeds the numerical rank of the data."""


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------

@dataclass
class Snapshot:
    """One time step of an evolving dataset.

    Parameters
    ----------
    data : ndarray, shape (D, N)
        Feature matrix; columns are points. Producers (generator, loader)
        keep columns at unit Euclidean norm.
    point_ids : list
        N stable identifiers; ids shared across consecutive snapshots mark
        the same evolving point.
    truth : list or None
        Optional N ground-truth cluster labels.
    """

    data: np.ndarray
    point_ids: list
    truth: list | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise ValueError("snapshot data must be a 2-D matrix")
        self.point_ids = list(self.point_ids)
        if len(self.point_ids) != self.data.shape[1]:
            raise ValueError("point_ids length must match the number of columns")
        if len(set(self.point_ids)) != len(self.point_ids):
            raise ValueError("point_ids must be unique within a snapshot")
        if self.truth is not None:
            self.truth = list(self.truth)
            if len(self.truth) != self.data.shape[1]:
                raise ValueError("truth length must match the number of columns")

    @property
    def n_features(self) -> int:
        return self.data.shape[0]

    @property
    def n_points(self) -> int:
        return self.data.shape[1]


@dataclass
class EvolvingSequence:
    """Ordered snapshots X_1, ..., X_T of an evolving dataset."""

    snapshots: list[Snapshot] = field(default_factory=list)

    def __post_init__(self):
        self.snapshots = list(self.snapshots)

    @property
    def horizon(self) -> int:
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]


class RepresentationMatrix:
    """Square sparse coefficient matrix with an exactly zero diagonal.

    Wraps a CSC matrix (column-major supports with values), the natural
    layout when coefficients are learned one column at a time.
    """

    def __init__(self, coeffs):
        coeffs = sparse.csc_array(coeffs)
        if coeffs.shape[0] != coeffs.shape[1]:
            raise ValueError(f"representation matrix must be square, got {coeffs.shape}")
        if np.any(coeffs.diagonal() != 0.0):
            raise ValueError("representation matrix diagonal must be exactly zero")
        coeffs.eliminate_zeros()
        self.coeffs = coeffs

    @classmethod
    def zeros(cls, n: int) -> "RepresentationMatrix":
        return cls(sparse.csc_array((n, n)))

    @classmethod
    def from_columns(cls, n: int, supports, values) -> "RepresentationMatrix":
        """Assemble from per-column index lists and coefficient vectors."""
        rows, cols, vals = [], [], []
        for j, (sup, val) in enumerate(zip(supports, values)):
            rows.extend(sup)
            cols.extend([j] * len(sup))
            vals.extend(np.asarray(val, dtype=float))
        mat = sparse.csc_array(
            (np.asarray(vals, dtype=float),
             (np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))),
            shape=(n, n),
        )
        return cls(mat)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape

    @property
    def nnz(self) -> int:
        return self.coeffs.nnz

    def toarray(self) -> np.ndarray:
        return self.coeffs.toarray()

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Right-multiply data by the coefficients: returns X @ C."""
        return X @ self.coeffs

    def __repr__(self):
        return f"RepresentationMatrix(n={self.n}, nnz={self.nnz})"


@dataclass
class AffinityMatrix:
    """Symmetric nonnegative matrix with zero diagonal, input to spectral clustering."""

    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        w = self.weights
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("affinity must be a square matrix")
        if not np.array_equal(w, w.T):
            raise ValueError("affinity must be exactly symmetric")
        if np.any(w < 0):
            raise ValueError("affinity must be entrywise nonnegative")
        if np.any(np.diagonal(w) != 0.0):
            raise ValueError("affinity diagonal must be zero")

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass
class Labeling:
    """Cluster assignment for N points.

    ``labels`` are integers in [1, n] where ``n`` is the size of the label
    id space; after cross-time relabeling some ids in that range may be
    unused at a given step.
    """

    labels: np.ndarray
    n: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        if self.labels.ndim != 1:
            raise ValueError("labels must be a flat vector")
        if self.n < 1:
            raise ValueError("cluster count must be at least 1")
        if self.labels.size and (self.labels.min() < 1 or self.labels.max() > self.n):
            raise ValueError(f"labels must lie in [1, {self.n}]")

    @property
    def n_points(self) -> int:
        return self.labels.size


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def normalize_columns(X: np.ndarray) -> np.ndarray:
    """Scale every column of X to unit Euclidean norm.

    Raises ZeroColumnError if any column norm falls below 1e-12.
    """
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=0)
    bad = np.flatnonzero(norms < ZERO_COLUMN_TOL)
    if bad.size:
        raise ZeroColumnError(int(bad[0]))
    return X / norms


def build_affinity(C: RepresentationMatrix) -> AffinityMatrix:
    """Affinity from a representation matrix: A = |C| + |C|^T."""
    mag = np.abs(C.toarray())
    return AffinityMatrix(mag + mag.T)


def residual(X: np.ndarray, C: RepresentationMatrix) -> float:
    """Squared Frobenius norm of the self-expression residual X - X C."""
    diff = X - C.apply(X)
    return float(np.sum(diff * diff))


def pca_project(X: np.ndarray, dim: int) -> np.ndarray:
    """Coordinates of X's columns in the basis of its top ``dim`` left singular vectors.

    Returns a ``dim x N`` matrix. If X has fewer than ``dim`` numerically
    nonzero singular values a RankDeficientWarning is emitted and the
    trailing rows are zero.
    """
    X = np.asarray(X, dtype=float)
    if dim > min(X.shape):
        raise ValueError(f"target dimension {dim} exceeds min(D, N) = {min(X.shape)}")
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    rank_tol = s[0] * max(X.shape) * np.finfo(float).eps if s.size else 0.0
    rank = int(np.sum(s > rank_tol))
    basis = U[:, :dim].copy()
    # deterministic sign convention: first nonzero entry of each vector positive
    for j in range(basis.shape[1]):
        nz = np.flatnonzero(np.abs(basis[:, j]) > 1e-12)
        if nz.size and basis[nz[0], j] < 0:
            basis[:, j] = -basis[:, j]
    proj = basis.T @ X
    if rank < dim:
        warnings.warn(
            f"data has numerical rank {rank} < requested dimension {dim}; "
            "padding projection with zero rows",
            RankDeficientWarning,
        )
        proj[rank:, :] = 0.0
    return proj
