"""Normalized spectral clustering (symmetric Laplacian variant) with k-means."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .core import AffinityMatrix, Labeling


class IsolatedVertexWarning(UserWarning):
    """Some point has zero affinity to every other point."""


@dataclass
class SpectralConfig:
    n: int
    kmeans_restarts: int = 20
    kmeans_max_iters: int = 300
    seed: object = 0  # anything accepted by numpy.random.default_rng

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("cluster count must be at least 1")
        if self.kmeans_restarts < 1:
            raise ValueError("kmeans_restarts must be at least 1")


def symmetric_laplacian(A: AffinityMatrix) -> np.ndarray:
    """L = I - Deg^{-1/2} A Deg^{-1/2}; isolated vertices keep an identity row."""
    W = A.weights
    deg = W.sum(axis=1)
    isolated = deg <= 0.0
    with np.errstate(divide="ignore"):
        dinv = np.where(isolated, 0.0, 1.0 / np.sqrt(np.where(isolated, 1.0, deg)))
    return np.eye(W.shape[0]) - dinv[:, None] * W * dinv[None, :]


def spectral_cluster(A: AffinityMatrix, cfg: SpectralConfig) -> Labeling:
    """Cluster points by the spectrum of the symmetric-normalized Laplacian.

    Takes the eigenvectors of the n smallest eigenvalues, row-normalizes the
    embedding, and runs restarted k-means. Rows of isolated vertices (zero
    degree) are set to the zero vector and a warning is emitted.
    """
    N = A.n
    if cfg.n > N:
        raise ValueError("cannot form more clusters than points")
    deg = A.weights.sum(axis=1)
    isolated = deg <= 0.0
    if isolated.any():
        warnings.warn(
            f"{int(isolated.sum())} isolated vertices; their embedding rows are zeroed",
            IsolatedVertexWarning,
        )
    lap = symmetric_laplacian(A)
    _, vecs = sla.eigh(lap, subset_by_index=(0, cfg.n - 1))
    vecs[isolated, :] = 0.0
    norms = np.linalg.norm(vecs, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    embedding = vecs / safe[:, None]
    return kmeans(embedding, cfg.n, cfg)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding; degenerates gracefully when distances collapse."""
    N = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = int(rng.integers(N))
    centers[0] = points[first]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(N, p=d2 / total))
        else:
            idx = int(rng.integers(N))
        centers[c] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _assign(points: np.ndarray, centers: np.ndarray):
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    labels = np.argmin(d2, axis=1)
    return labels, np.maximum(d2[np.arange(points.shape[0]), labels], 0.0)


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iters: int):
    """Lloyd iterations; empty clusters are re-seeded at the point farthest
    from its assigned center. Returns labels, centers and the inertia history."""
    history = []
    labels, d2 = _assign(points, centers)
    for _ in range(max_iters):
        history.append(float(d2.sum()))
        for c in range(centers.shape[0]):
            mask = labels == c
            if mask.any():
                centers[c] = points[mask].mean(axis=0)
            else:
                far = int(np.argmax(d2))
                if d2[far] > 0.0:  # nothing to gain from splitting coincident points
                    centers[c] = points[far]
                    labels[far] = c
                    d2[far] = 0.0
        new_labels, d2 = _assign(points, centers)
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    history.append(float(d2.sum()))
    return labels, centers, history


def kmeans(points: np.ndarray, k: int, cfg: SpectralConfig) -> Labeling:
    """Restarted k-means with k-means++ seeding; keeps the minimum-inertia run.

    Ties are broken toward the earliest restart, so results are fully
    determined by cfg.seed.
    """
    points = np.asarray(points, dtype=float)
    N = points.shape[0]
    if k > N:
        raise ValueError("cannot form more clusters than points")
    rng = np.random.default_rng(cfg.seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(cfg.kmeans_restarts):
        centers = _kmeans_pp_init(points, k, rng)
        labels, _, history = _lloyd(points, centers, cfg.kmeans_max_iters)
        if history[-1] < best_inertia:
            best_inertia = history[-1]
            best_labels = labels
    return Labeling(labels=best_labels + 1, n=k)
