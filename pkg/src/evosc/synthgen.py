"""Synthetic benchmark: unions of rotating random subspaces with optional
absorption events.

The scenario starts from n random d-dimensional subspaces of R^D holding
unit-norm points sampled uniformly on each subspace's sphere. Every step
each subspace rotates by a fixed angle in its own freshly drawn random
2-plane, and points ride along rigidly. An optional absorption event
projects one subspace's points onto another subspace for a window of time
steps, then releases them back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EvolvingSequence, Snapshot


@dataclass
class MergeEvent:
    """Absorption window: points of ``absorb_from`` live on ``absorb_into``
    for t in [t_start, t_end) and return to their own subspace at t_end."""

    absorb_from: int
    absorb_into: int
    t_start: int
    t_end: int

    def __post_init__(self):
        if self.t_start < 2:
            raise ValueError("absorption cannot start before the second time step")
        if self.t_start >= self.t_end:
            raise ValueError("t_start must precede t_end")
        if self.absorb_from == self.absorb_into:
            raise ValueError("a subspace cannot absorb itself")


@dataclass
class ScenarioConfig:
    D: int = 10
    d: int = 6
    n: int = 10
    points_per_subspace: int = 50
    T: int = 20
    rotation_deg: float = 45.0
    merge_event: MergeEvent | None = None
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.d > self.D:
            raise ValueError("subspace dimension cannot exceed the ambient dimension")
        if not 0.0 <= self.rotation_deg <= 180.0:
            raise ValueError("rotation_deg must lie in [0, 180]")
        if self.merge_event is not None:
            for sid in (self.merge_event.absorb_from, self.merge_event.absorb_into):
                if not 1 <= sid <= self.n:
                    raise ValueError(f"merge event references unknown subspace {sid}")


def random_subspaces(cfg: ScenarioConfig, rng: np.random.Generator) -> list[np.ndarray]:
    """n orthonormal D x d bases: top left singular vectors of Gaussian matrices."""
    bases = []
    for _ in range(cfg.n):
        G = rng.standard_normal((cfg.D, cfg.D))
        U, _, _ = np.linalg.svd(G)
        bases.append(U[:, :cfg.d].copy())
    return bases


def sample_points(basis: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """m unit-norm points uniform on the subspace's unit sphere: B g / ||B g||."""
    d = basis.shape[1]
    g = rng.standard_normal((d, m))
    pts = basis @ g
    norms = np.linalg.norm(pts, axis=0)
    return pts / np.where(norms > 0, norms, 1.0)


def _plane_rotation(D: int, theta_deg: float, rng: np.random.Generator) -> np.ndarray:
    """Rotation by theta in a uniformly random 2-plane, identity elsewhere."""
    u = rng.standard_normal(D)
    u /= np.linalg.norm(u)
    v = rng.standard_normal(D)
    v -= u * (u @ v)
    v /= np.linalg.norm(v)
    th = math.radians(theta_deg)
    return (
        np.eye(D)
        + (math.cos(th) - 1.0) * (np.outer(u, u) + np.outer(v, v))
        + math.sin(th) * (np.outer(v, u) - np.outer(u, v))
    )


def _reorthonormalize(B: np.ndarray) -> np.ndarray:
    """QR cleanup with the positive-diagonal convention, so a numerically
    orthonormal input comes back essentially unchanged."""
    Q, R = np.linalg.qr(B)
    signs = np.sign(np.diagonal(R))
    signs[signs == 0] = 1.0
    return Q * signs


def rotate_basis(basis: np.ndarray, theta_deg: float, rng: np.random.Generator) -> np.ndarray:
    """Rotate a subspace basis by theta_deg in a random 2-plane of the ambient space.

    theta_deg = 0 returns the basis unchanged (and consumes no randomness).
    """
    if theta_deg == 0.0:
        return basis.copy()
    R = _plane_rotation(basis.shape[0], theta_deg, rng)
    return _reorthonormalize(R @ basis)


def generate_sequence(cfg: ScenarioConfig, rng: np.random.Generator) -> EvolvingSequence:
    """Build the full rotating-subspaces sequence, truth labels included.

    Each subspace rotates by the configured angle per step in its own
    random 2-plane, drawn once and reused so the motion has constant
    angular velocity (different planes per subspace keep relative subspace
    positions changing). Point positions follow the construction of the
    initial step throughout: the original sampled coordinates are projected
    onto the current span of their subspace and renormalized.

    During an absorption window the absorbed points are projected onto the
    absorber's span (their truth labels switch to the absorber's); the
    window end projects the points' pre-absorption coordinates back onto
    their own, meanwhile further-rotated, subspace and the original
    projection rule resumes from there.
    """
    m = cfg.points_per_subspace
    N = cfg.n * m
    bases = random_subspaces(cfg, rng)
    origins = np.hstack([sample_points(bases[i], m, rng) for i in range(cfg.n)])
    coords = origins.copy()
    home = np.repeat(np.arange(1, cfg.n + 1), m)  # native subspace per point
    member = home.copy()                          # subspace each point currently rides
    point_ids = list(range(N))

    rotations = None
    if cfg.rotation_deg != 0.0:
        rotations = [_plane_rotation(cfg.D, cfg.rotation_deg, rng)
                     for _ in range(cfg.n)]

    ev = cfg.merge_event
    snapshots = []
    for t in range(1, cfg.T + 1):
        if t > 1:
            if ev is not None and t == ev.t_start:
                absorbed = home == ev.absorb_from
                # the absorber's span now hosts the points' last coordinates
                origins[:, absorbed] = coords[:, absorbed]
                member[absorbed] = ev.absorb_into
            elif ev is not None and t == ev.t_end:
                member[home == ev.absorb_from] = ev.absorb_from
            if rotations is not None:
                bases = [_reorthonormalize(R @ B) for R, B in zip(rotations, bases)]
            if rotations is not None or (ev is not None and t in (ev.t_start, ev.t_end)):
                for s in range(1, cfg.n + 1):
                    sel = member == s
                    if not sel.any():
                        continue
                    B = bases[s - 1]
                    proj = B @ (B.T @ origins[:, sel])
                    coords[:, sel] = proj / np.linalg.norm(proj, axis=0)
        snapshots.append(Snapshot(data=coords.copy(), point_ids=list(point_ids),
                                  truth=list(member)))
    return EvolvingSequence(snapshots=snapshots)
