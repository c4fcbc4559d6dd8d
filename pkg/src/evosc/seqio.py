"""Loading and dumping evolving sequences in the manifest format.

A sequence on disk is a directory with a ``manifest.json`` listing one
entry per time step::

    {"snapshots": [{"t": 1, "file": "x_t001.txt",
                    "truth_file": "truth_t001.txt",        // optional
                    "point_ids_file": "ids_t001.txt"},     // optional
                   ...],
     "pca_dim": 8}                                         // optional

Matrix files are delimited numeric text (rows = features, columns =
points, comma or whitespace separated). Columns are normalized to unit
norm on load; when ``pca_dim`` is present each snapshot is projected onto
its top left singular vectors first and renormalized, since downstream
learners expect unit columns.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .core import EvolvingSequence, Snapshot, normalize_columns, pca_project

MANIFEST_NAME = "manifest.json"


class ManifestMissingError(FileNotFoundError):
    """No manifest file at the given location."""


class MalformedMatrixError(ValueError):
    """A matrix file could not be parsed."""

    def __init__(self, t: int, line: int, detail: str = ""):
        self.t = t
        self.line = line
        msg = f"snapshot t={t}: malformed matrix at line {line}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class DimensionMismatchError(ValueError):
    """Sidecar files disagree with the matrix dimensions."""

    def __init__(self, t: int, detail: str):
        self.t = t
        super().__init__(f"snapshot t={t}: {detail}")


def _parse_matrix(path: str, t: int) -> np.ndarray:
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            parts = stripped.replace(",", " ").split()
            try:
                row = [float(p) for p in parts]
            except ValueError as exc:
                raise MalformedMatrixError(t, lineno, str(exc)) from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise MalformedMatrixError(t, lineno, "ragged row")
            rows.append(row)
    if not rows:
        raise MalformedMatrixError(t, 0, "empty matrix file")
    return np.array(rows, dtype=float)


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip()]


def load_sequence(path: str) -> EvolvingSequence:
    """Load a sequence from a manifest directory or a manifest file path."""
    manifest_path = path
    if os.path.isdir(path):
        manifest_path = os.path.join(path, MANIFEST_NAME)
    if not os.path.isfile(manifest_path):
        raise ManifestMissingError(f"no manifest at {manifest_path}")
    base = os.path.dirname(os.path.abspath(manifest_path))
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)

    entries = manifest.get("snapshots")
    if not entries:
        raise ManifestMissingError(f"manifest {manifest_path} lists no snapshots")
    pca_dim = manifest.get("pca_dim")

    snapshots = []
    for entry in sorted(entries, key=lambda e: e["t"]):
        t = int(entry["t"])
        data = _parse_matrix(os.path.join(base, entry["file"]), t)
        n_pts = data.shape[1]

        truth = None
        if entry.get("truth_file"):
            raw = _read_lines(os.path.join(base, entry["truth_file"]))
            if len(raw) != n_pts:
                raise DimensionMismatchError(
                    t, f"truth has {len(raw)} labels for {n_pts} points")
            truth = [int(v) for v in raw]

        if entry.get("point_ids_file"):
            raw_ids = _read_lines(os.path.join(base, entry["point_ids_file"]))
            if len(raw_ids) != n_pts:
                raise DimensionMismatchError(
                    t, f"point_ids has {len(raw_ids)} entries for {n_pts} points")
            ids = [int(v) if v.lstrip("-").isdigit() else v for v in raw_ids]
        else:
            ids = list(range(n_pts))

        data = normalize_columns(data)
        if pca_dim is not None:
            dim = int(pca_dim)
            if dim > min(data.shape):
                raise DimensionMismatchError(
                    t, f"pca_dim {dim} exceeds snapshot shape {data.shape}")
            data = normalize_columns(pca_project(data, dim))
        snapshots.append(Snapshot(data=data, point_ids=ids, truth=truth))
    return EvolvingSequence(snapshots=snapshots)


def dump_sequence(seq: EvolvingSequence, out_dir: str, pca_dim: int | None = None) -> str:
    """Write a sequence in the manifest format; returns the manifest path.

    Matrices are written with enough digits to round-trip float64 exactly.
    """
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for i, snap in enumerate(seq.snapshots):
        t = i + 1
        fname = f"x_t{t:03d}.txt"
        np.savetxt(os.path.join(out_dir, fname), snap.data, fmt="%.17e")
        entry = {"t": t, "file": fname}
        if snap.truth is not None:
            tname = f"truth_t{t:03d}.txt"
            with open(os.path.join(out_dir, tname), "w", encoding="utf-8") as fh:
                fh.write("\n".join(str(v) for v in snap.truth) + "\n")
            entry["truth_file"] = tname
        iname = f"ids_t{t:03d}.txt"
        with open(os.path.join(out_dir, iname), "w", encoding="utf-8") as fh:
            fh.write("\n".join(str(v) for v in snap.point_ids) + "\n")
        entry["point_ids_file"] = iname
        entries.append(entry)
    manifest = {"snapshots": entries}
    if pca_dim is not None:
        manifest["pca_dim"] = pca_dim
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path
