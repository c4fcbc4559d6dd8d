"""Cluster tracking across time steps via maximum-weight bipartite matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Labeling


@dataclass
class MatchResult:
    """Assignment between the clusters of two labelings.

    ``permutation`` maps current labels to their matched previous labels;
    current labels without a real partner are absent and receive fresh ids
    during relabeling. ``overlap`` counts shared points, with rows indexed
    by ``prev_label_set`` and columns by ``curr_label_set`` (both sorted).
    """

    permutation: dict[int, int]
    overlap: np.ndarray
    prev_label_set: np.ndarray
    curr_label_set: np.ndarray
    prev_n: int
    matched_weight: int


def _shared_positions(prev, curr, shared_ids, prev_ids, curr_ids):
    if prev_ids is None and curr_ids is None:
        if prev.n_points != curr.n_points:
            raise ValueError("labelings must cover the same points when ids are omitted")
        idx = np.arange(prev.n_points)
        return idx, idx
    if prev_ids is None or curr_ids is None:
        raise ValueError("provide both prev_ids and curr_ids, or neither")
    prev_pos = {pid: i for i, pid in enumerate(prev_ids)}
    curr_pos = {pid: i for i, pid in enumerate(curr_ids)}
    if shared_ids is None:
        shared_ids = [pid for pid in curr_ids if pid in prev_pos]
    p_idx, c_idx = [], []
    for pid in shared_ids:
        if pid not in prev_pos or pid not in curr_pos:
            raise ValueError(f"id {pid!r} is not covered by both labelings")
        p_idx.append(prev_pos[pid])
        c_idx.append(curr_pos[pid])
    return np.array(p_idx, dtype=int), np.array(c_idx, dtype=int)


def hungarian_match(prev: Labeling, curr: Labeling, shared_ids=None,
                    prev_ids=None, curr_ids=None) -> MatchResult:
    """Match current clusters to previous ones by maximizing shared-point counts.

    The overlap count matrix is built over the shared points, padded with
    zero-overlap dummies to square, and solved as a minimization of
    (max_overlap - overlap) -- the classical reduction. When ids are
    omitted the two labelings are assumed to cover the same points in the
    same order.
    """
    p_idx, c_idx = _shared_positions(prev, curr, shared_ids, prev_ids, curr_ids)
    prev_labels = prev.labels[p_idx]
    curr_labels = curr.labels[c_idx]

    prev_set = np.unique(prev_labels)
    curr_set = np.unique(curr_labels)
    np_, nc = prev_set.size, curr_set.size
    prev_index = {int(l): i for i, l in enumerate(prev_set)}
    curr_index = {int(l): i for i, l in enumerate(curr_set)}

    overlap = np.zeros((np_, nc), dtype=int)
    for pl, cl in zip(prev_labels, curr_labels):
        overlap[prev_index[int(pl)], curr_index[int(cl)]] += 1

    side = max(np_, nc)
    padded = np.zeros((side, side), dtype=int)
    padded[:np_, :nc] = overlap
    cost = padded.max() - padded
    rows, cols = linear_sum_assignment(cost)

    permutation = {}
    weight = 0
    for r, c in zip(rows, cols):
        # zero-overlap pairs carry no evidence; treat them as unmatched
        if r < np_ and c < nc and overlap[r, c] > 0:
            permutation[int(curr_set[c])] = int(prev_set[r])
            weight += int(overlap[r, c])
    return MatchResult(permutation=permutation, overlap=overlap,
                       prev_label_set=prev_set, curr_label_set=curr_set,
                       prev_n=prev.n, matched_weight=weight)


def relabel(curr: Labeling, match: MatchResult) -> Labeling:
    """Rename current labels so matched clusters keep their previous ids.

    Unmatched clusters get fresh ids above every id used so far; fresh ids
    are handed out in ascending order of the unmatched current labels.
    """
    mapping = dict(match.permutation)
    used = max([match.prev_n, *mapping.values()]) if mapping else match.prev_n
    next_id = used + 1
    for lab in np.unique(curr.labels):
        if int(lab) not in mapping:
            mapping[int(lab)] = next_id
            next_id += 1
    new_labels = np.array([mapping[int(l)] for l in curr.labels], dtype=int)
    n = max(int(new_labels.max()), match.prev_n) if new_labels.size else match.prev_n
    return Labeling(labels=new_labels, n=n)
