"""Stage III: fold the most anchor-like discarded tokens into their nearest scan anchors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FSRError, as_index_set, as_score_vector, as_token_matrix, unit_rows


@dataclass(frozen=True)
class RefineAssignment:
    """Nearest-anchor assignment for a batch of discarded tokens (one entry per token)."""

    discarded_index: np.ndarray
    anchor_index: np.ndarray
    similarity: np.ndarray

    def __len__(self) -> int:
        return self.discarded_index.size


@dataclass(frozen=True)
class RefinedTokens:
    anchors: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray
    member_lists: list[list[int]]


def assign_nearest_anchor(discarded, scan, tokens) -> RefineAssignment | None:
    """Map each discarded token to its most cosine-similar scan anchor.

    Returns None when there are no anchors, which means refinement is skipped.
    Ties go to the smallest anchor index.
    """
    tokens = as_token_matrix(tokens)
    n = tokens.shape[0]
    discarded = as_index_set(discarded, n)
    scan = as_index_set(scan, n)
    if np.intersect1d(discarded, scan).size:
        raise FSRError("discarded and scan sets overlap")
    if scan.size == 0:
        return None
    units = unit_rows(tokens)
    sims = np.clip(units[discarded] @ units[scan].T, -1.0, 1.0)
    if discarded.size == 0:
        best = np.empty(0, dtype=np.int64)
    else:
        best = np.argmax(sims, axis=1)
    return RefineAssignment(
        discarded_index=discarded,
        anchor_index=scan[best],
        similarity=sims[np.arange(discarded.size), best],
    )


def merge_budget(kappa: float, scan_size: int, n_discarded: int) -> int:
    if kappa < 0 or not math.isfinite(kappa):
        raise FSRError(f"kappa must be a finite nonnegative number, got {kappa}")
    return min(math.floor(kappa * scan_size), n_discarded)


def select_top_m(assignments: RefineAssignment | None, kappa: float, scan_size: int) -> np.ndarray:
    """Discarded tokens most similar to their assigned anchor, M = floor(kappa * |S|) of them.

    Returned in ascending index order.
    """
    if assignments is None or len(assignments) == 0:
        merge_budget(kappa, scan_size, 0)
        return np.empty(0, dtype=np.int64)
    m = merge_budget(kappa, scan_size, len(assignments))
    # discarded_index is ascending, so a stable sort on -similarity breaks ties by index
    order = np.argsort(-assignments.similarity, kind="stable")[:m]
    return np.sort(assignments.discarded_index[order])


def weighted_merge(scan, d_top, assignments: RefineAssignment | None, phi, tokens) -> RefinedTokens:
    """Running priority-weighted averaging of each D_top member into its anchor.

    Each anchor starts at its own row with weight phi_j; members are absorbed
    one at a time in ascending index order. A step whose combined weight is
    zero leaves the anchor vector as it was.
    """
    tokens = as_token_matrix(tokens)
    n = tokens.shape[0]
    phi = as_score_vector(phi, n)
    scan = as_index_set(scan, n)
    d_top = as_index_set(d_top, n)

    vectors = tokens[scan].copy()
    weights = phi[scan].copy()
    members: list[list[int]] = [[] for _ in range(scan.size)]
    if d_top.size == 0:
        return RefinedTokens(scan, vectors, weights, members)
    if assignments is None:
        raise FSRError("merge members given without anchor assignments")

    slot_of_anchor = {int(a): k for k, a in enumerate(scan)}
    anchor_of = dict(zip(assignments.discarded_index.tolist(), assignments.anchor_index.tolist()))
    for i in d_top.tolist():
        if i not in anchor_of:
            raise FSRError(f"token {i} has no anchor assignment")
        k = slot_of_anchor[anchor_of[i]]
        w_i = phi[i]
        total = weights[k] + w_i
        if total != 0.0:
            vectors[k] = (weights[k] * vectors[k] + w_i * tokens[i]) / total
        weights[k] = total
        members[k].append(i)
    return RefinedTokens(scan, vectors, weights, members)
