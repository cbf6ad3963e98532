"""Stage II: conditional farthest-point sampling around the focus set, plus coverage metrics.

Distance throughout is cosine distance ``1 - cos(v_i, v_j)``, computed on demand
from unit-normalized rows. Only :func:`optimal_covering_radius` materializes
the full N x N matrix, and it refuses instances that are too large to enumerate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import FSRError, as_index_set, as_token_matrix, cosine_to, unit_rows

MAX_ORACLE_COMBINATIONS = 10**6


class OracleTooLargeError(FSRError):
    def __init__(self, combinations: int):
        super().__init__(
            f"exhaustive search needs {combinations} subsets, limit is {MAX_ORACLE_COMBINATIONS}"
        )
        self.combinations = combinations


@dataclass(frozen=True)
class ScanResult:
    scan_set: np.ndarray
    selection_order: np.ndarray
    gain_sequence: np.ndarray


@dataclass(frozen=True)
class CoverageReport:
    radius: float
    optimal_radius: float | None = None

    @property
    def ratio(self) -> float | None:
        if self.optimal_radius is None:
            return None
        if self.optimal_radius == 0.0:
            return 1.0 if self.radius == 0.0 else math.inf
        return self.radius / self.optimal_radius


def _distances_from(units: np.ndarray, j: int) -> np.ndarray:
    d = 1.0 - cosine_to(units, units[j])
    d[j] = 0.0
    return d


def _min_distances(units: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    best = np.full(units.shape[0], np.inf)
    for j in anchors:
        np.minimum(best, _distances_from(units, int(j)), out=best)
    return best


def min_distance_to_set(i: int, anchors, tokens) -> float:
    """Smallest cosine distance from token ``i`` to any anchor."""
    tokens = as_token_matrix(tokens)
    anchors = as_index_set(anchors, tokens.shape[0])
    if anchors.size == 0:
        raise FSRError("anchor set is empty")
    if not 0 <= i < tokens.shape[0]:
        raise FSRError(f"token index {i} out of range")
    if i in anchors:
        return 0.0
    units = unit_rows(tokens)
    return float(np.min(1.0 - cosine_to(units[anchors], units[i])))


def conditional_context_sampling(tokens, focus, k_s: int) -> ScanResult:
    """Greedily add ``k_s`` tokens, each the one farthest from everything chosen so far.

    The running anchor set starts as ``focus``. A per-token running minimum
    distance is updated against only the newest anchor, so the cost is
    O(k_s * N * d). Ties go to the smallest index.
    """
    tokens = as_token_matrix(tokens)
    n = tokens.shape[0]
    focus = as_index_set(focus, n)
    k_s = int(k_s)
    if k_s < 0:
        raise FSRError(f"k_s must be >= 0, got {k_s}")
    if k_s > n - focus.size:
        raise FSRError(f"k_s={k_s} exceeds the {n - focus.size} tokens outside the focus set")
    if k_s == 0:
        empty = np.empty(0, dtype=np.int64)
        return ScanResult(empty, empty.copy(), np.empty(0))

    units = unit_rows(tokens)
    order: list[int] = []
    gains: list[float] = []
    taken = np.zeros(n, dtype=bool)
    if focus.size:
        taken[focus] = True
        running = _min_distances(units, focus)
    else:
        # no fixed centers: seed with token 0, which is not part of the focus set
        order.append(0)
        gains.append(math.inf)
        taken[0] = True
        running = _distances_from(units, 0)

    while len(order) < k_s:
        candidates = np.where(taken, -np.inf, running)
        i = int(np.argmax(candidates))
        order.append(i)
        gains.append(float(running[i]))
        taken[i] = True
        np.minimum(running, _distances_from(units, i), out=running)

    selection = np.asarray(order, dtype=np.int64)
    return ScanResult(np.sort(selection), selection, np.asarray(gains))


def coverage_radius(tokens, selected) -> float:
    """Largest distance from any token to its nearest selected token."""
    tokens = as_token_matrix(tokens)
    selected = as_index_set(selected, tokens.shape[0])
    if selected.size == 0:
        raise FSRError("selection is empty")
    dist = _min_distances(unit_rows(tokens), selected)
    dist[selected] = 0.0
    return float(dist.max())


def optimal_covering_radius(tokens, focus, k_s: int, chunk: int = 4096) -> float:
    """Exact best covering radius over every size-``k_s`` extension of ``focus``.

    Brute force over all C(N - |F|, k_s) subsets; raises
    :class:`OracleTooLargeError` above ``MAX_ORACLE_COMBINATIONS``.
    """
    tokens = as_token_matrix(tokens)
    n = tokens.shape[0]
    focus = as_index_set(focus, n)
    k_s = int(k_s)
    rest = np.setdiff1d(np.arange(n), focus)
    if k_s < 0 or k_s > rest.size:
        raise FSRError(f"k_s={k_s} is not in [0, {rest.size}]")
    if focus.size == 0 and k_s == 0:
        raise FSRError("selection is empty")
    count = math.comb(rest.size, k_s)
    if count > MAX_ORACLE_COMBINATIONS:
        raise OracleTooLargeError(count)

    units = unit_rows(tokens)
    dist = 1.0 - np.clip(units @ units.T, -1.0, 1.0)
    np.fill_diagonal(dist, 0.0)
    base = dist[focus].min(axis=0) if focus.size else np.full(n, np.inf)
    if k_s == 0:
        return float(base.max())

    best = math.inf
    combos = itertools.combinations(rest.tolist(), k_s)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        # dist[block] has shape (m, k_s, N); reduce over the chosen tokens
        covered = np.minimum(base[None, :], dist[block].min(axis=1))
        best = min(best, float(covered.max(axis=1).min()))
    return best


def coverage_report(tokens, focus, scan_set, with_optimum: bool = False) -> CoverageReport:
    focus = np.asarray(focus, dtype=np.int64)
    scan_set = np.asarray(scan_set, dtype=np.int64)
    selected = np.concatenate([focus, scan_set])
    radius = coverage_radius(tokens, selected)
    optimum = optimal_covering_radius(tokens, focus, scan_set.size) if with_optimum else None
    return CoverageReport(radius, optimum)
