"""Shared numeric primitives: validation, cosine geometry, normalization, ordering.

Everything here works in float64 and never mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

SaliencyMode = Literal["cls_attention", "self_attention_aggregate"]
RelevanceMode = Literal["query", "none"]

SALIENCY_MODES = ("cls_attention", "self_attention_aggregate")
RELEVANCE_MODES = ("query", "none")


class FSRError(ValueError):
    """Invalid input to the pruning engine."""


class DimensionError(FSRError):
    """Shapes of the inputs do not agree."""


@dataclass(frozen=True)
class PruneConfig:
    """Hyperparameters of one prune call.

    ``budget_K`` is the number of tokens kept. ``alpha``/``beta`` weight the
    relevance and saliency pathways, ``rho`` is the fraction of priority mass
    the focus set must hold, and ``kappa`` scales how many discarded tokens are
    merged into scan anchors.
    """

    budget_K: int
    alpha: float = 3.0
    beta: float = 1.0
    rho: float = 0.9
    kappa: float = 1.0
    saliency_mode: SaliencyMode = "cls_attention"
    relevance_mode: RelevanceMode = "query"
    compute_stats: bool = field(default=True, compare=False)

    def __post_init__(self):
        if isinstance(self.budget_K, bool) or int(self.budget_K) != self.budget_K:
            raise FSRError(f"budget_K must be an integer, got {self.budget_K!r}")
        if self.budget_K < 1:
            raise FSRError(f"budget_K must be >= 1, got {self.budget_K}")
        for name in ("alpha", "beta", "kappa"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise FSRError(f"{name} must be a finite nonnegative number, got {value}")
        if not (0.0 <= self.rho <= 1.0):
            raise FSRError(f"rho must lie in [0, 1], got {self.rho}")
        if self.saliency_mode not in SALIENCY_MODES:
            raise FSRError(f"unknown saliency_mode {self.saliency_mode!r}")
        if self.relevance_mode not in RELEVANCE_MODES:
            raise FSRError(f"unknown relevance_mode {self.relevance_mode!r}")

    def as_dict(self) -> dict:
        return {
            "budget_K": int(self.budget_K),
            "alpha": float(self.alpha),
            "beta": float(self.beta),
            "rho": float(self.rho),
            "kappa": float(self.kappa),
            "saliency_mode": self.saliency_mode,
            "relevance_mode": self.relevance_mode,
        }


def as_token_matrix(tokens) -> np.ndarray:
    """Validate an N x d embedding matrix and return it as float64."""
    arr = np.asarray(tokens, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"token matrix must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"token matrix must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FSRError("token matrix contains non-finite values")
    return arr


def as_score_vector(scores, n: int | None = None) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"score vector must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise FSRError("score vector is empty")
    if n is not None and arr.size != n:
        raise DimensionError(f"score vector has length {arr.size}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise FSRError("score vector contains non-finite values")
    return arr


def as_index_set(indices, n: int) -> np.ndarray:
    """Validate indices into [0, n) and return them sorted ascending as int64."""
    arr = np.asarray(indices, dtype=np.int64).reshape(-1)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise FSRError(f"index out of range for {n} tokens")
    out = np.sort(arr)
    if out.size > 1 and np.any(out[1:] == out[:-1]):
        raise FSRError("index set contains duplicates")
    return out


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionError(f"vectors must be 1-D of equal length, got {a.shape} and {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise FSRError("vectors contain non-finite values")
    return a, b


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between ``a`` and ``b``; 0 if either is the zero vector."""
    a, b = _pair(a, b)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def cosine_distance(a, b) -> float:
    return 1.0 - cosine_similarity(a, b)


def unit_rows(tokens: np.ndarray) -> np.ndarray:
    """Rows scaled to unit L2 norm. Zero rows stay zero, so their cosine with anything is 0."""
    norms = np.linalg.norm(tokens, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return tokens / safe


def cosine_to(units: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Cosine of every unit row against one unit vector, clipped to [-1, 1]."""
    return np.clip(units @ vector, -1.0, 1.0)


def min_max_normalize(scores) -> np.ndarray:
    """Affinely map scores onto [0, 1]; a constant vector maps to all ones."""
    x = as_score_vector(scores)
    lo = x.min()
    hi = x.max()
    if hi == lo:
        return np.ones_like(x)
    return (x - lo) / (hi - lo)


def stable_argsort_desc(scores) -> np.ndarray:
    """Indices by descending score, ties broken by ascending index."""
    x = as_score_vector(scores)
    # negation keeps the stable sort's ascending-index order among equal keys
    return np.argsort(-x, kind="stable")
