"""Stage I: dual-pathway priority scores and the dynamically sized focus set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DimensionError,
    FSRError,
    PruneConfig,
    SaliencyMode,
    as_score_vector,
    as_token_matrix,
    cosine_to,
    min_max_normalize,
    stable_argsort_desc,
    unit_rows,
)


@dataclass(frozen=True)
class AttentionInput:
    """Precomputed attention statistics for one image.

    In ``cls_attention`` mode ``data`` is H x N: row h holds head h's attention
    from the [CLS] token to each visual token. In ``self_attention_aggregate``
    mode ``data`` is an already head-averaged N x N map among visual tokens.
    """

    mode: SaliencyMode
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if self.mode == "cls_attention":
            if arr.ndim == 1:
                arr = arr[None, :]
            if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
                raise DimensionError(f"cls attention must be H x N, got shape {arr.shape}")
        elif self.mode == "self_attention_aggregate":
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
                raise DimensionError(f"self attention must be square N x N, got shape {arr.shape}")
        else:
            raise FSRError(f"unknown attention mode {self.mode!r}")
        if not np.all(np.isfinite(arr)):
            raise FSRError("attention contains non-finite values")
        if np.any(arr < 0):
            raise FSRError("attention entries must be nonnegative")
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_cls_rows(cls, rows) -> "AttentionInput":
        return cls("cls_attention", rows)

    @classmethod
    def from_self_attention(cls, matrix) -> "AttentionInput":
        return cls("self_attention_aggregate", matrix)

    @property
    def n_tokens(self) -> int:
        return self.data.shape[1]

    @property
    def n_heads(self) -> int:
        return self.data.shape[0] if self.mode == "cls_attention" else 1


@dataclass(frozen=True)
class FocusResult:
    phi: np.ndarray
    permutation: np.ndarray
    k_f: int
    focus_set: np.ndarray
    saliency: np.ndarray
    relevance: np.ndarray | None
    k_f_uncapped: int


def compute_saliency_cls(attn: AttentionInput) -> np.ndarray:
    """Mean over heads of the [CLS] attention each token receives."""
    if attn.mode != "cls_attention":
        raise FSRError(f"expected cls_attention input, got {attn.mode}")
    return attn.data.mean(axis=0)


def compute_saliency_selfattn(attn: AttentionInput) -> np.ndarray:
    """Column mean of the self-attention map, i.e. attention received per token."""
    if attn.mode != "self_attention_aggregate":
        raise FSRError(f"expected self_attention_aggregate input, got {attn.mode}")
    return attn.data.mean(axis=0)


def compute_saliency(attn: AttentionInput) -> np.ndarray:
    if attn.mode == "cls_attention":
        return compute_saliency_cls(attn)
    return compute_saliency_selfattn(attn)


def compute_relevance(tokens, query) -> np.ndarray:
    """Cosine similarity of every token to the query embedding."""
    tokens = as_token_matrix(tokens)
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.size != tokens.shape[1]:
        raise DimensionError(f"query has dimension {q.size}, tokens have {tokens.shape[1]}")
    if not np.all(np.isfinite(q)):
        raise FSRError("query contains non-finite values")
    qn = np.linalg.norm(q)
    if qn == 0.0:
        raise FSRError("query embedding has zero norm")
    return cosine_to(unit_rows(tokens), q / qn)


def fuse_normalized(r_hat, s_hat, alpha: float, beta: float) -> np.ndarray:
    """phi = r_hat**alpha * s_hat**beta on already normalized scores (0**0 == 1).

    ``r_hat`` may be None, in which case the relevance factor is 1.
    """
    if alpha < 0 or beta < 0:
        raise FSRError(f"exponents must be nonnegative, got alpha={alpha}, beta={beta}")
    s_hat = as_score_vector(s_hat)
    phi = np.power(s_hat, beta)
    if r_hat is not None:
        r_hat = as_score_vector(r_hat, s_hat.size)
        phi = np.power(r_hat, alpha) * phi
    return phi


def fuse_priorities(r, s, alpha: float, beta: float) -> np.ndarray:
    """Min-max normalize raw relevance ``r`` and saliency ``s``, then fuse them."""
    if alpha < 0 or beta < 0:
        raise FSRError(f"exponents must be nonnegative, got alpha={alpha}, beta={beta}")
    s_hat = min_max_normalize(s)
    r_hat = None
    if r is not None:
        r_hat = min_max_normalize(as_score_vector(r, s_hat.size))
    return fuse_normalized(r_hat, s_hat, alpha, beta)


def focus_budget_uncapped(phi, rho: float) -> int:
    """Smallest k whose top-k prefix holds at least rho of the total mass.

    The total is the last entry of the same sequential prefix sum, so rho = 1
    is always reachable. Returns 1 when the mass is zero.
    """
    phi = as_score_vector(phi)
    if np.any(phi < 0):
        raise FSRError("priorities must be nonnegative")
    if not (0.0 <= rho <= 1.0):
        raise FSRError(f"rho must lie in [0, 1], got {rho}")
    prefix = np.cumsum(phi[stable_argsort_desc(phi)])
    total = prefix[-1]
    if total == 0.0:
        return 1
    return int(np.argmax(prefix >= rho * total)) + 1


def dynamic_focus_budget(phi, rho: float, budget_K: int | None = None) -> int:
    k = focus_budget_uncapped(phi, rho)
    if budget_K is not None:
        k = min(k, int(budget_K))
    return k


def select_focus(tokens, attn: AttentionInput, query=None, config: PruneConfig | None = None) -> FocusResult:
    """Score every token and keep the top-priority prefix as the focus set."""
    tokens = as_token_matrix(tokens)
    if config is None:
        raise FSRError("a PruneConfig is required")
    n = tokens.shape[0]
    if attn.mode != config.saliency_mode:
        raise FSRError(f"attention mode {attn.mode} does not match config saliency_mode {config.saliency_mode}")
    if attn.n_tokens != n:
        raise DimensionError(f"attention covers {attn.n_tokens} tokens, token matrix has {n}")

    saliency = compute_saliency(attn)
    relevance = None
    if config.relevance_mode == "query":
        if query is None:
            raise FSRError("relevance_mode='query' needs a query embedding")
        relevance = compute_relevance(tokens, query)

    phi = fuse_priorities(relevance, saliency, config.alpha, config.beta)
    order = stable_argsort_desc(phi)
    k_uncapped = focus_budget_uncapped(phi, config.rho)
    k_f = min(k_uncapped, config.budget_K, n)
    return FocusResult(
        phi=phi,
        permutation=order,
        k_f=k_f,
        focus_set=np.sort(order[:k_f]),
        saliency=saliency,
        relevance=relevance,
        k_f_uncapped=k_uncapped,
    )
