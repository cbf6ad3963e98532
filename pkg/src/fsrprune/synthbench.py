"""Synthetic clustered scenes, simple baselines, and quality/throughput measurements.

A scene is a set of Gaussian token clusters around unit-sphere centers. Some
clusters are *salient*: the [CLS] attention of every head is a softmax over
each token's cosine similarity to its closest salient center, divided by a
temperature (lower temperature = more concentrated attention). The query
embedding is exactly the first salient center.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import FSRError, PruneConfig, as_index_set, stable_argsort_desc, unit_rows
from .focus import AttentionInput, compute_saliency, select_focus
from .pipeline import PruneResult, prune, retained_priority_mass
from .scan import conditional_context_sampling, coverage_radius, optimal_covering_radius

CSV_FIELDS = (
    "seed", "method", "K", "coverage_radius", "retained_priority_mass",
    "cluster_recall", "k_f", "k_s", "micros",
)
METHODS = ("fsr", "topk_attention", "fps_only")


@dataclass(frozen=True)
class SyntheticScene:
    tokens: np.ndarray
    attn: AttentionInput
    query: np.ndarray
    labels: np.ndarray
    salient_clusters: np.ndarray
    centers: np.ndarray
    seed: int

    @property
    def n_tokens(self) -> int:
        return self.tokens.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class QualityMetrics:
    coverage_radius: float
    retained_priority_mass: float
    cluster_recall: float
    focus_scan_split: tuple[int, int] | None


def generate_scene(
    n_clusters: int,
    tokens_per_cluster: int,
    d: int,
    salient_fraction: float,
    noise_sigma: float,
    seed: int,
    *,
    n_heads: int = 4,
    temperature: float = 0.1,
    head_jitter: float = 0.05,
) -> SyntheticScene:
    if min(n_clusters, tokens_per_cluster, d, n_heads) < 1:
        raise FSRError("cluster, token, dimension and head counts must all be >= 1")
    if not (0.0 < salient_fraction <= 1.0):
        raise FSRError(f"salient_fraction must lie in (0, 1], got {salient_fraction}")
    if noise_sigma < 0 or temperature <= 0 or head_jitter < 0:
        raise FSRError("noise_sigma and head_jitter must be >= 0, temperature > 0")

    rng = np.random.default_rng(seed)
    centers = unit_rows(rng.standard_normal((n_clusters, d)))
    n_salient = min(n_clusters, max(1, round(salient_fraction * n_clusters)))
    salient = np.sort(rng.permutation(n_clusters)[:n_salient])
    labels = np.repeat(np.arange(n_clusters), tokens_per_cluster)
    noise = rng.standard_normal((labels.size, d))
    tokens = centers[labels] + noise_sigma * noise

    closeness = (unit_rows(tokens) @ centers[salient].T).max(axis=1)
    logits = closeness[None, :] / temperature + head_jitter * rng.standard_normal((n_heads, labels.size))
    logits -= logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    cls_rows = weights / weights.sum(axis=1, keepdims=True)

    return SyntheticScene(
        tokens=tokens,
        attn=AttentionInput.from_cls_rows(cls_rows),
        query=centers[salient[0]].copy(),
        labels=labels,
        salient_clusters=salient,
        centers=centers,
        seed=int(seed),
    )


def scene_phi(scene: SyntheticScene, config: PruneConfig | None = None) -> np.ndarray:
    """Fused priorities of a scene under ``config`` (defaults if omitted)."""
    if config is None:
        config = PruneConfig(budget_K=scene.n_tokens)
    return select_focus(scene.tokens, scene.attn, scene.query, config).phi


def baseline_topk_attention(scene: SyntheticScene, K: int) -> np.ndarray:
    """The K most attended tokens, nothing else."""
    if K < 1:
        raise FSRError(f"K must be >= 1, got {K}")
    order = stable_argsort_desc(compute_saliency(scene.attn))
    return np.sort(order[: min(K, scene.n_tokens)])


def baseline_fps_only(scene: SyntheticScene, K: int) -> np.ndarray:
    """Plain farthest-point sampling from token 0 under cosine distance, K picks in total."""
    if K < 1:
        raise FSRError(f"K must be >= 1, got {K}")
    K = min(K, scene.n_tokens)
    scan = conditional_context_sampling(scene.tokens, [0], K - 1)
    return np.sort(np.concatenate([[0], scan.selection_order]))


def evaluate(scene: SyntheticScene, kept, phi: np.ndarray | None = None) -> QualityMetrics:
    split = None
    if isinstance(kept, PruneResult):
        split = (kept.stats.k_f, kept.stats.k_s)
        kept = kept.kept_indices
    kept = as_index_set(kept, scene.n_tokens)
    if kept.size == 0:
        raise FSRError("cannot evaluate an empty selection")
    if phi is None:
        phi = scene_phi(scene)
    return QualityMetrics(
        coverage_radius=coverage_radius(scene.tokens, kept),
        retained_priority_mass=retained_priority_mass(phi, kept),
        cluster_recall=np.unique(scene.labels[kept]).size / scene.n_clusters,
        focus_scan_split=split,
    )


def run_method(scene: SyntheticScene, method: str, K: int, config: PruneConfig | None = None):
    if method == "fsr":
        cfg = config or PruneConfig(budget_K=K)
        return prune(scene.tokens, scene.attn, scene.query, cfg)
    if method == "topk_attention":
        return baseline_topk_attention(scene, K)
    if method == "fps_only":
        return baseline_fps_only(scene, K)
    raise FSRError(f"unknown method {method!r}")


def quality_trials(
    seeds,
    *,
    n_clusters: int = 3,
    tokens_per_cluster: int = 32,
    d: int = 16,
    salient_fraction: float = 1 / 3,
    noise_sigma: float = 0.3,
    budget_fraction: float = 0.25,
    methods=METHODS,
    temperature: float = 0.1,
) -> list[dict]:
    """One row per (seed, method): the metrics of that method on that seed's scene."""
    rows = []
    for seed in seeds:
        scene = generate_scene(n_clusters, tokens_per_cluster, d, salient_fraction,
                               noise_sigma, seed, temperature=temperature)
        K = max(1, int(round(budget_fraction * scene.n_tokens)))
        phi = scene_phi(scene)
        for method in methods:
            start = time.perf_counter()
            out = run_method(scene, method, K)
            micros = (time.perf_counter() - start) * 1e6
            m = evaluate(scene, out, phi)
            k_f, k_s = m.focus_scan_split or ("", "")
            rows.append({
                "seed": int(seed), "method": method, "K": K,
                "coverage_radius": m.coverage_radius,
                "retained_priority_mass": m.retained_priority_mass,
                "cluster_recall": m.cluster_recall,
                "k_f": k_f, "k_s": k_s, "micros": round(micros, 1),
            })
    return rows


def summarize(rows: list[dict]) -> dict:
    """Per-method means of the quality metrics."""
    out: dict[str, dict] = {}
    for method in dict.fromkeys(r["method"] for r in rows):
        sel = [r for r in rows if r["method"] == method]
        out[method] = {
            "trials": len(sel),
            **{key: statistics.fmean(r[key] for r in sel)
               for key in ("coverage_radius", "retained_priority_mass", "cluster_recall", "micros")},
        }
    return out


def format_table(summary: dict) -> str:
    header = f"{'method':<16}{'trials':>7}{'recall':>10}{'mass':>10}{'radius':>10}{'micros':>11}"
    lines = [header, "-" * len(header)]
    for method, s in summary.items():
        lines.append(
            f"{method:<16}{s['trials']:>7}{s['cluster_recall']:>10.4f}"
            f"{s['retained_priority_mass']:>10.4f}{s['coverage_radius']:>10.4f}{s['micros']:>11.1f}"
        )
    return "\n".join(lines)


def write_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def write_summary(summary: dict, path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def mean_focus_budget(seeds, K: int, **scene_kwargs) -> float:
    """Mean K_F of a full prune over scenes generated from ``seeds``."""
    config = PruneConfig(budget_K=K)
    values = []
    for seed in seeds:
        scene = generate_scene(seed=seed, **scene_kwargs)
        values.append(select_focus(scene.tokens, scene.attn, scene.query, config).k_f)
    return statistics.fmean(values)


def random_instance(n: int, d: int, rng: np.random.Generator, n_heads: int = 4):
    """Unstructured tokens, positive [CLS] attention rows and a query vector."""
    tokens = rng.standard_normal((n, d))
    attn = AttentionInput.from_cls_rows(rng.dirichlet(np.ones(n), size=n_heads))
    query = rng.standard_normal(d)
    return tokens, attn, query


def _median_seconds(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def bench_throughput(n_list, d_list, K_list, repeats: int = 5, seed: int = 0) -> list[dict]:
    """Median wall-clock time of one prune call for every (N, d, K) combination."""
    rows = []
    for n in n_list:
        for d in d_list:
            for K in K_list:
                rng = np.random.default_rng([seed, n, d, K])
                tokens, attn, query = random_instance(n, d, rng)
                config = PruneConfig(budget_K=K)
                prune(tokens, attn, query, config)  # warm-up
                t = _median_seconds(lambda: prune(tokens, attn, query, config), repeats)
                rows.append({"n": n, "d": d, "K": K, "repeats": repeats, "median_ms": t * 1e3})
    return rows


def scan_scaling(n: int, d: int, k_s: int, repeats: int = 7, seed: int = 0) -> dict:
    """Time the scan stage at N and 2N with the same single-token focus set and K_S."""
    rng = np.random.default_rng(seed)
    big = rng.standard_normal((2 * n, d))
    small = big[:n]
    conditional_context_sampling(small, [0], k_s)
    t_small = _median_seconds(lambda: conditional_context_sampling(small, [0], k_s), repeats)
    t_big = _median_seconds(lambda: conditional_context_sampling(big, [0], k_s), repeats)
    return {"n": n, "d": d, "k_s": k_s, "small_ms": t_small * 1e3,
            "large_ms": t_big * 1e3, "ratio": t_big / t_small}


def oracle_trials(n: int, d: int, budget: int, trials: int, seed: int,
                  focus_size: int | None = None, rho: float = 0.9) -> dict:
    """Compare the greedy covering radius against the exhaustive optimum on random instances.

    The focus set comes from the regular Stage I scoring: the dynamic size under
    ``rho`` capped at ``budget``, or the top ``focus_size`` tokens when given.
    """
    if focus_size is not None and not (1 <= focus_size <= budget):
        raise FSRError(f"focus_size must lie in [1, {budget}]")
    if budget > n:
        raise FSRError(f"budget {budget} exceeds n={n}")
    ratios = []
    worst = {"ratio": -1.0}
    violations_2 = violations_4 = trivial = 0
    for t in range(trials):
        rng = np.random.default_rng(seed + t)
        tokens, attn, query = random_instance(n, d, rng)
        config = PruneConfig(budget_K=budget, rho=rho)
        focus = select_focus(tokens, attn, query, config)
        f = focus.focus_set if focus_size is None else np.sort(focus.permutation[:focus_size])
        k_s = budget - f.size
        if k_s == 0:
            trivial += 1
        scan = conditional_context_sampling(tokens, f, k_s)
        greedy = coverage_radius(tokens, np.concatenate([f, scan.scan_set]))
        optimum = optimal_covering_radius(tokens, f, k_s)
        ratio = 1.0 if greedy == optimum else (math.inf if optimum == 0 else greedy / optimum)
        ratios.append(ratio)
        violations_2 += greedy > 2 * optimum + 1e-12
        violations_4 += greedy > 4 * optimum + 1e-12
        if ratio > worst["ratio"]:
            worst = {"ratio": ratio, "trial": t, "seed": seed + t, "greedy": greedy, "optimum": optimum}
    return {
        "trials": trials,
        "trivial": trivial,
        "max_ratio": max(ratios),
        "mean_ratio": statistics.fmean(ratios),
        "violations_factor_2": int(violations_2),
        "violations_factor_4": int(violations_4),
        "worst": worst,
    }

