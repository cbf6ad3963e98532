"""Focus -> Scan -> Refine under a single token budget."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import FSRError, PruneConfig, as_token_matrix
from .focus import AttentionInput, FocusResult, select_focus
from .refine import RefinedTokens, assign_nearest_anchor, select_top_m, weighted_merge
from .scan import ScanResult, conditional_context_sampling, coverage_radius

FOCUS = "focus"
SCAN = "scan"


@dataclass(frozen=True)
class PruneStats:
    k_f: int
    k_s: int
    m: int
    coverage_radius: float | None
    retained_priority_mass: float


@dataclass(frozen=True)
class PruneResult:
    """Pruned tokens in ascending original order, with per-stage provenance.

    ``kept_vectors`` rows tagged ``"focus"`` are the input rows untouched;
    rows tagged ``"scan"`` are anchors after merging.
    """

    kept_indices: np.ndarray
    kept_vectors: np.ndarray
    origins: np.ndarray
    weights: np.ndarray
    stats: PruneStats
    config: PruneConfig
    focus: FocusResult = field(repr=False)
    scan: ScanResult = field(repr=False)
    refined: RefinedTokens | None = field(default=None, repr=False)

    @property
    def phi(self) -> np.ndarray:
        return self.focus.phi

    @property
    def focus_mask(self) -> np.ndarray:
        return self.origins == FOCUS


def retained_priority_mass(phi: np.ndarray, kept) -> float:
    """Share of the total priority mass held by the kept tokens (1.0 if there is no mass)."""
    total = math.fsum(phi.tolist())
    if total == 0.0:
        return 1.0
    return math.fsum(phi[np.asarray(kept, dtype=np.int64)].tolist()) / total


def prune(tokens, attn: AttentionInput, query=None, config: PruneConfig | None = None) -> PruneResult:
    """Select and refine exactly ``min(config.budget_K, N)`` tokens.

    A budget at or above N keeps every token unchanged: the focus set is still
    reported, all other tokens become scan anchors, and nothing is left to merge.
    """
    if config is None:
        raise FSRError("a PruneConfig is required")
    tokens = as_token_matrix(tokens)
    n = tokens.shape[0]
    budget = min(config.budget_K, n)

    focus = select_focus(tokens, attn, query, config)
    k_s = budget - focus.k_f
    scan = conditional_context_sampling(tokens, focus.focus_set, k_s)

    refined = None
    m = 0
    if scan.scan_set.size:
        taken = np.zeros(n, dtype=bool)
        taken[focus.focus_set] = True
        taken[scan.scan_set] = True
        discarded = np.flatnonzero(~taken)
        assignments = assign_nearest_anchor(discarded, scan.scan_set, tokens)
        d_top = select_top_m(assignments, config.kappa, scan.scan_set.size)
        m = int(d_top.size)
        refined = weighted_merge(scan.scan_set, d_top, assignments, focus.phi, tokens)

    kept = np.sort(np.concatenate([focus.focus_set, scan.scan_set]))
    is_focus = np.isin(kept, focus.focus_set)
    vectors = tokens[kept].copy()
    weights = focus.phi[kept].copy()
    if refined is not None:
        pos = np.searchsorted(kept, refined.anchors)
        vectors[pos] = refined.vectors
        weights[pos] = refined.weights

    radius = coverage_radius(tokens, kept) if config.compute_stats else None
    stats = PruneStats(
        k_f=focus.k_f,
        k_s=int(scan.scan_set.size),
        m=m,
        coverage_radius=radius,
        retained_priority_mass=retained_priority_mass(focus.phi, kept),
    )
    return PruneResult(
        kept_indices=kept,
        kept_vectors=vectors,
        origins=np.where(is_focus, FOCUS, SCAN),
        weights=weights,
        stats=stats,
        config=config,
        focus=focus,
        scan=scan,
        refined=refined,
    )


def _phi_summary(phi: np.ndarray, bins: int = 10) -> dict:
    counts, edges = np.histogram(phi, bins=bins, range=(0.0, 1.0))
    return {
        "n": int(phi.size),
        "min": float(phi.min()),
        "max": float(phi.max()),
        "mean": float(phi.mean()),
        "median": float(np.median(phi)),
        "mass": math.fsum(phi.tolist()),
        "histogram": {"edges": edges.tolist(), "counts": counts.tolist()},
    }


def result_to_document(result: PruneResult) -> dict:
    """JSON-ready description of a prune result (vectors excluded)."""
    s = result.stats
    return {
        "kept_indices": result.kept_indices.tolist(),
        "origins": result.origins.tolist(),
        "weights": result.weights.tolist(),
        "k_f": s.k_f,
        "k_s": s.k_s,
        "m": s.m,
        "coverage_radius": s.coverage_radius,
        "retained_priority_mass": s.retained_priority_mass,
        "config": result.config.as_dict(),
        "n_tokens": int(result.phi.size),
        "k_f_uncapped": result.focus.k_f_uncapped,
        "scan_order": result.scan.selection_order.tolist(),
        "gain_sequence": result.scan.gain_sequence.tolist(),
        "phi_summary": _phi_summary(result.phi),
    }


def explain(result: PruneResult | dict) -> dict:
    """Per-stage breakdown of a prune result or of a saved result document."""
    doc = result_to_document(result) if isinstance(result, PruneResult) else result
    k = len(doc["kept_indices"])
    report = {
        "budget": {
            "K": k,
            "k_f": doc["k_f"],
            "k_s": doc["k_s"],
            "identity_holds": doc["k_f"] + doc["k_s"] == k,
        },
        "focus": {
            "k_f": doc["k_f"],
            "k_f_uncapped": doc.get("k_f_uncapped"),
            "rho": doc["config"]["rho"],
            "phi": doc.get("phi_summary"),
        },
        "coverage_radius": doc["coverage_radius"],
        "retained_priority_mass": doc["retained_priority_mass"],
    }
    if doc["k_s"] == 0:
        report["scan"] = {"status": "skipped"}
        report["refine"] = {"status": "skipped"}
    else:
        report["scan"] = {
            "status": "ran",
            "k_s": doc["k_s"],
            "order": doc.get("scan_order"),
            "gain_sequence": doc.get("gain_sequence"),
        }
        report["refine"] = {"status": "ran" if doc["m"] else "no members", "m": doc["m"]}
    return report


def format_report(report: dict) -> str:
    b = report["budget"]
    lines = [
        f"budget   K={b['K']}  K_F={b['k_f']}  K_S={b['k_s']}  (K_F + K_S = K: {b['identity_holds']})",
    ]
    f = report["focus"]
    phi = f.get("phi")
    line = f"focus    K_F={f['k_f']} (uncapped {f['k_f_uncapped']}, rho={f['rho']})"
    if phi:
        line += f"  phi min={phi['min']:.4g} median={phi['median']:.4g} max={phi['max']:.4g} mass={phi['mass']:.4g}"
        lines.append(line)
        lines.append("         phi histogram " + " ".join(str(c) for c in phi["histogram"]["counts"]))
    else:
        lines.append(line)
    sc = report["scan"]
    if sc["status"] == "skipped":
        lines.append("scan     skipped")
    else:
        gains = sc.get("gain_sequence") or []
        shown = ", ".join(f"{g:.4g}" for g in gains[:8]) + (", ..." if len(gains) > 8 else "")
        lines.append(f"scan     K_S={sc['k_s']}  gains [{shown}]")
    rf = report["refine"]
    lines.append("refine   skipped" if rf["status"] == "skipped" else f"refine   M={rf['m']}")
    cr = report["coverage_radius"]
    lines.append("coverage radius " + ("n/a" if cr is None else f"{cr:.6g}"))
    lines.append(f"retained priority mass {report['retained_priority_mass']:.6g}")
    return "\n".join(lines)
