"""Training-free Focus-Scan-Refine token pruning."""

from .core import (
    DimensionError,
    FSRError,
    PruneConfig,
    cosine_distance,
    cosine_similarity,
    min_max_normalize,
    stable_argsort_desc,
)
from .focus import (
    AttentionInput,
    FocusResult,
    compute_relevance,
    compute_saliency,
    compute_saliency_cls,
    compute_saliency_selfattn,
    dynamic_focus_budget,
    fuse_normalized,
    fuse_priorities,
    select_focus,
)
from .pipeline import PruneResult, PruneStats, explain, format_report, prune, result_to_document
from .refine import RefineAssignment, RefinedTokens, assign_nearest_anchor, select_top_m, weighted_merge
from .scan import (
    CoverageReport,
    ScanResult,
    conditional_context_sampling,
    coverage_radius,
    min_distance_to_set,
    optimal_covering_radius,
)
from .tensor_io import read_tensor, write_tensor

__version__ = "0.1.0"
