"""False discovery rate smoothing over graphs (Python bindings)."""

from ._core import (
    DiscoveryReport,
    EstimationError,
    NullDensity,
    PathFailureError,
    SiteGraph,
    TwoGroupsFit,
    __version__,
    admm_solve,
    bh,
    bh_from_p_values,
    count_plateaus,
    discoveries_at_fdr,
    fit,
    fit_empirical_null,
    fit_two_groups,
    grid_graph,
    information_criteria,
    prior_image,
    simulate,
    solution_path,
    theoretical_null,
    two_groups_report,
)

__all__ = [
    "DiscoveryReport",
    "EstimationError",
    "NullDensity",
    "PathFailureError",
    "SiteGraph",
    "TwoGroupsFit",
    "__version__",
    "admm_solve",
    "bh",
    "bh_from_p_values",
    "count_plateaus",
    "discoveries_at_fdr",
    "fit",
    "fit_empirical_null",
    "fit_two_groups",
    "grid_graph",
    "information_criteria",
    "prior_image",
    "simulate",
    "solution_path",
    "theoretical_null",
    "two_groups_report",
]
