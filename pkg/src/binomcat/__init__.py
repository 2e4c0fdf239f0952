"""Mean extinction times for colony growth under binomial catastrophes.

The package computes exact mean extinction times for a population whose
colonies grow at rate lam and are thinned binomially (per-individual
survival probability p) by rate-1 catastrophes, under three dispersion
rules for the survivors; certifies which strategy (dispersion or
non-dispersion) yields the longer expected lifetime across the (p, lam)
plane via rigorous interval brackets of the growth product
prod_{k>=0}(1 + lam p^k); and cross-validates everything with an
independent Monte Carlo simulator.
"""

from .comparator import (
    CertificationError,
    ComparisonResult,
    CrossingPair,
    IndeterminateBandError,
    NoCrossingError,
    OutOfRegimeError,
    Region,
    RegionPoint,
    Verdict,
    compare_d2,
    compare_d3,
    compare_free,
    find_crossings,
    scan_region,
    trace_crossings,
)
from .formulas import (
    MeanAboveOneError,
    OffspringPMF,
    SurvivorLaw,
    branching_mean_time_binary,
    branching_mean_time_geometric,
    branching_mean_time_ternary,
    count_surjections,
    label_distribution,
    mean_time_free,
    mean_time_no_dispersion,
    mean_time_tree2,
    mean_time_tree3,
    offspring_pmf,
    survivor_law,
    tree3_radical,
)
from .model import (
    FreeDispersion,
    InvalidParameterError,
    MeanExtinction,
    MeanKind,
    ModelParams,
    NoDispersion,
    Regime,
    Topology,
    TreeDispersion,
    classify,
    critical_survival,
)
from .qproduct import (
    CertifiedInterval,
    PreconditionViolatedError,
    TailBoundParams,
    product_bounds,
    product_bounds_tight,
    product_lower,
    product_via_log_series,
)
from .simulator import (
    SimConfig,
    SimEstimate,
    sample_offspring_counts,
    sample_survivor_counts,
    simulate,
    simulate_free,
    simulate_no_dispersion,
    simulate_tree,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "ModelParams", "NoDispersion", "TreeDispersion", "FreeDispersion", "Topology",
    "Regime", "MeanKind", "MeanExtinction", "classify", "critical_survival",
    "InvalidParameterError",
    # qproduct
    "CertifiedInterval", "TailBoundParams", "product_bounds", "product_bounds_tight",
    "product_lower", "product_via_log_series", "PreconditionViolatedError",
    # formulas
    "SurvivorLaw", "OffspringPMF", "survivor_law", "offspring_pmf",
    "count_surjections", "label_distribution", "tree3_radical",
    "mean_time_no_dispersion", "mean_time_tree2", "mean_time_tree3", "mean_time_free",
    "branching_mean_time_binary", "branching_mean_time_ternary",
    "branching_mean_time_geometric", "MeanAboveOneError",
    # comparator
    "Verdict", "ComparisonResult", "Region", "RegionPoint", "CrossingPair",
    "compare_d2", "compare_d3", "compare_free", "find_crossings", "trace_crossings",
    "scan_region", "OutOfRegimeError", "NoCrossingError", "IndeterminateBandError",
    "CertificationError",
    # simulator
    "SimConfig", "SimEstimate", "simulate", "simulate_no_dispersion", "simulate_tree",
    "simulate_free", "sample_survivor_counts", "sample_offspring_counts",
]
