"""Market clearing for multi-interval dispatch with SoC-dependent storage bids."""

from __future__ import annotations

from .cost import ConvexCostCuts, Trajectory, convex_cost, epigraph_cuts, stage_cost, trajectory_cost
from .dispatch import (
    DispatchResult,
    ExactnessReport,
    Verdict,
    build_dispatch_lp,
    check_exactness,
    compute_lmps,
    solve_dispatch,
)
from .edcr_fit import FitSpec, fit_edcr, fit_report
from .lp import LinearProgram, LpSolution, LpStatus, solve_lp
from .model import BidCurve, StorageAsset, edcr_residuals, segment_index, validate_bid
from .network import Case, Generator, Network, load_case, validate_case
from .oracle import GridSpec, brute_force_dispatch, random_feasible_trajectory, run_theorem1_sweep

__version__ = "0.1.0"

__all__ = [
    "BidCurve",
    "Case",
    "ConvexCostCuts",
    "DispatchResult",
    "ExactnessReport",
    "FitSpec",
    "Generator",
    "GridSpec",
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "Network",
    "StorageAsset",
    "Trajectory",
    "Verdict",
    "brute_force_dispatch",
    "build_dispatch_lp",
    "check_exactness",
    "compute_lmps",
    "convex_cost",
    "edcr_residuals",
    "epigraph_cuts",
    "fit_edcr",
    "fit_report",
    "load_case",
    "random_feasible_trajectory",
    "run_theorem1_sweep",
    "segment_index",
    "solve_dispatch",
    "solve_lp",
    "stage_cost",
    "trajectory_cost",
    "validate_bid",
    "validate_case",
]
