"""Cutting-plane methods with cut dropping for convex nonsmooth problems."""

from .core_model import (
    Box,
    FunctionOracle,
    ProblemInstance,
    RunResult,
    SimpleRegion,
    Status,
    TraceRecord,
    eval_max,
    violated_indices,
)
from .cutstore import Cut, CutSource, CutStore, DropKind, active_cuts, apply_drop, lp_minimize, qp_project
from .schedules import Schedule
from .errors import (
    EmptyLevelSet,
    Infeasible,
    InvalidConfig,
    MaxBisections,
    MissingContext,
    ZeroSubgradient,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "Cut",
    "CutSource",
    "CutStore",
    "DropKind",
    "EmptyLevelSet",
    "FunctionOracle",
    "Infeasible",
    "InvalidConfig",
    "MaxBisections",
    "MissingContext",
    "ProblemInstance",
    "RunResult",
    "Schedule",
    "SimpleRegion",
    "Status",
    "TraceRecord",
    "ZeroSubgradient",
    "active_cuts",
    "apply_drop",
    "eval_max",
    "lp_minimize",
    "qp_project",
    "violated_indices",
]
