"""Problem representation: function oracles, max-aggregation and run results."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

TOL_ACTIVE = 1e-8


def as_point(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr


@dataclass(frozen=True)
class FunctionOracle:
    """A convex function with one selected subgradient per point.

    ``linear`` is set when the function is affine ``<linear, x> + offset``;
    the region-approximation runners need that to pose their LP subproblems.
    """

    value: Callable[[np.ndarray], float]
    subgradient: Callable[[np.ndarray], np.ndarray]
    mu: float = 0.0
    lipschitz: Optional[float] = None
    linear: Optional[np.ndarray] = None
    offset: float = 0.0
    name: str = ""

    def __call__(self, x) -> float:
        return float(self.value(as_point(x)))

    def grad(self, x) -> np.ndarray:
        return np.asarray(self.subgradient(as_point(x)), dtype=float)

    @staticmethod
    def affine(cost, offset: float = 0.0, name: str = "") -> "FunctionOracle":
        c = np.array(cost, dtype=float)
        return FunctionOracle(
            value=lambda x: float(c @ x) + offset,
            subgradient=lambda x: c.copy(),
            lipschitz=float(np.linalg.norm(c)),
            linear=c,
            offset=offset,
            name=name,
        )


def max_oracle(pieces: Sequence[FunctionOracle], name: str = "max") -> FunctionOracle:
    """Pointwise maximum; the subgradient comes from the lowest-index maximizer."""
    pieces = list(pieces)

    def value(x):
        return max(p(x) for p in pieces)

    def subgradient(x):
        vals = [p(x) for p in pieces]
        top = max(vals)
        cut = top - TOL_ACTIVE * (abs(top) + 1.0)
        for p, v in zip(pieces, vals):
            if v >= cut:
                return p.grad(x)
        raise AssertionError("unreachable")

    mus = [p.mu for p in pieces]
    return FunctionOracle(value=value, subgradient=subgradient, mu=min(mus) if mus else 0.0, name=name)


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lower)
        hi = as_point(self.upper)
        if lo.shape != hi.shape:
            raise ValueError("box bounds differ in dimension")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @staticmethod
    def cube(n: int, lo: float, hi: float) -> "Box":
        return Box(np.full(n, float(lo)), np.full(n, float(hi)))

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x, tol: float = 0.0) -> bool:
        x = as_point(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def intersect(self, other: "Box") -> "Box":
        return Box(np.maximum(self.lower, other.lower), np.minimum(self.upper, other.upper))


@dataclass(frozen=True)
class SimpleRegion:
    """Box plus optional linear inequalities ``A x <= b``."""

    box: Box
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None

    def rows(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.box.dim
        if self.A is None:
            return np.zeros((0, n)), np.zeros(0)
        return np.atleast_2d(np.asarray(self.A, dtype=float)), np.asarray(self.b, dtype=float).reshape(-1)


@dataclass
class ProblemInstance:
    objective: FunctionOracle
    constraints: list[FunctionOracle]
    box_M0: Box
    simple_region: Optional[SimpleRegion] = None
    # one anchor per constraint, strictly inside that constraint's set
    interior_points: Optional[list[np.ndarray]] = None
    # a point (x, gamma) with gamma > f(x)
    epi_anchor: Optional[np.ndarray] = None
    optimum_hint: Optional[tuple[float, np.ndarray]] = None
    objective_pieces: Optional[list[FunctionOracle]] = None
    gamma0_bar: float = -1e6
    alpha_lower: Optional[float] = None
    mu: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        self.constraint_max = max_oracle(self.constraints, "F") if self.constraints else None
        if self.interior_points is not None:
            pts = [as_point(v) for v in self.interior_points]
            if len(pts) == 1 and len(self.constraints) > 1:
                pts = pts * len(self.constraints)
            if len(pts) != len(self.constraints):
                raise ValueError("need one interior point per constraint")
            for j, (v, fj) in enumerate(zip(pts, self.constraints)):
                if not self.box_M0.contains(v):
                    raise ValueError(f"interior point {j} lies outside the bounding cube")
                if not fj(v) < 0:
                    raise ValueError(f"interior point {j} is not strictly inside constraint {j}")
            self.interior_points = pts

    @property
    def n(self) -> int:
        return self.box_M0.dim

    def pieces(self) -> list[FunctionOracle]:
        return list(self.objective_pieces) if self.objective_pieces else [self.objective]

    def feasibility(self, x) -> float:
        """F(x), or -inf when there are no functional constraints."""
        return eval_max(self, x)[0]


def eval_max(problem: ProblemInstance, x) -> tuple[float, frozenset[int]]:
    """Value of F = max_j f_j at x and the (0-based) indices within tolerance of it."""
    x = as_point(x)
    if x.size != problem.n:
        raise ValueError(f"point has dimension {x.size}, problem has {problem.n}")
    if not problem.constraints:
        return -math.inf, frozenset()
    vals = [fj(x) for fj in problem.constraints]
    top = max(vals)
    cut = top - TOL_ACTIVE * (abs(top) + 1.0)
    return top, frozenset(j for j, v in enumerate(vals) if v >= cut)


def violated_indices(problem: ProblemInstance, x, eps: float = 0.0) -> frozenset[int]:
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    x = as_point(x)
    return frozenset(j for j, fj in enumerate(problem.constraints) if fj(x) > eps)


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    ITER_LIMIT = "IterLimit"
    ABORTED = "Aborted"


@dataclass
class TraceRecord:
    i: int
    f: float
    F: float
    gamma: float
    cuts_region: int
    cuts_epi: int
    refresh: bool
    beta: float = math.nan
    level: float = math.nan

    def line(self) -> str:
        return (
            f"{self.i} {self.f:.12g} {self.F:.12g} {self.gamma:.12g} "
            f"{self.cuts_region} {self.cuts_epi} {int(self.refresh)}"
        )


@dataclass
class RunResult:
    final_point: np.ndarray
    final_value: float
    feasibility_residual: float
    iterations: int
    refresh_count: int
    status: Status
    trace: list[TraceRecord] = field(default_factory=list)
    lower_bound: float = math.nan
    eps_solution: bool = False
    message: str = ""

    @property
    def gap(self) -> float:
        return self.final_value - self.lower_bound
