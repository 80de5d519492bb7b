"""Parsing and validation of one run configuration from CLI-style tokens.

Both the ``run`` subcommand and suite matrix lines go through here, so a
matrix line and a ``run`` invocation with the same tokens build the same
configuration.
"""

from __future__ import annotations

import argparse
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import bench
from .core_model import RunResult
from .cutstore import DropKind
from .errors import InvalidConfig
from .methods_epigraph import EpiConfig, run_epigraph
from .methods_feasible import FeasibleConfig, run_feasible, run_projection
from .methods_joint import JointConfig, run_joint
from .monitor import InvariantMonitor
from .schedules import from_code

METHODS = ("1.1", "1.2", "1.3", "1.4", "2.1", "2.2", "2.3", "2.4", "3.1", "3.2", "3.3")
B_DROPS = {"b1": DropKind.KEEP_ALL, "b2": DropKind.ACTIVE_ONLY, "b3": DropKind.LAST_N_PLUS_1,
           "b4": DropKind.FULL_RESET}
D_DROPS = {"d1": DropKind.ACTIVE_ONLY, "d2": DropKind.LAST_N_PLUS_1, "d3": DropKind.FULL_RESET}
A_ALL = ("a1", "a2", "a3", "a4", "a5", "a6", "a7")
A_POSITIVE = A_ALL[1:]
A_PLAIN = A_ALL[:5]
C_ALL = ("c1", "c2", "c3", "c4")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def add_run_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--problem", required=True, choices=bench.PROBLEMS)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--eps", help="eps schedule code (a1-a7, or c1-c4 for epigraph methods)")
    p.add_argument("--delta", help="gap schedule code c1-c4 (joint methods)")
    p.add_argument("--drop", help="drop code b1-b4 (epigraph store for joint methods)")
    p.add_argument("--region-drop", help="region drop code d1-d3 (joint methods)")
    p.add_argument("--stop-eps", type=float, default=1e-5)
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--max-seconds", type=float, default=None)
    p.add_argument("--cut-mode", choices=("aggregate", "per-constraint"), default="aggregate")
    p.add_argument("--deepest-only", action="store_true")
    p.add_argument("--lambda", dest="level_lambda", type=float, default=0.5)
    p.add_argument("--eps-solution", type=float, default=0.01)
    p.add_argument("--eps0", type=float, default=None)
    p.add_argument("--delta0", type=float, default=None)
    p.add_argument("--point", default=None, help="comma-separated point to project (method 1.3)")


def run_parser(prog: str = "run") -> argparse.ArgumentParser:
    p = _Parser(prog=prog, add_help=False)
    add_run_arguments(p)
    return p


def _pick(code: Optional[str], allowed: Sequence[str], default: Optional[str], what: str, method: str):
    if code is None:
        return default
    code = code.lower()
    if code not in allowed:
        raise InvalidConfig(f"{what} code {code!r} is not valid for method {method}; "
                            f"allowed: {', '.join(allowed) if allowed else 'none'}")
    return code


@dataclass
class RunSpec:
    method: str
    problem: str
    n: int
    eps: Optional[str]
    delta: Optional[str]
    drop: Optional[str]
    region_drop: Optional[str]
    stop_eps: float
    max_iters: int
    max_seconds: Optional[float]
    cut_mode: str
    deepest_only: bool
    level_lambda: float
    eps_solution: float
    eps0: Optional[float]
    delta0: Optional[float]
    point: Optional[np.ndarray]

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], suite: bool = False) -> "RunSpec":
        ns = run_parser().parse_args(list(tokens))
        return cls.from_namespace(ns, suite=suite)

    @classmethod
    def from_namespace(cls, ns, suite: bool = False) -> "RunSpec":
        m = ns.method
        family = m[0]
        if ns.stop_eps <= 0 or ns.max_iters < 1:
            raise InvalidConfig("stop-eps must be positive and max-iters at least 1")
        if suite and ns.max_seconds is None:
            ns.max_seconds = 60.0
        try:
            bench._check(ns.problem, ns.n)
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from exc
        if family == "1" and ns.problem != "p15":
            raise InvalidConfig(f"method {m} needs a linear objective with constraints (problem p15)")
        if family == "2" and ns.problem != "p25":
            raise InvalidConfig(f"method {m} needs a box-constrained problem (problem p25)")

        eps = delta = drop = rdrop = None
        if m in ("1.1", "1.2", "1.4"):
            eps = _pick(ns.eps, A_ALL, "a1", "eps", m)
            drop = _pick(ns.drop, tuple(B_DROPS), "b1", "drop", m)
            delta = _pick(ns.delta, (), None, "delta", m)
            rdrop = _pick(ns.region_drop, (), None, "region drop", m)
        elif m == "1.3":
            eps = _pick(ns.eps, A_POSITIVE, "a4", "eps", m)
            drop = _pick(ns.drop, ("b4",), "b4", "drop", m)
            delta = _pick(ns.delta, (), None, "delta", m)
            rdrop = _pick(ns.region_drop, (), None, "region drop", m)
        elif family == "2":
            eps = _pick(ns.eps, A_PLAIN + C_ALL, "a1", "eps", m)
            drop = _pick(ns.drop, tuple(B_DROPS), "b1", "drop", m)
            delta = _pick(ns.delta, (), None, "delta", m)
            rdrop = _pick(ns.region_drop, (), None, "region drop", m)
        elif m == "3.1":
            # nested variant: codes are accepted for table compatibility and unused
            eps = _pick(ns.eps, A_ALL, None, "eps", m)
            delta = _pick(ns.delta, C_ALL, None, "delta", m)
            drop = _pick(ns.drop, tuple(B_DROPS), None, "drop", m)
            rdrop = _pick(ns.region_drop, tuple(D_DROPS), None, "region drop", m)
        elif m == "3.2":
            eps = _pick(ns.eps, A_POSITIVE[:4] + C_ALL, "a4", "eps", m)
            drop = _pick(ns.drop, tuple(B_DROPS), "b1", "drop", m)
            delta = _pick(ns.delta, (), None, "delta", m)
            rdrop = _pick(ns.region_drop, (), None, "region drop", m)
        else:
            eps = _pick(ns.eps, A_POSITIVE, "a4", "eps", m)
            delta = _pick(ns.delta, C_ALL, "c4", "delta", m)
            drop = _pick(ns.drop, tuple(B_DROPS), "b1", "drop", m)
            rdrop = _pick(ns.region_drop, tuple(D_DROPS), "d1", "region drop", m)
        for code in (eps, delta):
            if code in ("a5", "c3") and ns.n < 2:
                raise InvalidConfig(f"code {code} divides by n and needs n >= 2")

        point = None
        if ns.point is not None:
            if m != "1.3":
                raise InvalidConfig("--point only applies to method 1.3")
            try:
                point = np.array([float(t) for t in ns.point.split(",")])
            except ValueError as exc:
                raise InvalidConfig(f"malformed --point {ns.point!r}") from exc
            if point.size != ns.n:
                raise InvalidConfig("--point dimension differs from --n")
        if not 0.0 < ns.level_lambda < 1.0:
            raise InvalidConfig("--lambda must lie in (0, 1)")
        if ns.eps_solution <= 0:
            raise InvalidConfig("--eps-solution must be positive")
        return cls(m, ns.problem, ns.n, eps, delta, drop, rdrop, ns.stop_eps, ns.max_iters,
                   ns.max_seconds, ns.cut_mode, ns.deepest_only, ns.level_lambda, ns.eps_solution,
                   ns.eps0, ns.delta0, point)

    @property
    def eps_label(self) -> str:
        return "/".join(c for c in (self.eps, self.delta) if c)

    @property
    def drop_label(self) -> str:
        return "/".join(c for c in (self.region_drop, self.drop) if c)

    def f_star(self) -> float:
        if self.method == "1.3":
            return math.nan
        return bench.oracle_optimum(self.problem, self.n)[0]

    def monitor(self) -> InvariantMonitor:
        f_star, x_star = bench.oracle_optimum(self.problem, self.n)
        mu = 1.0 / self.n**2 if self.problem == "p15" else (1.0 if self.problem == "p25" else None)
        return InvariantMonitor(x_star, f_star, mu=mu)


def execute(spec: RunSpec, monitor: Optional[InvariantMonitor] = None) -> RunResult:
    problem = bench.make_problem(spec.problem, spec.n)
    n = spec.n
    eps = from_code(spec.eps, n, spec.eps0) if spec.eps else None
    common = dict(max_iters=spec.max_iters, stop_eps=spec.stop_eps, max_seconds=spec.max_seconds)
    m = spec.method
    if m == "1.3":
        y = spec.point if spec.point is not None else np.full(n, 2.0)
        return run_projection(problem, y, eps, spec.stop_eps, spec.max_iters, monitor, spec.max_seconds)
    if m[0] == "1":
        variant = {"1.1": "M1_1", "1.2": "M1_2", "1.4": "M1_4"}[m]
        mode = "aggregate_F" if spec.cut_mode == "aggregate" else "per_constraint"
        cfg = FeasibleConfig(variant, eps, B_DROPS[spec.drop], mode, spec.deepest_only, **common)
        return run_feasible(problem, cfg, monitor)
    if m[0] == "2":
        cfg = EpiConfig("M2_" + m[2], eps, B_DROPS[spec.drop], level_lambda=spec.level_lambda,
                        eps_solution=spec.eps_solution, **common)
        return run_epigraph(problem, cfg, monitor)
    delta = from_code(spec.delta, n, spec.delta0) if spec.delta else from_code("c4", n)
    if eps is None:
        eps = from_code("a4", n)
    cfg = JointConfig(
        "M3_" + m[2],
        eps,
        delta,
        D_DROPS[spec.region_drop] if spec.region_drop else DropKind.KEEP_ALL,
        B_DROPS[spec.drop] if spec.drop else DropKind.KEEP_ALL,
        **common,
    )
    return run_joint(problem, cfg, monitor)
