"""Feasible-region approximation: boundary cuts, subgradient cuts, the
candidate-selection variant, and projection onto an intersection of sets."""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .boundary import BoundaryHit, region_support_vector, segment_boundary_point
from .core_model import ProblemInstance, RunResult, Status, TraceRecord, as_point, eval_max, violated_indices
from .cutstore import Cut, CutSource, CutStore, DropKind, apply_drop, lp_minimize, qp_project
from .errors import CutplaneError, InvalidConfig
from .monitor import InvariantMonitor
from .schedules import Schedule, zero


class FeasibleVariant(str, enum.Enum):
    M1_1 = "M1_1"
    M1_2 = "M1_2"
    M1_4 = "M1_4"


class CutMode(str, enum.Enum):
    AGGREGATE = "aggregate_F"
    PER_CONSTRAINT = "per_constraint"


@dataclass
class FeasibleConfig:
    variant: FeasibleVariant = FeasibleVariant.M1_1
    schedule: Schedule = field(default_factory=zero)
    drop: DropKind = DropKind.KEEP_ALL
    cut_mode: CutMode = CutMode.AGGREGATE
    deepest_only: bool = False
    max_iters: int = 50_000
    stop_eps: float = 1e-5
    max_seconds: Optional[float] = None
    # replaces z_k = x_k at refresh events of the subgradient variant
    improver: Optional[Callable[[np.ndarray], np.ndarray]] = None
    workers: int = 1

    def __post_init__(self):
        self.variant = FeasibleVariant(self.variant)
        self.drop = DropKind(self.drop)
        self.cut_mode = CutMode(self.cut_mode)
        if self.max_iters < 1:
            raise InvalidConfig("max_iters must be at least 1")
        if not self.stop_eps > 0:
            raise InvalidConfig("stop_eps must be positive")


def _anchors(problem: ProblemInstance) -> list[np.ndarray]:
    if problem.interior_points is None:
        raise InvalidConfig("boundary cuts need an interior point for each constraint")
    return problem.interior_points


def _linear_cost(problem: ProblemInstance) -> np.ndarray:
    if problem.objective.linear is None:
        raise InvalidConfig("feasible-region methods need a linear objective")
    return problem.objective.linear


class _Clock:
    def __init__(self, limit: Optional[float]):
        self.limit = limit
        self.t0 = time.perf_counter()

    def expired(self) -> bool:
        return self.limit is not None and time.perf_counter() - self.t0 > self.limit


def _boundary_hits(problem, anchors, y, indices, monitor, i) -> dict[int, BoundaryHit]:
    hits = {}
    for j in sorted(indices):
        fj = problem.constraints[j]
        hits[j] = segment_boundary_point(fj, anchors[j], y)
        if monitor is not None:
            monitor.hit(i, hits[j])
    return hits


def _deepest(y, hits: dict[int, BoundaryHit]) -> int:
    best, best_d = -1, -1.0
    for j in sorted(hits):
        d = float(np.linalg.norm(y - hits[j].z))
        if d > best_d:
            best, best_d = j, d
    return best


def _support_cut(problem, j, hit, i) -> Cut:
    a = region_support_vector(problem.constraints[j], hit.z)
    return Cut.region(a, hit.z, i, CutSource.REGION_SUPPORT)


def _result(problem, point, status, i, refreshes, trace, message="") -> RunResult:
    point = as_point(point)
    F = problem.feasibility(point)
    return RunResult(
        final_point=point,
        final_value=problem.objective(point),
        feasibility_residual=max(F, 0.0) if math.isfinite(F) else 0.0,
        iterations=i,
        refresh_count=refreshes,
        status=status,
        trace=trace,
        message=message,
    )


def run_feasible(problem: ProblemInstance, cfg: FeasibleConfig,
                 monitor: Optional[InvariantMonitor] = None) -> RunResult:
    """Minimize a linear objective over {F <= 0} by region cuts with refreshes."""
    if cfg.variant is FeasibleVariant.M1_4:
        return _run_candidates(problem, cfg, monitor)
    cost = _linear_cost(problem)
    anchors = _anchors(problem) if cfg.variant is FeasibleVariant.M1_1 else None
    schedule = cfg.schedule.fresh()
    store = CutStore.region(problem.box_M0, problem.simple_region)
    clock = _Clock(cfg.max_seconds)
    trace: list[TraceRecord] = []
    basis = None
    refreshes = 0
    y = None
    for i in range(cfg.max_iters):
        try:
            lp = lp_minimize(store, cost, basis)
        except CutplaneError as exc:
            return _result(problem, y if y is not None else store.box.lower, Status.ABORTED, i, refreshes,
                           trace, f"{exc}\n{store.dump()}")
        basis = lp.basis
        y = lp.x
        F, _ = eval_max(problem, y)
        eps_k = schedule.current
        refresh = F <= eps_k
        trace.append(TraceRecord(i, lp.value, F, math.nan, len(store), 0, refresh))
        if monitor is not None:
            monitor.lp_value(i, lp.value)
        if not violated_indices(problem, y, cfg.stop_eps):
            return _result(problem, y, Status.CONVERGED, i + 1, refreshes, trace)
        if clock.expired():
            return _result(problem, y, Status.ITER_LIMIT, i + 1, refreshes, trace, "wall-clock cap")

        u = y
        if refresh:
            x_k = y
            refreshes += 1
            if monitor is not None:
                monitor.refresh(refreshes, x_k, eps_k)
            store = apply_drop(store, cfg.drop, at=y, n=problem.n)
            if monitor is not None:
                monitor.store(i, store, event="drop")
            schedule.next_value(max(F, 0.0) if schedule.needs_context else None)
            if cfg.variant is FeasibleVariant.M1_2 and cfg.improver is not None:
                u = as_point(cfg.improver(x_k))
                if not violated_indices(problem, u, cfg.stop_eps):
                    return _result(problem, u, Status.CONVERGED, i + 1, refreshes, trace)

        try:
            if cfg.variant is FeasibleVariant.M1_1:
                J = violated_indices(problem, y, 0.0)
                hits = _boundary_hits(problem, anchors, y, J, monitor, i)
                chosen = [_deepest(y, hits)] if cfg.deepest_only else sorted(hits)
                for j in chosen:
                    store.add(_support_cut(problem, j, hits[j], i))
            else:
                if cfg.cut_mode is CutMode.AGGREGATE:
                    Fu = problem.feasibility(u)
                    store.add(Cut.region_subgradient(Fu, problem.constraint_max.grad(u), u, i))
                else:
                    for j in sorted(violated_indices(problem, u, 0.0)):
                        fj = problem.constraints[j]
                        store.add(Cut.region_subgradient(fj(u), fj.grad(u), u, i))
        except CutplaneError as exc:
            return _result(problem, y, Status.ABORTED, i + 1, refreshes, trace, str(exc))
        if monitor is not None:
            monitor.store(i, store)
    return _result(problem, y, Status.ITER_LIMIT, cfg.max_iters, refreshes, trace)


def _run_candidates(problem: ProblemInstance, cfg: FeasibleConfig,
                    monitor: Optional[InvariantMonitor]) -> RunResult:
    """Variant that tries one cut per violated constraint and keeps two."""
    cost = _linear_cost(problem)
    anchors = _anchors(problem)
    schedule = cfg.schedule.fresh()
    store = CutStore.region(problem.box_M0, problem.simple_region)
    clock = _Clock(cfg.max_seconds)
    trace: list[TraceRecord] = []
    refreshes = 0
    try:
        lp = lp_minimize(store, cost)
    except CutplaneError as exc:
        return _result(problem, store.box.lower, Status.ABORTED, 0, 0, trace, str(exc))
    x, basis, value = lp.x, lp.basis, lp.value
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for k in range(cfg.max_iters):
            F, _ = eval_max(problem, x)
            eps_k = schedule.current
            refresh = F <= eps_k
            trace.append(TraceRecord(k, value, F, math.nan, len(store), 0, refresh))
            if monitor is not None:
                monitor.lp_value(k, value)
            if not violated_indices(problem, x, cfg.stop_eps):
                return _result(problem, x, Status.CONVERGED, k + 1, refreshes, trace)
            if clock.expired():
                return _result(problem, x, Status.ITER_LIMIT, k + 1, refreshes, trace, "wall-clock cap")
            if refresh:
                refreshes += 1
                if monitor is not None:
                    monitor.refresh(refreshes, x, eps_k)
                store = apply_drop(store, cfg.drop, at=x, n=problem.n)
                if monitor is not None:
                    monitor.store(k, store, event="drop")
                schedule.next_value(max(F, 0.0) if schedule.needs_context else None)

            J = sorted(violated_indices(problem, x, 0.0))
            try:
                hits = _boundary_hits(problem, anchors, x, J, monitor, k)
                cuts = {j: _support_cut(problem, j, hits[j], k) for j in J}
                j_deep = _deepest(x, hits)

                def candidate(j, store=store, basis=basis):
                    trial = store.copy()
                    trial.add(cuts[j])
                    return lp_minimize(trial, cost, basis)

                if pool is not None:
                    sols = dict(zip(J, pool.map(candidate, J)))
                else:
                    sols = {j: candidate(j) for j in J}
            except CutplaneError as exc:
                return _result(problem, x, Status.ABORTED, k + 1, refreshes, trace, f"{exc}\n{store.dump()}")

            deep = cuts[j_deep]
            admissible = [j for j in J
                          if deep.slack(sols[j].x) >= -1e-9 * (1.0 + abs(deep.rhs))]
            l_k = j_deep
            best = -math.inf
            for j in admissible:
                if sols[j].value > best:
                    l_k, best = j, sols[j].value
            store.add(deep)
            store.add(cuts[l_k])
            if monitor is not None:
                monitor.store(k, store)
            x, value, basis = sols[l_k].x, sols[l_k].value, sols[l_k].basis
        return _result(problem, x, Status.ITER_LIMIT, cfg.max_iters, refreshes, trace)
    finally:
        if pool is not None:
            pool.shutdown()


def run_projection(problem: ProblemInstance, y, schedule: Schedule, stop_eps: float = 1e-5,
                   max_iters: int = 50_000, monitor: Optional[InvariantMonitor] = None,
                   max_seconds: Optional[float] = None) -> RunResult:
    """Project y onto {F <= 0} with one deepest cut per iteration.

    At each refresh the store falls back to the bounding cube, so it never
    holds more than the cuts added since the last refresh.
    """
    if not schedule.positive:
        raise InvalidConfig("projection needs a strictly positive schedule")
    anchors = _anchors(problem)
    y = as_point(y)
    schedule = schedule.fresh()
    store = CutStore.region(problem.box_M0, problem.simple_region)
    clock = _Clock(max_seconds)
    trace: list[TraceRecord] = []
    refreshes = 0
    yi = y
    for i in range(max_iters):
        try:
            yi = qp_project(store, y)
        except CutplaneError as exc:
            return _result(problem, yi, Status.ABORTED, i, refreshes, trace, str(exc))
        F, _ = eval_max(problem, yi)
        eps_k = schedule.current
        refresh = F <= eps_k
        trace.append(TraceRecord(i, float(np.linalg.norm(yi - y)), F, math.nan, len(store), 0, refresh))
        if not violated_indices(problem, yi, stop_eps):
            res = _result(problem, yi, Status.CONVERGED, i + 1, refreshes, trace)
            res.final_value = float(np.linalg.norm(yi - y))
            return res
        if clock.expired():
            break
        if refresh:
            refreshes += 1
            store = apply_drop(store, DropKind.FULL_RESET)
            schedule.next_value(max(F, 0.0) if schedule.needs_context else None)
        J = violated_indices(problem, yi, 0.0)
        try:
            hits = _boundary_hits(problem, anchors, yi, J, monitor, i)
            j = _deepest(yi, hits)
            store.add(_support_cut(problem, j, hits[j], i))
        except CutplaneError as exc:
            return _result(problem, yi, Status.ABORTED, i + 1, refreshes, trace, str(exc))
        if monitor is not None:
            monitor.store(i, store)
    res = _result(problem, yi, Status.ITER_LIMIT, len(trace), refreshes, trace)
    res.final_value = float(np.linalg.norm(yi - y))
    return res
