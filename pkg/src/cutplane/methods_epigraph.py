"""Epigraph approximation: subgradient cuts, support cuts from boundary
points, a level-set variant, and an eps-solution variant driven by a
distance test."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .boundary import BoundaryHit, epi_membership, epi_support_vector, segment_boundary_point
from .core_model import TOL_ACTIVE, FunctionOracle, ProblemInstance, RunResult, Status, TraceRecord, as_point
from .cutstore import Cut, CutStore, DropKind, apply_drop, lp_minimize, qp_project
from .errors import CutplaneError, EmptyLevelSet, Infeasible, InvalidConfig
from .methods_feasible import _Clock
from .monitor import InvariantMonitor
from .schedules import Schedule, zero


class EpiVariant(str, enum.Enum):
    M2_1 = "M2_1"
    M2_2 = "M2_2"
    M2_3 = "M2_3"
    M2_4 = "M2_4"


@dataclass
class EpiConfig:
    variant: EpiVariant = EpiVariant.M2_1
    schedule: Schedule = field(default_factory=zero)
    drop: DropKind = DropKind.KEEP_ALL
    gamma0_bar: Optional[float] = None
    level_lambda: float = 0.5
    eps_solution: float = 0.01
    improver_hook: Optional[Callable[[np.ndarray], np.ndarray]] = None
    max_iters: int = 50_000
    stop_eps: float = 1e-5
    max_seconds: Optional[float] = None

    def __post_init__(self):
        self.variant = EpiVariant(self.variant)
        self.drop = DropKind(self.drop)
        if self.max_iters < 1:
            raise InvalidConfig("max_iters must be at least 1")
        if not self.stop_eps > 0:
            raise InvalidConfig("stop_eps must be positive")
        if not 0.0 < self.level_lambda < 1.0:
            raise InvalidConfig("level_lambda must lie in (0, 1)")
        if not self.eps_solution > 0:
            raise InvalidConfig("eps_solution must be positive")


def _epi_anchor(problem: ProblemInstance) -> np.ndarray:
    if problem.epi_anchor is not None:
        return as_point(problem.epi_anchor)
    box = problem.box_M0 if problem.simple_region is None else problem.simple_region.box
    center = 0.5 * (box.lower + box.upper)
    fc = problem.objective(center)
    return np.append(center, fc + max(1.0, abs(fc)))


def _active_pieces(pieces, x) -> list[int]:
    vals = [p(x) for p in pieces]
    top = max(vals)
    cut = top - TOL_ACTIVE * (abs(top) + 1.0)
    return [j for j, v in enumerate(vals) if v >= cut]


def _result(problem, x, gamma, status, i, refreshes, trace, message="", certified=False):
    x = as_point(x)
    return RunResult(
        final_point=x,
        final_value=problem.objective(x),
        feasibility_residual=0.0,
        iterations=i,
        refresh_count=refreshes,
        status=status,
        trace=trace,
        lower_bound=gamma,
        eps_solution=certified,
        message=message,
    )


def _improve(cfg: EpiConfig, problem: ProblemInstance, y: np.ndarray) -> np.ndarray:
    if cfg.improver_hook is None:
        return y
    x = as_point(cfg.improver_hook(y))
    f = problem.objective
    if f(x) > f(y) + 1e-12 * (1.0 + abs(f(y))):
        raise InvalidConfig("improver hook returned a point with a larger objective value")
    return x


def run_epigraph(problem: ProblemInstance, cfg: EpiConfig,
                 monitor: Optional[InvariantMonitor] = None) -> RunResult:
    """Minimize f over the simple region D with an outer model of epi(f)."""
    if problem.simple_region is None:
        raise InvalidConfig("epigraph methods need a bounded simple region")
    if problem.constraints:
        raise InvalidConfig("epigraph methods handle constraints only through the simple region")
    n = problem.n
    f = problem.objective
    pieces = problem.pieces()
    gamma0 = problem.gamma0_bar if cfg.gamma0_bar is None else cfg.gamma0_bar
    store = CutStore.epigraph(problem.box_M0, gamma0, problem.simple_region)
    cost = np.zeros(n + 1)
    cost[-1] = 1.0
    schedule = cfg.schedule.fresh()
    variant = cfg.variant
    shift = cfg.eps_solution if variant is EpiVariant.M2_4 else 0.0
    if variant in (EpiVariant.M2_2, EpiVariant.M2_4):
        anchor = _epi_anchor(problem)
        anchor = anchor + np.append(np.zeros(n), shift)
        membership = epi_membership(f, shift)
        if not membership(anchor) < 0:
            raise InvalidConfig("epigraph anchor is not strictly above the graph")
    clock = _Clock(cfg.max_seconds)
    trace: list[TraceRecord] = []
    basis = None
    refreshes = 0
    y, gamma = None, -math.inf
    # level-method state
    beta = math.inf
    x_prev = None
    f_prev = math.inf

    def fail(exc, i):
        x = y if y is not None else store.box.lower[:-1]
        return _result(problem, x, gamma, Status.ABORTED, i, refreshes, trace, f"{exc}\n{store.dump()}")

    for i in range(cfg.max_iters):
        try:
            lp = lp_minimize(store, cost, basis)
        except CutplaneError as exc:
            return fail(exc, i)
        basis = lp.basis
        y, gamma = lp.x[:-1], float(lp.x[-1])
        fy = f(y)
        gap = fy - gamma
        if monitor is not None:
            monitor.gamma(i, gamma, shift)
        rec = TraceRecord(i, fy, math.nan, gamma, 0, len(store), False)
        trace.append(rec)
        eps_k = schedule.current

        if variant is EpiVariant.M2_4:
            if gamma >= fy:
                return _result(problem, y, gamma - shift, Status.CONVERGED, i + 1, refreshes, trace,
                               certified=True)
        elif gap <= cfg.stop_eps:
            return _result(problem, y, gamma, Status.CONVERGED, i + 1, refreshes, trace)
        if clock.expired():
            return _result(problem, y, gamma - shift, Status.ITER_LIMIT, i + 1, refreshes, trace, "wall-clock cap")

        u = np.append(y, gamma)
        try:
            if variant is EpiVariant.M2_1:
                if gap <= eps_k:
                    x_k = _improve(cfg, problem, y)
                    rec.refresh = True
                    refreshes += 1
                    store = _refresh(store, cfg, u, n, monitor, i, x_k, eps_k, refreshes)
                    schedule.next_value(f(x_k) - gamma if schedule.needs_context else None)
                for j in _active_pieces(pieces, y):
                    p = pieces[j]
                    store.add(Cut.epi_subgradient(p(y), p.grad(y), y, i))

            elif variant is EpiVariant.M2_2:
                target = u
                if gap <= eps_k:
                    x_k = _improve(cfg, problem, y)
                    rec.refresh = True
                    refreshes += 1
                    store = _refresh(store, cfg, u, n, monitor, i, x_k, eps_k, refreshes)
                    schedule.next_value(f(x_k) - gamma if schedule.needs_context else None)
                    target = np.append(x_k, gamma)
                hit = _epi_hit(membership, anchor, target, monitor, i)
                c = epi_support_vector(f, hit.z)
                store.add(Cut.epi_support(c, hit.z, i))

            elif variant is EpiVariant.M2_3:
                beta = min(beta, f_prev)
                if math.isfinite(beta):
                    level = (1.0 - cfg.level_lambda) * gamma + cfg.level_lambda * beta
                    x = _level_point(store, x_prev, level)
                else:
                    level = math.inf
                    x = y.copy()
                rec.beta, rec.level = beta, level
                if monitor is not None:
                    monitor.level(i, gamma, beta)
                fx = f(x)
                if fx - gamma <= cfg.stop_eps:
                    rec.f = fx
                    return _result(problem, x, gamma, Status.CONVERGED, i + 1, refreshes, trace)
                if fx - gamma <= eps_k:
                    rec.refresh = True
                    refreshes += 1
                    store = _refresh(store, cfg, u, n, monitor, i, x, eps_k, refreshes)
                    schedule.next_value(fx - gamma if schedule.needs_context else None)
                for j in _active_pieces(pieces, x):
                    p = pieces[j]
                    store.add(Cut.epi_subgradient(p(x), p.grad(x), x, i))
                x_prev, f_prev = x, fx

            else:
                hit = _epi_hit(membership, anchor, u, monitor, i)
                dist = float(np.linalg.norm(hit.z - u))
                if dist <= eps_k:
                    x_k = _improve(cfg, problem, y)
                    rec.refresh = True
                    refreshes += 1
                    store = _refresh(store, cfg, u, n, monitor, i, None, eps_k, refreshes, shift)
                    schedule.next_value(f(x_k) + shift - gamma if schedule.needs_context else None)
                c = epi_support_vector(_shifted(f, shift), hit.z)
                store.add(Cut.epi_support(c, hit.z, i))
        except CutplaneError as exc:
            return fail(exc, i + 1)

        store.set_gamma_lower(gamma)
        if monitor is not None:
            monitor.store(i, store, shift)
    return _result(problem, y, gamma - shift, Status.ITER_LIMIT, cfg.max_iters, refreshes, trace)


def _shifted(f, shift):
    if shift == 0.0:
        return f
    return FunctionOracle(value=lambda x: f(x) + shift, subgradient=f.subgradient, name=f.name)


def _epi_hit(membership, anchor, target, monitor, i) -> BoundaryHit:
    m = membership(target)
    if m > 0:
        hit = segment_boundary_point(membership, anchor, target)
    else:
        hit = BoundaryHit.passthrough(target, m)
    if monitor is not None:
        monitor.hit(i, hit)
    return hit


def _refresh(store, cfg, u, n, monitor, i, x_k, eps_k, k, shift=0.0) -> CutStore:
    if monitor is not None and x_k is not None:
        monitor.refresh(k, x_k, eps_k)
    out = apply_drop(store, cfg.drop, at=u, n=n)
    if monitor is not None:
        monitor.store(i, out, shift, event="drop")
    return out


def _level_point(store: CutStore, x_prev: np.ndarray, level: float) -> np.ndarray:
    """Projection of x_prev onto {x in D : every cut holds with gamma = level}."""
    n = store.n
    xstore = CutStore(
        type(store.box)(store.box.lower[:n], store.box.upper[:n]),
        fixed_A=store.fixed_A[:, :n],
        fixed_b=store.fixed_b - store.fixed_A[:, n] * level,
    )
    A, b, _ = store.matrix()
    k = store.fixed_b.size
    rows = A[k:, :n]
    rhs = b[k:] - A[k:, n] * level
    try:
        return qp_project(xstore, x_prev, (rows, rhs))
    except Infeasible as exc:
        raise EmptyLevelSet(f"level set at {level!r} is empty") from exc
