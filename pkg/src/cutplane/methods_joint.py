"""Simultaneous approximation of the feasible region and the epigraph.

One LP per iteration: minimize gamma over the epigraph model with x also
restricted by the region model.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boundary import BoundaryHit, epi_membership, epi_support_vector, region_support_vector, segment_boundary_point
from .core_model import ProblemInstance, RunResult, Status, TraceRecord, as_point, eval_max
from .cutstore import Cut, CutStore, DropKind, apply_drop, joint_store, lp_minimize
from .errors import CutplaneError, InvalidConfig
from .methods_epigraph import _epi_anchor
from .methods_feasible import _Clock
from .monitor import InvariantMonitor
from .schedules import Schedule, from_code


class JointVariant(str, enum.Enum):
    M3_1 = "M3_1"
    M3_2 = "M3_2"
    M3_3 = "M3_3"


@dataclass
class JointConfig:
    variant: JointVariant = JointVariant.M3_3
    eps_schedule: Schedule = field(default_factory=lambda: from_code("a4", 2))
    delta_schedule: Schedule = field(default_factory=lambda: from_code("c4", 2))
    region_drop: DropKind = DropKind.ACTIVE_ONLY
    epi_drop: DropKind = DropKind.KEEP_ALL
    alpha_lower: Optional[float] = None
    max_iters: int = 50_000
    stop_eps: float = 1e-5
    max_seconds: Optional[float] = None
    # stop as soon as y is feasible and within delta_k of the model bound
    stop_on_delta_solution: bool = False

    def __post_init__(self):
        self.variant = JointVariant(self.variant)
        self.region_drop = DropKind(self.region_drop)
        self.epi_drop = DropKind(self.epi_drop)
        if self.max_iters < 1:
            raise InvalidConfig("max_iters must be at least 1")
        if not self.stop_eps > 0:
            raise InvalidConfig("stop_eps must be positive")
        if self.variant is JointVariant.M3_3:
            if not (self.eps_schedule.positive and self.delta_schedule.positive):
                raise InvalidConfig("this variant needs strictly positive eps and delta schedules")
        if self.variant is JointVariant.M3_2 and not self.eps_schedule.positive:
            raise InvalidConfig("the two-stage variant needs a strictly positive distance schedule")


def linearization_lower_bound(problem: ProblemInstance) -> float:
    """A valid lower bound on f over the cube: the tangent plane at its center."""
    box = problem.box_M0
    c = 0.5 * (box.lower + box.upper)
    half = 0.5 * (box.upper - box.lower)
    g = problem.objective.grad(c)
    return problem.objective(c) - float(np.abs(g) @ half)


def _result(problem, x, gamma, status, i, refreshes, trace, message=""):
    x = as_point(x)
    F = problem.feasibility(x)
    return RunResult(
        final_point=x,
        final_value=problem.objective(x),
        feasibility_residual=max(F, 0.0) if math.isfinite(F) else 0.0,
        iterations=i,
        refresh_count=refreshes,
        status=status,
        trace=trace,
        lower_bound=gamma,
        message=message,
    )


def run_joint(problem: ProblemInstance, cfg: JointConfig,
              monitor: Optional[InvariantMonitor] = None) -> RunResult:
    n = problem.n
    f = problem.objective
    variant = cfg.variant
    if variant is JointVariant.M3_1:
        alpha = cfg.alpha_lower
        if alpha is None:
            alpha = problem.alpha_lower if problem.alpha_lower is not None else linearization_lower_bound(problem)
        gamma_floor = alpha
    else:
        gamma_floor = problem.gamma0_bar if cfg.alpha_lower is None else cfg.alpha_lower
    region = CutStore.region(problem.box_M0, problem.simple_region)
    epi = CutStore.epigraph(problem.box_M0, gamma_floor, problem.simple_region)
    cost = np.zeros(n + 1)
    cost[-1] = 1.0
    eps_s = cfg.eps_schedule.fresh()
    delta_s = cfg.delta_schedule.fresh()

    needs_anchors = variant in (JointVariant.M3_1, JointVariant.M3_2)
    if needs_anchors:
        if problem.interior_points is None and problem.constraints:
            raise InvalidConfig("boundary cuts need an interior point of the feasible set")
        v_region = problem.interior_points[0] if problem.constraints else None
        F = problem.constraint_max
        if F is not None and not F(v_region) < 0:
            raise InvalidConfig("region anchor is not strictly feasible")
        v_epi = _epi_anchor(problem)
        m_epi = epi_membership(f)
        if not m_epi(v_epi) < 0:
            raise InvalidConfig("epigraph anchor is not strictly above the graph")

    clock = _Clock(cfg.max_seconds)
    trace: list[TraceRecord] = []
    basis = None
    refreshes = 0
    stage_iters = 0
    y, gamma = None, -math.inf

    def epi_hit(u, i) -> BoundaryHit:
        m = m_epi(u)
        hit = segment_boundary_point(m_epi, v_epi, u) if m > 0 else BoundaryHit.passthrough(u, m)
        if monitor is not None:
            monitor.hit(i, hit)
        return hit

    def region_boundary_cut(x, i) -> Cut:
        hit = segment_boundary_point(problem.constraint_max, v_region, x)
        if monitor is not None:
            monitor.hit(i, hit)
        a = region_support_vector(problem.constraint_max, hit.z)
        return Cut.region(a, hit.z, i)

    def region_subgrad_cut(x, Fx, i) -> Cut:
        return Cut.region_subgradient(Fx, problem.constraint_max.grad(x), x, i)

    def epi_subgrad_cut(x, fx, i) -> Cut:
        return Cut.epi_subgradient(fx, f.grad(x), x, i)

    def check(i, event="insert"):
        if monitor is not None:
            monitor.store(i, region, event=event)
            monitor.store(i, epi, event=event)

    for i in range(cfg.max_iters):
        try:
            lp = lp_minimize(joint_store(region, epi), cost, basis)
        except CutplaneError as exc:
            x = y if y is not None else region.box.lower
            return _result(problem, x, gamma, Status.ABORTED, i, refreshes, trace,
                           f"{exc}\n{region.dump()}{epi.dump()}")
        basis = lp.basis
        y, gamma = lp.x[:-1], float(lp.x[-1])
        Fy, _ = eval_max(problem, y)
        fy = f(y)
        gap = fy - gamma
        Fres = Fy if math.isfinite(Fy) else -math.inf
        if monitor is not None:
            monitor.gamma(i, gamma)
        rec = TraceRecord(i, fy, Fres, gamma, len(region), len(epi), False)
        trace.append(rec)
        if Fres <= cfg.stop_eps and gap <= cfg.stop_eps:
            return _result(problem, y, gamma, Status.CONVERGED, i + 1, refreshes, trace)
        if clock.expired():
            return _result(problem, y, gamma, Status.ITER_LIMIT, i + 1, refreshes, trace, "wall-clock cap")
        u = np.append(y, gamma)

        try:
            if variant is JointVariant.M3_1:
                hit = epi_hit(u, i)
                epi.add(Cut.epi_support(epi_support_vector(f, hit.z), hit.z, i))
                if Fres > 0:
                    region.add(region_boundary_cut(y, i))

            elif variant is JointVariant.M3_2:
                eps_k = eps_s.current
                hit = epi_hit(u, i)
                dist = float(np.linalg.norm(hit.z - u))
                cut = Cut.epi_support(epi_support_vector(f, hit.z), hit.z, i)
                stage_iters += 1
                forced = stage_iters >= 10 * n
                if dist > eps_k and not forced:
                    epi.add(cut)
                else:
                    rec.refresh = True
                    refreshes += 1
                    stage_iters = 0
                    if not forced:
                        epi = apply_drop(epi, cfg.epi_drop, at=u, n=n)
                        check(i, "drop")
                    epi.add(cut)
                    if Fres > 0:
                        region.add(region_boundary_cut(y, i))
                    eps_s.next_value(max(gap, cfg.stop_eps) if eps_s.needs_context else None)

            else:
                eps_k, delta_k = eps_s.current, delta_s.current
                if Fres > eps_k:
                    region.add(region_subgrad_cut(y, Fy, i))
                    epi.add(epi_subgrad_cut(y, fy, i))
                elif gap > delta_k:
                    if Fres > 0:
                        region.add(region_subgrad_cut(y, Fy, i))
                    epi.add(epi_subgrad_cut(y, fy, i))
                else:
                    if cfg.stop_on_delta_solution and Fres <= 0:
                        check(i)
                        return _result(problem, y, gamma, Status.CONVERGED, i + 1, refreshes, trace,
                                       "delta-solution")
                    rec.refresh = True
                    refreshes += 1
                    if monitor is not None:
                        monitor.refresh(refreshes, y, eps_k)
                    if Fres > 0:
                        region = apply_drop(region, cfg.region_drop, at=y, n=n)
                        check(i, "drop")
                        region.add(region_subgrad_cut(y, Fy, i))
                    epi = apply_drop(epi, cfg.epi_drop, at=u, n=n)
                    check(i, "drop")
                    epi.add(epi_subgrad_cut(y, fy, i))
                    eps_s.next_value(max(Fres, cfg.stop_eps) if eps_s.needs_context else None)
                    delta_s.next_value(max(gap, cfg.stop_eps) if delta_s.needs_context else None)
        except CutplaneError as exc:
            return _result(problem, y, gamma, Status.ABORTED, i + 1, refreshes, trace, str(exc))

        epi.set_gamma_lower(gamma)
        check(i)
    return _result(problem, y, gamma, Status.ITER_LIMIT, cfg.max_iters, refreshes, trace)
