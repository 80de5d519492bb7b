import math

import numpy as np
import pytest

from cutplane import Box, FunctionOracle, InvalidConfig, ProblemInstance, SimpleRegion, Status
from cutplane.bench import make_problem
from cutplane.methods_epigraph import EpiConfig, run_epigraph
from cutplane.monitor import InvariantMonitor
from cutplane.schedules import from_code, geometric, zero
from oracles import lp_reference


def monitor(n):
    return InvariantMonitor(np.zeros(n), 0.0, mu=1.0)


def test_subgradient_cuts_n2():
    mon = monitor(2)
    res = run_epigraph(make_problem("p25", 2), EpiConfig("M2_1", geometric(2.0), "active_only"), mon)
    assert res.status is Status.CONVERGED
    assert res.final_value <= 1e-5
    assert res.lower_bound <= 0.0 <= res.final_value
    assert mon.ok, mon.violations[:3]


def test_level_variant_monotone():
    mon = monitor(2)
    res = run_epigraph(make_problem("p25", 2), EpiConfig("M2_3", zero(), "keep_all", level_lambda=0.5), mon)
    assert res.status is Status.CONVERGED
    gammas = [rec.gamma for rec in res.trace]
    assert all(b >= a for a, b in zip(gammas, gammas[1:]))
    betas = [rec.beta for rec in res.trace if not math.isnan(rec.beta)]
    assert all(b <= a for a, b in zip(betas, betas[1:]))
    for rec in res.trace:
        if math.isfinite(rec.level) and rec.beta >= rec.gamma:
            assert rec.gamma <= rec.level <= rec.beta
    assert res.gap <= 1e-5
    assert mon.ok, mon.violations[:3]


def test_eps_solution_n1():
    mon = InvariantMonitor(np.zeros(1), 0.0)
    res = run_epigraph(make_problem("p25", 1), EpiConfig("M2_4", geometric(2.0), "keep_all", eps_solution=0.01), mon)
    assert res.status is Status.CONVERGED
    assert res.eps_solution
    assert res.final_value <= 0.01 + 1e-9
    assert mon.ok, mon.violations[:3]


def test_support_cuts_n10():
    mon = monitor(10)
    res = run_epigraph(make_problem("p25", 10), EpiConfig("M2_2", from_code("c4", 10), "last_n_plus_1"), mon)
    assert res.status is Status.CONVERGED
    assert res.final_value <= 1e-5
    assert mon.ok, mon.violations[:3]


def test_trace_counts_epi_cuts():
    res = run_epigraph(make_problem("p25", 2), EpiConfig("M2_1", zero(), "keep_all"))
    assert [rec.cuts_epi for rec in res.trace[:4]] == [0, 1, 2, 3]
    assert all(rec.cuts_region == 0 for rec in res.trace)


def test_improver_must_not_increase_f():
    cfg = EpiConfig("M2_1", geometric(2.0), "active_only", improver_hook=lambda y: y + 1.0)
    res = run_epigraph(make_problem("p25", 2), cfg)
    assert res.status is Status.ABORTED


def test_improver_hook_accepted():
    calls = []

    def hook(y):
        calls.append(1)
        return 0.5 * y

    res = run_epigraph(make_problem("p25", 2), EpiConfig("M2_2", geometric(2.0), "active_only", improver_hook=hook))
    assert res.status is Status.CONVERGED
    assert len(calls) == res.refresh_count


def test_requires_simple_region():
    with pytest.raises(InvalidConfig):
        run_epigraph(make_problem("p34", 2), EpiConfig("M2_1"))


def test_config_validation():
    with pytest.raises(InvalidConfig):
        EpiConfig(level_lambda=1.0)
    with pytest.raises(InvalidConfig):
        EpiConfig(eps_solution=0.0)


def test_nonsmooth_pieces_match_lp():
    rng = np.random.default_rng(5)
    n, k = 3, 7
    G = rng.normal(size=(k, n))
    h = rng.normal(size=k)
    pieces = [FunctionOracle.affine(G[j], h[j]) for j in range(k)]
    f = FunctionOracle(value=lambda x: float(np.max(G @ x + h)),
                       subgradient=lambda x: G[int(np.argmax(G @ x + h))])
    box = Box.cube(n, -2, 2)
    problem = ProblemInstance(f, [], box, simple_region=SimpleRegion(box), objective_pieces=pieces,
                              gamma0_bar=-100.0)
    # min t s.t. G x + h <= t over the box
    A = np.hstack([G, -np.ones((k, 1))])
    status, ref = lp_reference(A, -h, np.append(np.zeros(n), 1.0), np.append(box.lower, -100),
                               np.append(box.upper, 100))
    assert status == 0
    res = run_epigraph(problem, EpiConfig("M2_1", zero(), "keep_all"))
    assert res.status is Status.CONVERGED
    assert res.final_value == pytest.approx(ref, abs=1e-5)
