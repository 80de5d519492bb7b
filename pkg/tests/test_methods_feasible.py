import math

import numpy as np
import pytest

from cutplane import Box, FunctionOracle, InvalidConfig, ProblemInstance, Status
from cutplane.bench import make_problem
from cutplane.methods_feasible import FeasibleConfig, run_feasible, run_projection
from cutplane.monitor import InvariantMonitor
from cutplane.schedules import from_code, geometric, zero
from oracles import grid_projection, p15_optimum


def monitor_for(n):
    f_star, x_star = p15_optimum(n)
    return InvariantMonitor(x_star, f_star, mu=1.0 / n**2)


def test_boundary_cuts_small():
    mon = monitor_for(2)
    res = run_feasible(make_problem("p15", 2), FeasibleConfig("M1_1", zero(), "keep_all"), mon)
    assert res.status is Status.CONVERGED
    assert -math.sqrt(3) - 0.05 <= res.final_value <= -math.sqrt(3) + 1e-9
    assert res.feasibility_residual <= 1e-5
    assert mon.ok, mon.violations[:3]


def test_subgradient_cuts_n10():
    n = 10
    mon = monitor_for(n)
    res = run_feasible(make_problem("p15", n), FeasibleConfig("M1_2", geometric(2.0), "active_only"), mon)
    f_star = -math.sqrt(55)
    assert res.status is Status.CONVERGED
    assert f_star - 0.11 <= res.final_value <= f_star + 1e-9
    assert res.refresh_count > 0
    assert mon.ok, mon.violations[:3]


def test_candidate_variant_agrees():
    mon = monitor_for(2)
    res = run_feasible(make_problem("p15", 2), FeasibleConfig("M1_4", geometric(2.0), "active_only"), mon)
    assert res.status is Status.CONVERGED
    assert abs(res.final_value + math.sqrt(3)) <= 0.05
    assert mon.ok, mon.violations[:3]


def test_candidate_variant_parallel_matches_sequential():
    p = make_problem("p15", 4)
    seq = run_feasible(p, FeasibleConfig("M1_4", geometric(2.0), "active_only"))
    par = run_feasible(p, FeasibleConfig("M1_4", geometric(2.0), "active_only", workers=4))
    assert seq.iterations == par.iterations
    assert np.array_equal(seq.final_point, par.final_point)


@pytest.mark.parametrize("mode,deepest", [("aggregate_F", False), ("per_constraint", False)])
def test_cut_modes(mode, deepest):
    res = run_feasible(make_problem("p15", 3),
                       FeasibleConfig("M1_2", from_code("a4", 3), "last_n_plus_1", mode, deepest))
    assert res.status is Status.CONVERGED
    assert abs(res.final_value - p15_optimum(3)[0]) <= 3**1.5 * math.sqrt(1e-5)


def test_deepest_only_boundary_cuts():
    res = run_feasible(make_problem("p15", 3), FeasibleConfig("M1_1", zero(), "keep_all", deepest_only=True))
    assert res.status is Status.CONVERGED
    assert all(rec.cuts_region <= rec.i for rec in res.trace)


def test_adaptive_schedule_refreshes():
    res = run_feasible(make_problem("p15", 3), FeasibleConfig("M1_1", from_code("a7", 3), "active_only"))
    assert res.status is Status.CONVERGED
    assert res.refresh_count >= 1


def test_iteration_cap():
    res = run_feasible(make_problem("p15", 5), FeasibleConfig("M1_1", zero(), "keep_all", max_iters=3))
    assert res.status is Status.ITER_LIMIT
    assert res.iterations == 3


def test_needs_linear_objective():
    with pytest.raises(InvalidConfig):
        run_feasible(make_problem("p34", 2), FeasibleConfig("M1_2"))


def test_config_validation():
    with pytest.raises(InvalidConfig):
        FeasibleConfig(max_iters=0)
    with pytest.raises(InvalidConfig):
        FeasibleConfig(stop_eps=0.0)


def test_improver_hook_used_at_refresh():
    seen = []

    def hook(x):
        seen.append(x.copy())
        return x

    res = run_feasible(make_problem("p15", 3),
                       FeasibleConfig("M1_2", geometric(2.0), "active_only", improver=hook))
    assert res.status is Status.CONVERGED
    assert len(seen) == res.refresh_count


# -- projection ---------------------------------------------------------------

disk = FunctionOracle(value=lambda x: float(x @ x) - 1.0, subgradient=lambda x: 2.0 * x, name="disk")
left = FunctionOracle.affine([1.0, 0.0], name="left")  # x_1 <= 0


def projection_problem(constraints):
    return ProblemInstance(FunctionOracle.affine([0.0, 0.0]), constraints, Box.cube(2, -3, 3),
                           interior_points=[np.array([-0.5, 0.0])])


def distances(res):
    return [rec.f for rec in res.trace]


def test_projection_onto_disk():
    y = np.array([2.0, 0.0])
    res = run_projection(projection_problem([disk]), y, geometric(2.0))
    assert res.status is Status.CONVERGED
    assert np.linalg.norm(res.final_point - [1.0, 0.0]) <= 1e-2
    assert max(distances(res)) <= 1.0 + 1e-9


def test_projection_of_feasible_point():
    res = run_projection(projection_problem([disk]), np.zeros(2), geometric(2.0))
    assert res.status is Status.CONVERGED
    assert res.iterations == 1
    assert np.array_equal(res.final_point, [0.0, 0.0])


def test_projection_onto_disk_and_halfplane():
    y = np.array([2.0, 2.0])
    p_star = grid_projection(y, lambda p: p @ p <= 1.0 and p[0] <= 0.0, -1.5, 1.5)
    assert np.allclose(p_star, [0.0, 1.0], atol=1e-4)
    res = run_projection(projection_problem([disk, left]), y, geometric(2.0))
    assert res.status is Status.CONVERGED
    assert np.linalg.norm(res.final_point - p_star) <= 1e-2
    bound = np.linalg.norm(p_star - y)
    assert max(distances(res)) <= bound + 1e-9 + 1e-4  # grid oracle resolution


def test_projection_needs_positive_schedule():
    with pytest.raises(InvalidConfig):
        run_projection(projection_problem([disk]), np.ones(2), zero())


def test_projection_store_stays_small():
    res = run_projection(projection_problem([disk]), np.array([2.5, 1.0]), geometric(2.0))
    assert res.refresh_count >= 1
    since = 0  # cuts added since the last reset, as logged before this iteration's reset
    for rec in res.trace:
        assert rec.cuts_region == since
        since = 1 if rec.refresh else since + 1
