import csv
import io
import math

import numpy as np
import pytest

from cutplane import bench
from cutplane.bench import CSV_HEADER, make_problem, oracle_optimum, projected_gradient_optimum, read_matrix, run_suite
from oracles import p15_optimum, p25_optimum, p34_optimum, p34_nlp_optimum

CLOSED = {"p15": p15_optimum, "p25": p25_optimum, "p34": p34_optimum}


@pytest.mark.parametrize("pid", bench.PROBLEMS)
@pytest.mark.parametrize("n", [1, 2, 5, 10, 30])
def test_oracle_matches_closed_form(pid, n):
    f, x = oracle_optimum(pid, n)
    f_ref, x_ref = CLOSED[pid](n)
    assert f == pytest.approx(f_ref, rel=1e-12, abs=1e-12)
    assert np.allclose(x, x_ref, atol=1e-12)
    p = make_problem(pid, n)
    assert p.objective(x) == pytest.approx(f, rel=1e-12, abs=1e-12)
    assert p.feasibility(x) <= 1e-9


@pytest.mark.parametrize("pid,n", [("p15", 2), ("p15", 10), ("p25", 5), ("p34", 2), ("p34", 30)])
def test_oracle_matches_projected_gradient(pid, n):
    f_pg, _ = projected_gradient_optimum(pid, n)
    assert f_pg == pytest.approx(oracle_optimum(pid, n)[0], abs=1e-6)


@pytest.mark.parametrize("n", [2, 12, 30])
def test_p34_matches_nlp_solver(n):
    assert oracle_optimum("p34", n)[0] == pytest.approx(p34_nlp_optimum(n), abs=1e-6)


def test_p34_small_n_unconstrained():
    f, x = oracle_optimum("p34", 2)
    assert f == 0.0 and np.array_equal(x, [10.0, 10.0])


def test_p15_values():
    assert oracle_optimum("p15", 10)[0] == pytest.approx(-math.sqrt(55))
    assert oracle_optimum("p15", 2)[0] == pytest.approx(-math.sqrt(3))


def test_problem_shapes():
    p = make_problem("p15", 4)
    assert len(p.constraints) == 4 and p.simple_region is None
    assert p.objective.linear is not None
    q = make_problem("p25", 3)
    assert q.constraints == [] and q.simple_region is not None
    r = make_problem("p34", 3)
    assert len(r.constraints) == 1


def test_bad_ids():
    with pytest.raises(ValueError):
        make_problem("p99", 2)
    with pytest.raises(ValueError):
        oracle_optimum("p15", 0)


def _oracles(p):
    return [p.objective] + list(p.constraints)


@pytest.mark.parametrize("pid", bench.PROBLEMS)
@pytest.mark.parametrize("n", [2, 10, 30])
def test_subgradient_inequality(pid, n):
    p = make_problem(pid, n)
    rng = np.random.default_rng(hash((pid, n)) % 2**32)
    lo, hi = p.box_M0.lower, p.box_M0.upper
    X = rng.uniform(lo, hi, size=(10_000, n))
    Z = rng.uniform(lo, hi, size=(10_000, n))
    for f in _oracles(p):
        worst = -math.inf
        for x, z in zip(X, Z):
            worst = max(worst, f(z) + f.grad(z) @ (x - z) - f(x))
        assert worst <= 1e-10, (f.name, worst)


def test_matrix_parsing():
    text = "# header\n--method 1.1 --problem p15 --n 2  # trailing\n\n  --method 2.1 --problem p25 --n 2\n"
    assert read_matrix(text) == [["--method", "1.1", "--problem", "p15", "--n", "2"],
                                 ["--method", "2.1", "--problem", "p25", "--n", "2"]]


MATRIX = [
    "--method 1.1 --problem p15 --n 2 --eps a1 --drop b1".split(),
    "--method 2.3 --problem p25 --n 2 --eps a1 --drop b2".split(),
    "--method 1.2 --problem p15 --n 2 --eps c1".split(),
]


def test_suite_rows_and_csv(tmp_path):
    out = tmp_path / "r.csv"
    rows = run_suite(MATRIX, out)
    raw = out.read_bytes()
    assert b"\r" not in raw
    parsed = list(csv.reader(io.StringIO(raw.decode("utf-8"))))
    assert parsed[0] == CSV_HEADER
    assert len(parsed) == 4
    assert [r.status for r in rows[:2]] == ["Converged", "Converged"]
    assert rows[0].final_gap == pytest.approx(rows[0].final_f - rows[0].f_star)
    assert rows[2].status.startswith("Invalid")
    assert "c1" in rows[2].status


def test_suite_deterministic_and_order_preserving():
    a = run_suite(MATRIX)
    b = run_suite(MATRIX, jobs=2)
    key = lambda r: repr(r.cells()[:1] + r.cells()[2:5] + r.cells()[6:])  # noqa: E731
    assert [key(r) for r in a] == [key(r) for r in b]


def test_empty_matrix(tmp_path):
    out = tmp_path / "e.csv"
    assert run_suite([], out) == []
    assert out.read_text() == ",".join(CSV_HEADER) + "\n"
