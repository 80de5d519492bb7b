import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cutplane import FunctionOracle, MaxBisections, ZeroSubgradient
from cutplane.bench import make_problem
from cutplane.boundary import (
    BoundaryHit,
    epi_membership,
    epi_support_vector,
    region_support_vector,
    segment_boundary_point,
)
from oracles import parabola_crossing

disk = FunctionOracle(value=lambda x: float(x @ x) - 1.0, subgradient=lambda x: 2.0 * x)
square = FunctionOracle(value=lambda x: float(x[0] ** 2), subgradient=lambda x: np.array([2.0 * x[0]]))


def check_hit(hit, membership):
    assert 0.0 <= membership(hit.z) <= hit.tol
    assert membership(hit.inner) <= 0.0
    assert 1.0 <= hit.q <= 2.0


def test_unit_circle_crossing():
    hit = segment_boundary_point(disk, np.zeros(2), np.array([2.0, 0.0]))
    assert np.allclose(hit.z, [1.0, 0.0], atol=1e-9)
    check_hit(hit, disk)


def test_parabola_crossing():
    m = epi_membership(square)
    hit = segment_boundary_point(m, np.array([0.0, 1.0]), np.array([2.0, -1.0]))
    x, g = parabola_crossing()
    assert hit.z == pytest.approx([x, g], abs=1e-9)
    assert x == pytest.approx(0.6180, abs=1e-4) and g == pytest.approx(0.3820, abs=1e-4)
    check_hit(hit, m)


def test_exact_crossing_gives_q_one():
    # the midpoint of (0,0)-(2,0) lands exactly on a unit-radius boundary
    hit = segment_boundary_point(disk, np.zeros(2), np.array([2.0, 0.0]), tol_boundary=0.0)
    assert hit.q == 1.0
    assert np.array_equal(hit.inner, hit.z)


def test_passthrough():
    hit = BoundaryHit.passthrough([1.0, 2.0], -0.5)
    assert hit.q == 1.0 and np.array_equal(hit.z, hit.inner)


def test_bad_endpoints():
    with pytest.raises(ValueError):
        segment_boundary_point(disk, np.array([2.0, 0.0]), np.array([3.0, 0.0]))
    with pytest.raises(ValueError):
        segment_boundary_point(disk, np.zeros(2), np.array([0.5, 0.0]))


def test_max_bisections():
    # a membership that jumps makes the tolerance unreachable
    jump = lambda x: 1.0 if x[0] > 0.5 else -1.0  # noqa: E731
    with pytest.raises(MaxBisections):
        segment_boundary_point(jump, np.zeros(1), np.ones(1), tol_boundary=1e-3)


def test_smaller_tolerance_gets_closer():
    far = segment_boundary_point(disk, np.zeros(2), np.array([3.0, 0.0]), tol_boundary=1e-2)
    near = segment_boundary_point(disk, np.zeros(2), np.array([3.0, 0.0]), tol_boundary=1e-8)
    assert abs(near.z[0] - 1.0) <= abs(far.z[0] - 1.0)


def test_region_support_examples():
    assert np.allclose(region_support_vector(disk, np.array([1.0, 0.0])), [1.0, 0.0])
    assert np.allclose(region_support_vector(disk, np.array([0.0, 1.0])), [0.0, 1.0])
    f1 = make_problem("p15", 2).constraints[0]
    assert np.allclose(region_support_vector(f1, np.array([1.0, 0.0])), [1.0, 0.0])
    with pytest.raises(ZeroSubgradient):
        region_support_vector(FunctionOracle(lambda x: 0.0, lambda x: np.zeros(2)), np.zeros(2))


def test_epi_support_examples():
    assert np.allclose(epi_support_vector(square, np.array([0.0, -1.0])), [0.0, -1.0])
    x, g = parabola_crossing()
    c = epi_support_vector(square, np.array([x, g]))
    expected = np.array([2 * x, -1.0]) / math.hypot(2 * x, 1.0)
    assert np.allclose(c, expected)
    assert np.allclose(c, [0.7775, -0.6289], atol=1e-4)


pt = st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=2)


@given(pt)
def test_region_support_validity(direction):
    d = np.array(direction)
    if np.linalg.norm(d) < 1e-3:
        return
    outside = 2.0 * d / np.linalg.norm(d)
    hit = segment_boundary_point(disk, np.zeros(2), outside)
    check_hit(hit, disk)
    a = region_support_vector(disk, hit.z)
    rng = np.random.default_rng(0)
    samples = rng.uniform(-1, 1, size=(1000, 2))
    samples = samples[np.einsum("ij,ij->i", samples, samples) <= 1.0]
    assert np.all((samples - hit.z) @ a <= 1e-10)


@given(st.integers(0, 10_000))
def test_epi_support_validity(seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(3, 3))
    Q = M @ M.T + 0.1 * np.eye(3)
    f = FunctionOracle(value=lambda x: float(x @ Q @ x), subgradient=lambda x: 2.0 * Q @ x)
    x0 = rng.normal(size=3)
    at = np.append(x0, f(x0) - abs(rng.normal()))
    c = epi_support_vector(f, np.append(x0, f(x0)))
    xs = rng.normal(size=(1000, 3)) * 3
    gam = np.array([f(x) for x in xs]) + rng.exponential(size=1000)
    u = np.hstack([xs, gam[:, None]])
    assert np.all((u - np.append(x0, f(x0))) @ c <= 1e-10 * (1 + np.abs(u).sum(axis=1)))
    with pytest.raises(ValueError):
        epi_support_vector(f, np.append(x0, f(x0) + 1.0))
    assert epi_support_vector(f, at) is not None
