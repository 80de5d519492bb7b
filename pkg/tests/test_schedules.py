import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cutplane import InvalidConfig, MissingContext
from cutplane.schedules import Context, Kind, adaptive, from_code, geometric, zero


def test_geometric_halving():
    s = geometric(2.0, 1.0)
    assert s.next_value() == 0.5


def test_adaptive_first_step():
    s = adaptive(1.1)
    assert s.current == math.inf
    assert s.next_value(2.0) == 2.0


def test_zero_forever():
    s = zero()
    assert [s.next_value() for _ in range(5)] == [0.0] * 5


def test_adaptive_needs_context():
    with pytest.raises(MissingContext):
        adaptive(2.0).next_value()


def test_code_table():
    expected = {
        "a1": (Kind.ZERO, None), "a2": (Kind.GEOMETRIC, 1.1), "a3": (Kind.GEOMETRIC, 1.5),
        "a4": (Kind.GEOMETRIC, 2.0), "a5": (Kind.GEOMETRIC, 7.0), "a6": (Kind.ADAPTIVE, 1.1),
        "a7": (Kind.ADAPTIVE, 2.0), "c1": (Kind.GEOMETRIC, 1.1), "c2": (Kind.GEOMETRIC, 2.0),
        "c3": (Kind.GEOMETRIC, 7.0), "c4": (Kind.ADAPTIVE, 2.0),
    }
    for code, (kind, div) in expected.items():
        s = from_code(code, 7)
        assert s.kind is kind
        if div is not None:
            assert s.divisor == div
        assert s.context is (Context.GAP if code.startswith("c") else Context.RESIDUAL)


def test_invalid_codes():
    with pytest.raises(InvalidConfig):
        from_code("c9", 3)
    with pytest.raises(InvalidConfig):
        from_code("a5", 1)


def test_fresh_copy_is_unadvanced():
    s = geometric(2.0)
    s.next_value()
    assert s.fresh().current == 1.0 and s.current == 0.5


@given(st.sampled_from(["a2", "a3", "a4", "a5", "c1", "c2", "c3"]), st.integers(2, 50),
       st.floats(1e-3, 1e3))
def test_geometric_strictly_decreasing(code, n, eps0):
    s = from_code(code, n, eps0)
    values = [s.current] + [s.next_value() for _ in range(40)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert all(v > 0 for v in values)


@given(st.sampled_from(["a6", "a7", "c4"]), st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=30))
def test_adaptive_bounded_by_alpha_context(code, contexts):
    s = from_code(code, 4)
    alphas = []
    for ctx in contexts:
        a = s.alpha()
        alphas.append(a)
        assert s.next_value(ctx) <= a * ctx
        assert s.current > 0
    assert all(b < a for a, b in zip(alphas, alphas[1:]))
