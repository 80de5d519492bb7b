"""Crossing points of segments with convex sets, and the support vectors there."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core_model import FunctionOracle, as_point
from .errors import MaxBisections, ZeroSubgradient

MAX_BISECTIONS = 128
Q_MAX = 2.0


@dataclass(frozen=True)
class BoundaryHit:
    """z sits just outside the set interior, inner just inside it.

    inner = base + q * (z - base) where base is the outside endpoint.
    """

    z: np.ndarray
    inner: np.ndarray
    q: float
    membership_z: float
    membership_inner: float
    tol: float

    @property
    def exact(self) -> bool:
        return self.q == 1.0

    @staticmethod
    def passthrough(point, membership_value: float = 0.0) -> "BoundaryHit":
        p = as_point(point).copy()
        return BoundaryHit(p, p, 1.0, membership_value, membership_value, 0.0)


def segment_boundary_point(
    membership: Callable[[np.ndarray], float],
    interior,
    outside,
    tol_boundary: Optional[float] = None,
) -> BoundaryHit:
    """Bisect the segment from ``outside`` towards ``interior``.

    ``membership`` is nonpositive on the set.  Points are p(t) = outside +
    t (interior - outside); t_out keeps a positive membership, t_in a
    nonpositive one.  Bisection stops once membership(p(t_out)) is within
    tol_boundary and t_in <= 2 t_out.
    """
    v = as_point(interior)
    y = as_point(outside)
    m_out = float(membership(y))
    m_in = float(membership(v))
    if not m_in < 0:
        raise ValueError(f"interior anchor has membership {m_in:.3e}, expected < 0")
    if not m_out > 0:
        raise ValueError(f"outside point has membership {m_out:.3e}, expected > 0")
    if tol_boundary is None:
        tol_boundary = 1e-10 * (1.0 + abs(m_out))
    d = v - y
    t_out, t_in = 0.0, 1.0
    val_out, val_in = m_out, m_in
    for _ in range(MAX_BISECTIONS):
        if val_out <= tol_boundary and t_in <= Q_MAX * t_out:
            break
        t = 0.5 * (t_out + t_in)
        if t <= t_out or t >= t_in:
            raise MaxBisections("bracket collapsed before meeting the tolerance")
        val = float(membership(y + t * d))
        if val > 0:
            t_out, val_out = t, val
        elif val < 0:
            t_in, val_in = t, val
        else:
            t_out = t_in = t
            val_out = val_in = 0.0
    else:
        if not (val_out <= tol_boundary and t_in <= Q_MAX * t_out):
            raise MaxBisections(f"no admissible crossing after {MAX_BISECTIONS} bisections")
    z = y + t_out * d
    if t_in == t_out:
        return BoundaryHit(z, z.copy(), 1.0, val_out, val_in, tol_boundary)
    q = t_in / t_out
    inner = y + q * (z - y)
    val_inner = float(membership(inner))
    if val_inner > 0:
        # rounding moved inner across the boundary; fall back to the bracket point
        inner = y + t_in * d
        val_inner = val_in
    return BoundaryHit(z, inner, q, val_out, val_inner, tol_boundary)


def region_support_vector(constraint: FunctionOracle, z) -> np.ndarray:
    """Unit normal a with <a, x - z> <= 0 on {constraint <= 0}."""
    g = constraint.grad(z)
    norm = float(np.linalg.norm(g))
    if norm < 1e-12:
        raise ZeroSubgradient("zero subgradient at a non-interior point")
    return g / norm


def epi_support_vector(f: FunctionOracle, at) -> np.ndarray:
    """Unit vector (c_f, -1)/norm supporting epi(f) at a point on or below the graph."""
    at = as_point(at)
    x, gamma = at[:-1], float(at[-1])
    fx = f(x)
    if fx < gamma - 1e-12 * (1.0 + abs(gamma)):
        raise ValueError("point lies strictly inside the epigraph")
    c = np.append(f.grad(x), -1.0)
    return c / float(np.linalg.norm(c))


def epi_membership(f: FunctionOracle, shift: float = 0.0) -> Callable[[np.ndarray], float]:
    """Membership of (x, gamma) in epi(f + shift): f(x) + shift - gamma."""

    def m(u):
        return f(u[:-1]) + shift - float(u[-1])

    return m
