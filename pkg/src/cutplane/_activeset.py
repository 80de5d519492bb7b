"""Euclidean projection onto a polyhedron by a dual active-set method.

Minimizes 0.5*||x - y||^2 subject to A x <= b.  The iteration starts at
the unconstrained minimizer x = y and repeatedly brings the most violated
constraint into the active set, stepping in the primal and the multipliers
together and releasing constraints whose multiplier reaches zero
(the Goldfarb-Idnani scheme with identity Hessian).  Each addition
strictly increases the objective, so no active set repeats and the method
terminates after finitely many steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, SolverFailure

VIOL_TOL = 1e-12
KKT_TOL = 1e-9


@dataclass
class QPOutcome:
    x: np.ndarray
    active: list[int]
    multipliers: np.ndarray
    kkt_residual: float
    steps: int


def _pinv_rows(N: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of a full-column-rank n x q matrix."""
    if N.shape[1] == 0:
        return np.zeros((0, N.shape[0]))
    return np.linalg.solve(N.T @ N, N.T)


def kkt_residual(y, x, A, b, active, u) -> float:
    scale = 1.0 + float(np.linalg.norm(y))
    stat = x - y
    if active:
        stat = stat + A[active].T @ u
    r = float(np.linalg.norm(stat))
    if A.shape[0]:
        s = A @ x - b
        r = max(r, float(np.max(s / (1.0 + np.abs(b)))) if s.size else 0.0, 0.0)
        if active:
            r = max(r, float(np.max(np.abs(u * s[active]))))
    if u.size:
        r = max(r, float(-np.min(u)))
    return r / scale


def project(y, A, b, max_steps: int | None = None) -> QPOutcome:
    y = np.asarray(y, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, y.size)
    b = np.asarray(b, dtype=float).reshape(-1)
    m, n = A.shape
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0):
        bad = np.flatnonzero((norms == 0) & (b < 0))
        if bad.size:
            raise Infeasible("zero row with negative right-hand side")
        keep = norms > 0
        A, b, norms = A[keep], b[keep], norms[keep]
        m = A.shape[0]
    if max_steps is None:
        max_steps = 20 * (m + n) + 100

    x = y.copy()
    active: list[int] = []
    u = np.zeros(0)
    steps = 0
    while True:
        viol = (A @ x - b) / (norms * (1.0 + np.abs(b) / norms))
        if active:
            viol[active] = -np.inf
        p = int(np.argmax(viol)) if m else -1
        if m == 0 or viol[p] <= VIOL_TOL:
            break
        up = 0.0
        while True:
            steps += 1
            if steps > max_steps:
                raise SolverFailure("active-set step cap reached")
            N = A[active].T if active else np.zeros((n, 0))
            Np = _pinv_rows(N)
            ap = A[p]
            r = Np @ ap
            z = -(ap - N @ r)
            zz = float(z @ z)
            t1, l = np.inf, -1
            for idx in range(len(active)):
                if r[idx] > 1e-14:
                    ratio = u[idx] / r[idx]
                    if ratio < t1:
                        t1, l = ratio, idx
            s_p = float(ap @ x - b[p])
            t2 = s_p / zz if zz > 1e-24 * (1.0 + float(ap @ ap)) else np.inf
            t = min(t1, t2)
            if not np.isfinite(t):
                raise Infeasible("projection target set is empty")
            u = u - t * r
            up += t
            if np.isfinite(t2):
                x = x + t * z
            if t2 <= t1:
                active.append(p)
                u = np.append(u, up)
                break
            del active[l]
            u = np.delete(u, l)
        u = np.maximum(u, 0.0)

    res = kkt_residual(y, x, A, b, active, u)
    if res > KKT_TOL:
        raise SolverFailure(f"projection KKT residual {res:.3e} above tolerance")
    return QPOutcome(x=x, active=active, multipliers=u, kkt_residual=res, steps=steps)
