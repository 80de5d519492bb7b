"""Dense bounded-variable dual simplex in revised form.

Solves  min c.x  s.t.  A x <= b,  lo <= x <= hi  with finite bounds.
Every row gets a slack s_i = b_i - a_i.x >= 0.  A basis is a set S of
tight rows (slack nonbasic at zero) and an equally sized set B of basic
structurals; the remaining structurals sit at one of their bounds.  Only
the inverse of the |S| x |B| block is kept, so the cost of a pivot is one
pass over the rows plus small dense algebra.

Because the box is bounded, putting every structural at the bound favoured
by its cost gives a dual feasible start, so no phase one is needed.  The
leaving row is the most infeasible one, with a bound-flipping ratio test;
after a streak of degenerate pivots both choices fall back to Bland's
smallest-index rule, which cannot cycle.  A basis can be handed back in to
restart from a previous optimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import Infeasible, SolverFailure

FEAS_TOL = 1e-10
PIVOT_TOL = 1e-9
TINY_PIVOT = 1e-14
DUAL_TOL = 1e-11
COND_LIMIT = 1e12
# degenerate pivots in a row before switching to Bland's rule
BLAND_AFTER = 20
REFACTOR_EVERY = 32


@dataclass(frozen=True)
class Basis:
    """Solver state that survives appending or dropping unrelated rows.

    x_basic[j] says whether structural j is basic; tight_rows lists the ids
    of rows whose slack is nonbasic (those rows hold with equality);
    at_upper[j] gives the bound of a nonbasic structural.
    """

    x_basic: tuple[bool, ...]
    tight_rows: tuple[int, ...]
    at_upper: tuple[bool, ...]


@dataclass
class LPOutcome:
    x: np.ndarray
    value: float
    basis: Basis
    pivots: int


class _Singular(Exception):
    pass


class _Revised:
    def __init__(self, A, b, c, lo, hi, x_basic, tight_pos, at_upper):
        self.A, self.b, self.c, self.lo, self.hi = A, b, c, lo, hi
        self.m, self.n = A.shape
        self.B = [j for j in range(self.n) if x_basic[j]]
        self.S = [int(r) for r in tight_pos]
        if len(self.B) != len(self.S) or len(set(self.S)) != len(self.S):
            raise _Singular("basis size mismatch")
        self.at_upper = np.array(at_upper, dtype=bool)
        self.width = hi - lo
        self.updates = 0
        self.factor(check=True)

    def factor(self, check=False):
        """Refresh the nonbasic list, the tight-row blocks and the inverse."""
        mask = np.ones(self.n, dtype=bool)
        mask[self.B] = False
        self.N = np.flatnonzero(mask)
        if not self.B:
            self.P = np.zeros((0, 0))
            self.A_SN = np.zeros((0, self.N.size))
            return
        A_S = self.A[self.S]
        Bk = A_S[:, self.B]
        self.A_SN = A_S[:, self.N]
        if check and np.linalg.cond(Bk) > COND_LIMIT:
            raise _Singular("ill-conditioned basis")
        try:
            self.P = np.linalg.inv(Bk)
        except np.linalg.LinAlgError as exc:
            raise _Singular(str(exc)) from exc

    def primal(self):
        x = np.where(self.at_upper, self.hi, self.lo)
        if self.B:
            x[self.B] = self.P @ (self.b[self.S] - self.A_SN @ x[self.N])
        return x

    def duals(self):
        """Reduced costs of nonbasic structurals and of tight-row slacks."""
        N = self.N
        if not self.B:
            return self.c[N].copy(), np.zeros(0)
        pi = self.c[self.B] @ self.P
        return self.c[N] - pi @ self.A_SN, -pi

    def fix_dual(self) -> bool:
        N = self.N
        d_x, d_s = self.duals()
        self.at_upper[N[d_x < -DUAL_TOL]] = True
        self.at_upper[N[d_x > DUAL_TOL]] = False
        return not np.any(d_s < -DUAL_TOL * 1e3)

    def leaving_row(self, kind, idx):
        """Derivatives of the leaving basic variable w.r.t. (x_N, s_S)."""
        N = self.N
        if not self.B:
            return -self.A[idx, N], np.zeros(0)
        if kind == 0:
            return -(self.P[idx] @ self.A_SN), -self.P[idx]
        aP = self.A[idx, self.B] @ self.P
        return aP @ self.A_SN - self.A[idx, N], aP

    def run(self, max_pivots):
        n = self.n
        pivots = 0
        stall = 0
        row_mask = np.ones(self.m, dtype=bool)
        while True:
            N = self.N
            x = self.primal()
            row_mask[:] = True
            row_mask[self.S] = False
            s = self.b - self.A @ x if self.m else np.zeros(0)
            viol_r = np.where(row_mask, -s - FEAS_TOL * (1.0 + np.abs(self.b)), 0.0)
            xb = x[self.B]
            lo_b, hi_b = self.lo[self.B], self.hi[self.B]
            below = lo_b - xb - FEAS_TOL * (1.0 + np.abs(lo_b))
            above = xb - hi_b - FEAS_TOL * (1.0 + np.abs(hi_b))
            bad_r = np.flatnonzero(viol_r > 0)
            bad_b = np.flatnonzero((below > 0) | (above > 0))
            if bad_r.size == 0 and bad_b.size == 0:
                return x, pivots
            if pivots >= max_pivots:
                raise SolverFailure(f"simplex pivot cap {max_pivots} reached")
            bland = stall >= BLAND_AFTER

            # leaving variable: kind 0 = basic structural (position t in B), 1 = row slack
            amt_b = np.maximum(lo_b - xb, xb - hi_b)[bad_b]
            ids_b = np.asarray(self.B, dtype=int)[bad_b]
            ids_r = n + bad_r
            if bland:
                pick_r = bad_r.size and (bad_b.size == 0 or ids_r.min() < ids_b.min())
                sel = int(np.argmin(ids_r)) if pick_r else int(np.argmin(ids_b))
            else:
                amt_r = -s[bad_r]
                best_r = amt_r.max() if bad_r.size else -np.inf
                best_b = amt_b.max() if bad_b.size else -np.inf
                pick_r = best_r >= best_b
                sel = int(np.argmax(amt_r)) if pick_r else int(np.argmax(amt_b))
            if pick_r:
                kind, idx = 1, int(bad_r[sel])
                increase, delta, leave_upper = True, float(-s[idx]), False
            else:
                kind, idx = 0, int(bad_b[sel])
                increase = bool(xb[idx] < lo_b[idx])
                delta = float(amt_b[sel])
                leave_upper = not increase

            alpha_x, alpha_s = self.leaving_row(kind, idx)
            d_x, d_s = self.duals()
            sign = 1.0 if increase else -1.0
            # nonbasic structurals move up from lower or down from upper; slacks only up
            dir_x = np.where(self.at_upper[N], -1.0, 1.0)
            gain_x = sign * alpha_x * dir_x
            gain_s = sign * alpha_s
            scale = max(1.0, float(np.max(np.abs(np.concatenate([alpha_x, alpha_s])))))
            choice = None
            for tol in (PIVOT_TOL, TINY_PIVOT):
                ex = np.flatnonzero(gain_x > tol * scale)
                es = np.flatnonzero(gain_s > tol * scale)
                if ex.size or es.size:
                    ratios = np.concatenate([np.abs(d_x[ex]) / gain_x[ex], np.abs(d_s[es]) / gain_s[es]])
                    ids = np.concatenate([N[ex], n + np.asarray(self.S, dtype=int)[es]])
                    kinds = np.concatenate([np.zeros(ex.size, int), np.ones(es.size, int)])
                    where = np.concatenate([ex, es])
                    gains = np.concatenate([gain_x[ex], gain_s[es]])
                    choice = (ratios, ids, kinds, where, gains)
                    break
            if choice is None:
                raise Infeasible("polyhedron is empty")
            ratios, ids, kinds, where, gains = choice
            order = np.lexsort((ids, -gains, ratios))
            flips = []
            pick = None
            if bland:
                best = ratios.min()
                tie = np.flatnonzero(ratios <= best + 1e-12 * (1.0 + best))
                pick = int(tie[np.argmin(ids[tie])])
            else:
                slope = delta
                for p in order:
                    if kinds[p] == 0:
                        j = int(ids[p])
                        room = gains[p] * self.width[j]
                        if slope - room > FEAS_TOL * (1.0 + delta):
                            flips.append(j)
                            slope -= room
                            continue
                    pick = int(p)
                    break
                if pick is None:
                    raise Infeasible("polyhedron is empty")
            step = float(ratios[pick])
            stall = stall + 1 if step * delta <= DUAL_TOL * (1.0 + abs(delta)) else 0

            for j in flips:
                self.at_upper[j] = not self.at_upper[j]
            enter_kind, enter_pos = int(kinds[pick]), int(where[pick])
            if kind == 0:
                self.at_upper[self.B[idx]] = leave_upper
            self.update(kind, idx, enter_kind, enter_pos)
            pivots += 1

    def update(self, kind, idx, enter_kind, enter_pos):
        """Swap one basic and one nonbasic variable, updating the inverse in place.

        Rows of P follow B, columns follow S.  A full refactor runs every
        REFACTOR_EVERY updates to keep rounding from piling up.
        """
        A, P = self.A, self.P
        self.updates += 1
        fresh = self.updates % REFACTOR_EVERY == 0
        if kind == 0 and enter_kind == 0:
            # basic structural B[idx] swaps with nonbasic structural j
            j = int(self.N[enter_pos])
            if not fresh:
                v = P @ A[self.S, j]
                e = v.copy()
                e[idx] -= 1.0
                P -= np.outer(e, P[idx] / v[idx])
            self.B[idx] = j
        elif kind == 0:
            # B[idx] leaves and the slack of row S[enter_pos] enters
            t, u = idx, enter_pos
            if not fresh:
                col, row = np.delete(P[:, u], t), np.delete(P[t], u)
                self.P = np.delete(np.delete(P, t, axis=0), u, axis=1) - np.outer(col, row) / P[t, u]
            del self.B[t]
            del self.S[u]
        elif enter_kind == 0:
            # row idx becomes tight and structural j becomes basic
            j = int(self.N[enter_pos])
            if not fresh:
                Pa = P @ A[self.S, j]
                rP = A[idx, self.B] @ P
                sigma = A[idx, j] - A[idx, self.B] @ Pa
                k = len(self.B)
                Q = np.empty((k + 1, k + 1))
                Q[:k, :k] = P + np.outer(Pa, rP) / sigma
                Q[:k, k] = -Pa / sigma
                Q[k, :k] = -rP / sigma
                Q[k, k] = 1.0 / sigma
                self.P = Q
            self.B.append(j)
            self.S.append(idx)
        else:
            # tight row S[enter_pos] is replaced by row idx
            u = enter_pos
            if not fresh:
                w = A[idx, self.B] @ P
                e = w.copy()
                e[u] -= 1.0
                P -= np.outer(P[:, u] / w[u], e)
            self.S[u] = idx
        if fresh:
            self.factor()
            return
        mask = np.ones(self.n, dtype=bool)
        mask[self.B] = False
        self.N = np.flatnonzero(mask)
        self.A_SN = A[self.S][:, self.N] if self.B else np.zeros((0, self.N.size))
        if not self.B:
            self.P = np.zeros((0, 0))

    def basis(self, row_ids) -> Basis:
        x_basic = [False] * self.n
        for j in self.B:
            x_basic[j] = True
        at_upper = [bool(u) and not xb for u, xb in zip(self.at_upper, x_basic)]
        tight = tuple(int(row_ids[r]) for r in self.S)
        return Basis(tuple(x_basic), tight, tuple(at_upper))


def _cold(c, n):
    return (False,) * n, (), tuple(bool(ci < 0) for ci in c)


def solve_lp(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    row_ids: Optional[Sequence[int]] = None,
    warm: Optional[Basis] = None,
    max_pivots: Optional[int] = None,
) -> LPOutcome:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, lo.size)
    b = np.asarray(b, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if row_ids is None:
        row_ids = list(range(m))
    if max_pivots is None:
        max_pivots = 50 * (m + n) + 1000
    pos = {rid: i for i, rid in enumerate(row_ids)}

    cold = _cold(c, n)
    start = cold
    if warm is not None and len(warm.x_basic) == n and all(t in pos for t in warm.tight_rows):
        start = (warm.x_basic, tuple(pos[t] for t in warm.tight_rows), warm.at_upper)

    total = 0
    for _ in range(4):
        try:
            lp = _Revised(A, b, c, lo, hi, *start)
            ok = lp.fix_dual()
        except _Singular:
            ok = False
        if not ok:
            if start == cold:
                raise SolverFailure("cannot factor the starting basis")
            start = cold
            lp = _Revised(A, b, c, lo, hi, *start)
            lp.fix_dual()
        try:
            x, piv = lp.run(max_pivots - total)
        except _Singular:
            start = cold
            continue
        total += piv
        x = np.clip(x, lo, hi)
        basis = lp.basis(row_ids)
        resid = A @ x - b if m else np.zeros(0)
        if np.all(resid <= 1e-9 * (1.0 + np.abs(b))):
            return LPOutcome(x=x, value=float(c @ x), basis=basis, pivots=total)
        # refactor from the final basis and keep pivoting
        start = (basis.x_basic, tuple(pos[t] for t in basis.tight_rows), basis.at_upper)
    raise SolverFailure("simplex could not reach a primal feasible vertex")
