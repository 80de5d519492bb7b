"""Polyhedral outer approximations: a fixed box plus an ordered list of cuts.

A cut reads  <normal, x> + gamma_coeff * gamma <= rhs.  Region stores live
in x-space (gamma_coeff is always 0); epigraph stores live in (x, gamma)
space with gamma as the last coordinate.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _activeset, _simplex
from .core_model import Box, SimpleRegion, as_point
from .errors import Infeasible

MIN_NORMAL = 1e-12
DUP_TOL = 1e-10
GAMMA_CEILING = 1e12

_uid = itertools.count(1)


class Space(str, enum.Enum):
    X = "x_space"
    EPI = "epi_space"


class CutSource(str, enum.Enum):
    REGION_SUPPORT = "region_support"
    REGION_SUBGRAD = "region_subgrad"
    EPI_SUPPORT = "epi_support"
    EPI_SUBGRAD = "epi_subgrad"


class DropKind(str, enum.Enum):
    KEEP_ALL = "keep_all"
    ACTIVE_ONLY = "active_only"
    LAST_N_PLUS_1 = "last_n_plus_1"
    FULL_RESET = "full_reset"


@dataclass(frozen=True)
class Cut:
    normal: np.ndarray
    gamma_coeff: float
    rhs: float
    iter: int = 0
    source: CutSource = CutSource.REGION_SUPPORT
    uid: int = field(default_factory=lambda: next(_uid), compare=False)

    def row(self, space: Space) -> np.ndarray:
        if space is Space.EPI:
            return np.append(self.normal, self.gamma_coeff)
        return self.normal

    def slack(self, x, gamma: float = 0.0) -> float:
        """rhs minus left side; negative means violated."""
        return self.rhs - float(self.normal @ as_point(x)) - self.gamma_coeff * gamma

    @staticmethod
    def region(normal, point, iter: int = 0, source=CutSource.REGION_SUPPORT) -> "Cut":
        """<normal, x - point> <= 0."""
        a = as_point(normal)
        return Cut(a.copy(), 0.0, float(a @ as_point(point)), iter, source)

    @staticmethod
    def region_subgradient(value: float, grad, point, iter: int = 0) -> "Cut":
        """value + <grad, x - point> <= 0."""
        g = as_point(grad)
        return Cut(g.copy(), 0.0, float(g @ as_point(point)) - value, iter, CutSource.REGION_SUBGRAD)

    @staticmethod
    def epi_subgradient(value: float, grad, point, iter: int = 0) -> "Cut":
        """value + <grad, x - point> <= gamma."""
        g = as_point(grad)
        return Cut(g.copy(), -1.0, float(g @ as_point(point)) - value, iter, CutSource.EPI_SUBGRAD)

    @staticmethod
    def epi_support(vector, at, iter: int = 0) -> "Cut":
        """<vector, u - at> <= 0 in (x, gamma) space."""
        c = as_point(vector)
        at = as_point(at)
        return Cut(c[:-1].copy(), float(c[-1]), float(c @ at), iter, CutSource.EPI_SUPPORT)


class CutStore:
    """Box, permanent linear rows and the mutable cut list of one approximation."""

    def __init__(
        self,
        box: Box,
        space: Space = Space.X,
        fixed_A: Optional[np.ndarray] = None,
        fixed_b: Optional[np.ndarray] = None,
        cuts: Iterable[Cut] = (),
    ):
        self.box = box
        self.space = Space(space)
        d = box.dim
        self.fixed_A = np.zeros((0, d)) if fixed_A is None else np.asarray(fixed_A, dtype=float).reshape(-1, d)
        self.fixed_b = np.zeros(0) if fixed_b is None else np.asarray(fixed_b, dtype=float).reshape(-1)
        self._fixed_ids = tuple(-(k + 1) for k in range(self.fixed_b.size))
        self.cuts: list[Cut] = []
        self._keys = np.zeros((0, d + 1))
        self._rows = np.zeros((0, d))
        self._rhs = np.zeros(0)
        for c in cuts:
            self.add(c)

    @classmethod
    def region(cls, box: Box, simple: Optional[SimpleRegion] = None) -> "CutStore":
        if simple is None:
            return cls(box, Space.X)
        A, b = simple.rows()
        return cls(box.intersect(simple.box), Space.X, A, b)

    @classmethod
    def epigraph(cls, box: Box, gamma_lower: float, simple: Optional[SimpleRegion] = None,
                 gamma_upper: float = GAMMA_CEILING) -> "CutStore":
        xbox = box if simple is None else box.intersect(simple.box)
        ebox = Box(np.append(xbox.lower, gamma_lower), np.append(xbox.upper, gamma_upper))
        A = b = None
        if simple is not None:
            A0, b = simple.rows()
            A = np.hstack([A0, np.zeros((A0.shape[0], 1))])
        return cls(ebox, Space.EPI, A, b)

    # -- basic properties -------------------------------------------------
    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def n(self) -> int:
        """Dimension of the x part."""
        return self.dim - 1 if self.space is Space.EPI else self.dim

    def __len__(self) -> int:
        return len(self.cuts)

    @property
    def gamma_lower(self) -> float:
        return float(self.box.lower[-1]) if self.space is Space.EPI else math.nan

    def copy(self) -> "CutStore":
        other = CutStore.__new__(CutStore)
        other.box = self.box
        other.space = self.space
        other.fixed_A = self.fixed_A
        other.fixed_b = self.fixed_b
        other._fixed_ids = self._fixed_ids
        other.cuts = list(self.cuts)
        other._keys = self._keys
        other._rows = self._rows
        other._rhs = self._rhs
        return other

    # -- mutation -----------------------------------------------------------
    @staticmethod
    def _key(row: np.ndarray, rhs: float) -> np.ndarray:
        s = float(np.linalg.norm(row))
        return np.append(row, rhs) / s

    def add(self, cut: Cut) -> bool:
        """Append a cut; returns False when it is degenerate or a duplicate."""
        row = cut.row(self.space)
        if row.size != self.dim:
            raise ValueError(f"cut has dimension {row.size}, store has {self.dim}")
        if self.space is Space.X and cut.gamma_coeff != 0.0:
            raise ValueError("region stores only accept cuts without a gamma term")
        if not np.all(np.isfinite(row)) or not math.isfinite(cut.rhs):
            raise ValueError("cut has non-finite coefficients")
        if float(np.linalg.norm(row)) < MIN_NORMAL:
            return False
        key = self._key(row, cut.rhs)
        if self._keys.shape[0] and np.any(np.max(np.abs(self._keys - key), axis=1) <= DUP_TOL):
            return False
        self.cuts.append(cut)
        self._keys = np.vstack([self._keys, key])
        self._rows = np.vstack([self._rows, row])
        self._rhs = np.append(self._rhs, cut.rhs)
        return True

    def set_gamma_lower(self, value: float) -> None:
        """Raise the lower bound on gamma (never lowers it)."""
        if self.space is not Space.EPI:
            raise ValueError("only epigraph stores carry a gamma bound")
        lo = self.box.lower.copy()
        if value > lo[-1]:
            lo[-1] = min(value, self.box.upper[-1])
            self.box = Box(lo, self.box.upper)

    def keep(self, indices: Sequence[int]) -> "CutStore":
        other = self.copy()
        idx = sorted(set(int(i) for i in indices))
        other.cuts = [self.cuts[i] for i in idx]
        other._keys = self._keys[idx] if idx else np.zeros((0, self.dim + 1))
        other._rows = self._rows[idx] if idx else np.zeros((0, self.dim))
        other._rhs = self._rhs[idx] if idx else np.zeros(0)
        return other

    # -- views ----------------------------------------------------------------
    def matrix(self) -> tuple[np.ndarray, np.ndarray, list[int]]:
        """All rows (permanent ones first) with their ids."""
        if self.cuts:
            A = np.vstack([self.fixed_A, self._rows])
            b = np.concatenate([self.fixed_b, self._rhs])
        else:
            A, b = self.fixed_A, self.fixed_b
        ids = list(self._fixed_ids) + [c.uid for c in self.cuts]
        return A, b, ids

    def contains(self, point, tol: float = 1e-9) -> bool:
        return not self.violations(point, tol)

    def violations(self, point, tol: float = 1e-9) -> list[int]:
        """Indices of cuts violated at point by more than tol*(1 + scale)."""
        if not self.cuts:
            return []
        p = as_point(point)
        rhs = self._rhs
        lhs = self._rows @ p
        scale = np.abs(rhs) + np.abs(self._rows) @ np.abs(p)
        return [int(i) for i in np.flatnonzero(lhs - rhs > tol * (1.0 + scale))]

    def dump(self) -> str:
        """Plain-text snapshot: box line, then `a_1 .. a_n g rhs` per cut."""
        n = self.n
        lo, hi = self.box.lower, self.box.upper
        head = ["box", self.space.value] + [f"{float(a)!r}:{float(b)!r}" for a, b in zip(lo, hi)]
        lines = [" ".join(head)]
        for c in self.cuts:
            vals = list(c.normal[:n]) + [c.gamma_coeff, c.rhs]
            lines.append(" ".join(repr(float(v)) for v in vals))
        return "\n".join(lines) + "\n"

    @staticmethod
    def load(text: str) -> "CutStore":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        space = Space(head[1])
        bounds = [tok.split(":") for tok in head[2:]]
        box = Box(np.array([float(a) for a, _ in bounds]), np.array([float(b) for _, b in bounds]))
        store = CutStore(box, space)
        for ln in lines[1:]:
            vals = [float(t) for t in ln.split()]
            store.add(Cut(np.array(vals[:-2]), vals[-2], vals[-1]))
        return store


def joint_store(region: CutStore, epi: CutStore) -> CutStore:
    """Epigraph-space store whose x part is also limited by the region cuts."""
    if region.space is not Space.X or epi.space is not Space.EPI:
        raise ValueError("joint_store expects a region store and an epigraph store")
    n = region.n
    xbox = Box(epi.box.lower[:n], epi.box.upper[:n]).intersect(region.box)
    box = Box(np.append(xbox.lower, epi.box.lower[-1]), np.append(xbox.upper, epi.box.upper[-1]))
    lifted = np.hstack([region.fixed_A, np.zeros((region.fixed_A.shape[0], 1))])
    out = CutStore(box, Space.EPI, np.vstack([lifted, epi.fixed_A]), np.concatenate([region.fixed_b, epi.fixed_b]))
    # region and epigraph cuts are already deduplicated within their own stores
    out.cuts = list(region.cuts) + list(epi.cuts)
    out._rows = np.vstack([np.hstack([region._rows, np.zeros((len(region.cuts), 1))]), epi._rows])
    out._rhs = np.concatenate([region._rhs, epi._rhs])
    out._keys = np.vstack([
        np.hstack([region._keys[:, :n], np.zeros((len(region.cuts), 1)), region._keys[:, n:]]),
        epi._keys,
    ]) if out.cuts else np.zeros((0, n + 2))
    return out


@dataclass
class LPSolution:
    x: np.ndarray
    value: float
    basis: _simplex.Basis
    pivots: int

    def __iter__(self):
        yield self.x
        yield self.value


def lp_minimize(store: CutStore, cost, basis: Optional[_simplex.Basis] = None) -> LPSolution:
    """Vertex minimizer of <cost, .> over box and cuts.

    ``basis`` from an earlier call on the same store lineage restarts the
    dual simplex from that vertex; results stay deterministic either way.
    Raises Infeasible when the polyhedron is empty.
    """
    c = as_point(cost)
    if c.size != store.dim:
        raise ValueError("cost dimension does not match the store")
    A, b, ids = store.matrix()
    out = _simplex.solve_lp(A, b, c, store.box.lower, store.box.upper, ids, basis)
    return LPSolution(out.x, out.value, out.basis, out.pivots)


def qp_project(store: CutStore, y, extra: Optional[tuple[np.ndarray, np.ndarray]] = None) -> np.ndarray:
    """Euclidean projection of y onto box, fixed rows, cuts and extra rows."""
    y = as_point(y)
    d = store.dim
    A, b, _ = store.matrix()
    eye = np.eye(d)
    blocks = [A, eye, -eye]
    rhs = [b, store.box.upper, -store.box.lower]
    if extra is not None:
        blocks.append(np.asarray(extra[0], dtype=float).reshape(-1, d))
        rhs.append(np.asarray(extra[1], dtype=float).reshape(-1))
    return _activeset.project(y, np.vstack(blocks), np.concatenate(rhs)).x


def active_cuts(store: CutStore, at, tol: float = 1e-8) -> list[int]:
    if not store.cuts:
        return []
    p = as_point(at)
    rhs = store._rhs
    lhs = store._rows @ p
    return [int(i) for i in np.flatnonzero(np.abs(lhs - rhs) <= tol * (1.0 + np.abs(rhs)))]


def apply_drop(store: CutStore, strategy, at=None, n: Optional[int] = None, tol: float = 1e-8) -> CutStore:
    """Store to use as the base set Q at a refresh event; the box is untouched."""
    kind = DropKind(strategy)
    if kind is DropKind.KEEP_ALL:
        return store.copy()
    if kind is DropKind.FULL_RESET:
        return store.keep([])
    if kind is DropKind.ACTIVE_ONLY:
        if at is None:
            raise ValueError("active_only needs the current iterate")
        return store.keep(active_cuts(store, at, tol))
    n = store.n if n is None else n
    k = len(store.cuts)
    return store.keep(range(max(0, k - (n + 1)), k))
