"""Runtime invariant checks against a known optimum.

Runners call the hooks below when given a monitor; failures are collected
rather than raised so a whole run can be audited at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boundary import BoundaryHit
from .cutstore import CutStore, Space


@dataclass
class InvariantMonitor:
    x_star: np.ndarray
    f_star: float
    mu: Optional[float] = None
    tol: float = 1e-9
    violations: list[str] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    _last_gamma: float = -math.inf
    _last_beta: float = math.inf

    def _bump(self, key: str) -> None:
        self.counts[key] = self.counts.get(key, 0) + 1

    def _fail(self, msg: str) -> None:
        if len(self.violations) < 200:
            self.violations.append(msg)

    @property
    def ok(self) -> bool:
        return not self.violations

    def _slack(self, value: float) -> float:
        return self.tol * (1.0 + abs(value))

    # lower-bound checks
    def lp_value(self, i: int, f_y: float) -> None:
        self._bump("lp_value")
        if f_y > self.f_star + self._slack(self.f_star):
            self._fail(f"iter {i}: relaxed objective {f_y!r} above f* {self.f_star!r}")

    def gamma(self, i: int, gamma: float, shift: float = 0.0) -> None:
        self._bump("gamma")
        bound = self.f_star + shift
        if gamma > bound + self._slack(bound):
            self._fail(f"iter {i}: gamma {gamma!r} above optimal value {bound!r}")

    def store(self, i: int, store: CutStore, shift: float = 0.0, event: str = "insert") -> None:
        """The optimum (lifted by f* + shift in epigraph space) must satisfy every cut."""
        self._bump("store")
        if store.space is Space.EPI:
            point = np.append(self.x_star, self.f_star + shift)
        else:
            point = self.x_star
        bad = store.violations(point, self.tol)
        if bad:
            c = store.cuts[bad[0]]
            self._fail(f"iter {i} after {event}: optimum violates {len(bad)} cut(s), first from {c.source.value}")

    def hit(self, i: int, hit: BoundaryHit) -> None:
        self._bump("hit")
        if hit.tol == 0.0:
            return
        if not (0.0 <= hit.membership_z <= hit.tol):
            self._fail(f"iter {i}: boundary point membership {hit.membership_z!r} outside [0, {hit.tol!r}]")
        if hit.membership_inner > 0.0:
            self._fail(f"iter {i}: inner partner membership {hit.membership_inner!r} positive")
        if not (1.0 <= hit.q <= 2.0):
            self._fail(f"iter {i}: overshoot factor {hit.q!r} outside [1, 2]")

    def refresh(self, k: int, x_k, eps_k: float) -> None:
        """Strong-convexity estimate ||x_k - x*|| <= sqrt(eps_k / mu)."""
        if self.mu is None or not math.isfinite(eps_k):
            return
        self._bump("refresh")
        dist = float(np.linalg.norm(np.asarray(x_k) - self.x_star))
        bound = math.sqrt(max(eps_k, 0.0) / self.mu) + 1e-6
        if dist > bound:
            self._fail(f"refresh {k}: distance {dist:.3e} exceeds certificate {bound:.3e}")

    def level(self, i: int, gamma: float, beta: float) -> None:
        self._bump("level")
        if gamma < self._last_gamma - self._slack(self._last_gamma):
            self._fail(f"iter {i}: gamma decreased from {self._last_gamma!r} to {gamma!r}")
        if beta > self._last_beta:
            self._fail(f"iter {i}: beta increased from {self._last_beta!r} to {beta!r}")
        self._last_gamma = max(self._last_gamma, gamma)
        self._last_beta = beta

    def summary(self) -> str:
        parts = " ".join(f"{k}={v}" for k, v in sorted(self.counts.items()))
        return f"checks[{parts}] violations={len(self.violations)}"
