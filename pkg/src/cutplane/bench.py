"""Benchmark problems, reference optima and the suite runner."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .core_model import Box, FunctionOracle, ProblemInstance, RunResult, SimpleRegion, Status

PROBLEMS = ("p15", "p25", "p34")
MAX_N = 64


def _check(pid: str, n: int) -> None:
    if pid not in PROBLEMS:
        raise ValueError(f"unknown problem {pid!r}; expected one of {', '.join(PROBLEMS)}")
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}], got {n}")


def _weighted_quadratic(weights, center, shift=0.0, name="") -> FunctionOracle:
    """sum_i w_i (x_i - c_i)^2 + shift."""
    w = np.asarray(weights, dtype=float)
    c = np.asarray(center, dtype=float)

    def value(x):
        d = x - c
        return float(w @ (d * d)) + shift

    def grad(x):
        return 2.0 * w * (x - c)

    return FunctionOracle(value=value, subgradient=grad, mu=float(w.min()), name=name)


def make_problem(pid: str, n: int) -> ProblemInstance:
    _check(pid, n)
    idx = np.arange(1, n + 1, dtype=float)
    zero = np.zeros(n)
    if pid == "p15":
        cons = [_weighted_quadratic(1.0 / (idx * j), zero, -1.0, name=f"f{j}") for j in range(1, n + 1)]
        side = 2.0 * math.sqrt(n)
        prob = ProblemInstance(
            objective=FunctionOracle.affine(-np.ones(n), name="linear"),
            constraints=cons,
            box_M0=Box.cube(n, -side, side),
            interior_points=[zero],
            mu=1.0 / n**2,
            name=f"p15(n={n})",
        )
    elif pid == "p25":
        box = Box.cube(n, -50.0, 50.0)
        prob = ProblemInstance(
            objective=_weighted_quadratic(idx**2, zero, name="f"),
            constraints=[],
            box_M0=box,
            simple_region=SimpleRegion(box),
            epi_anchor=np.append(zero, 100.0),
            gamma0_bar=-1e6,
            alpha_lower=0.0,
            mu=1.0,
            name=f"p25(n={n})",
        )
    else:
        # each coordinate of the feasible set satisfies |x_i - 5| <= 40
        cons = [_weighted_quadratic(idx, np.full(n, 5.0), -1600.0, name="g")]
        prob = ProblemInstance(
            objective=_weighted_quadratic(idx, np.full(n, 10.0), name="f"),
            constraints=cons,
            box_M0=Box.cube(n, -40.0, 50.0),
            interior_points=[np.full(n, 5.0)],
            epi_anchor=np.append(np.full(n, 10.0), 100.0),
            gamma0_bar=-1e6,
            alpha_lower=0.0,
            mu=1.0,
            name=f"p34(n={n})",
        )
    prob.optimum_hint = oracle_optimum(pid, n)
    return prob


def oracle_optimum(pid: str, n: int) -> tuple[float, np.ndarray]:
    """Closed-form optimal value and minimizer."""
    _check(pid, n)
    idx = np.arange(1, n + 1, dtype=float)
    s = math.sqrt(n * (n + 1) / 2.0)
    if pid == "p15":
        return -s, idx / s
    if pid == "p25":
        return 0.0, np.zeros(n)
    if 25.0 * n * (n + 1) / 2.0 <= 1600.0:
        return 0.0, np.full(n, 10.0)
    return (40.0 - 5.0 * s) ** 2, np.full(n, 5.0 + 40.0 / s)


def _project_weighted_ball(y, weights, center, radius_sq):
    """Projection onto {sum w_i (x_i - c_i)^2 <= r} by bisection on the multiplier."""
    d = y - center
    if weights @ (d * d) <= radius_sq:
        return y.copy()
    lo, hi = 0.0, 1.0
    while weights @ ((d / (1.0 + 2.0 * hi * weights)) ** 2) > radius_sq:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if weights @ ((d / (1.0 + 2.0 * mid * weights)) ** 2) > radius_sq:
            lo = mid
        else:
            hi = mid
    return center + d / (1.0 + 2.0 * hi * weights)


def projected_gradient_optimum(pid: str, n: int, tol: float = 1e-8, max_iters: int = 2_000_000):
    """Reference optimum by projected gradient steps with exact projections.

    Shares nothing with the cutting-plane code.  For p15 the feasible set is
    the j = 1 ellipsoid, since every other constraint is a scaled-down copy.
    """
    _check(pid, n)
    idx = np.arange(1, n + 1, dtype=float)
    if pid == "p15":
        c = -np.ones(n)
        w = 1.0 / idx
        proj = lambda z: _project_weighted_ball(z, w, np.zeros(n), 1.0)  # noqa: E731
        grad = lambda x: c  # noqa: E731
        f = lambda x: float(c @ x)  # noqa: E731
        step = 1.0
    elif pid == "p25":
        w = idx**2
        proj = lambda z: np.clip(z, -50.0, 50.0)  # noqa: E731
        grad = lambda x: 2.0 * w * x  # noqa: E731
        f = lambda x: float(w @ (x * x))  # noqa: E731
        step = 1.0 / (2.0 * w.max())
    else:
        proj = lambda z: _project_weighted_ball(z, idx, np.full(n, 5.0), 1600.0)  # noqa: E731
        grad = lambda x: 2.0 * idx * (x - 10.0)  # noqa: E731
        f = lambda x: float(idx @ ((x - 10.0) ** 2))  # noqa: E731
        step = 1.0 / (2.0 * idx.max())
    x = proj(np.ones(n))
    for _ in range(max_iters):
        x_new = proj(x - step * grad(x))
        if np.linalg.norm(x_new - x) <= tol * step:
            x = x_new
            break
        x = x_new
    return f(x), x


# ---------------------------------------------------------------------------
# suite

CSV_HEADER = ["method", "n", "eps_code", "drop_code", "iterations", "wall_ms",
              "final_f", "final_gap", "f_star", "status"]
INVALID = "Invalid"


@dataclass
class SuiteRow:
    method: str
    n: int
    eps_code: str
    drop_code: str
    iterations: int
    wall_ms: float
    final_f: float
    final_gap: float
    f_star: float
    status: str

    def cells(self) -> list[str]:
        return [self.method, str(self.n), self.eps_code, self.drop_code, str(self.iterations),
                f"{self.wall_ms:.1f}", repr(float(self.final_f)), repr(float(self.final_gap)),
                repr(float(self.f_star)), self.status]


def _run_cell(tokens: Sequence[str]) -> SuiteRow:
    from .runspec import RunSpec, execute

    try:
        spec = RunSpec.from_tokens(tokens, suite=True)
    except Exception as exc:  # noqa: BLE001 - every failure becomes a row
        toks = list(tokens)
        method = _peek(toks, "--method")
        n = _peek(toks, "--n")
        return SuiteRow(method or "?", int(n) if n and n.isdigit() else 0, _peek(toks, "--eps") or "",
                        _peek(toks, "--drop") or "", 0, 0.0, math.nan, math.nan, math.nan,
                        f"{INVALID}: {exc}")
    t0 = time.perf_counter()
    try:
        res = execute(spec)
        status = res.status.value
    except Exception as exc:  # noqa: BLE001
        res = None
        status = f"{Status.ABORTED.value}: {exc}"
    wall = (time.perf_counter() - t0) * 1000.0
    f_star = spec.f_star()
    if res is None:
        return SuiteRow(spec.method, spec.n, spec.eps_label, spec.drop_label, 0, wall,
                        math.nan, math.nan, f_star, status)
    return SuiteRow(spec.method, spec.n, spec.eps_label, spec.drop_label, res.iterations, wall,
                    res.final_value, res.final_value - f_star, f_star, status)


def _peek(tokens: list[str], flag: str) -> Optional[str]:
    for k, tok in enumerate(tokens):
        if tok == flag and k + 1 < len(tokens):
            return tokens[k + 1]
        if tok.startswith(flag + "="):
            return tok.split("=", 1)[1]
    return None


def read_matrix(text: str) -> list[list[str]]:
    """One cell per line, whitespace-separated tokens, '#' starts a comment."""
    cells = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            cells.append(line.split())
    return cells


def rows_to_csv(rows: Iterable[SuiteRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow(row.cells())
    return buf.getvalue()


def run_suite(matrix: Sequence[Sequence[str]], out_path=None, jobs: int = 1) -> list[SuiteRow]:
    """Run every cell; rows keep the matrix order whatever the completion order."""
    cells = [list(c) for c in matrix]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]
    if out_path is not None:
        Path(out_path).write_text(rows_to_csv(rows), encoding="utf-8", newline="")
    return rows
