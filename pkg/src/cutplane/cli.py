"""Command-line entry point: ``cutplane run | suite | oracle``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bench
from .core_model import Status
from .errors import InvalidConfig
from .runspec import RunSpec, UsageError, _Parser, add_run_arguments, execute

EXIT_CODES = {Status.CONVERGED: 0, Status.ITER_LIMIT: 2, Status.ABORTED: 3}
EXIT_USAGE = 64


def _num(v: float) -> str:
    return f"{v:.17g}"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cutplane", description="Cutting-plane methods with cut dropping.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one method on one problem")
    add_run_arguments(run)
    run.add_argument("--trace", action="store_true", help="print one line per iteration")
    run.add_argument("--output", help="also write the result as a one-row CSV file")

    suite = sub.add_parser("suite", help="run a matrix file and write CSV")
    suite.add_argument("matrix", help="file with one run per line (same flags as `run`)")
    suite.add_argument("--output", help="CSV path (default: stdout)")
    suite.add_argument("--jobs", type=int, default=1)

    oracle = sub.add_parser("oracle", help="print the reference optimum")
    oracle.add_argument("--problem", required=True, choices=bench.PROBLEMS)
    oracle.add_argument("--n", required=True, type=int)
    return p


def _cmd_run(ns) -> int:
    spec = RunSpec.from_namespace(ns)
    res = execute(spec)
    if ns.trace:
        print("# i f(y) F(y) gamma cuts_region cuts_epi refresh")
        for rec in res.trace:
            print(rec.line())
    f_star = spec.f_star()
    print(
        f"status={res.status.value} method={spec.method} problem={spec.problem} n={spec.n} "
        f"iterations={res.iterations} refreshes={res.refresh_count} final_f={_num(res.final_value)} "
        f"F={_num(res.feasibility_residual)} lower={_num(res.lower_bound)} f_star={_num(f_star)}"
    )
    if res.status is not Status.CONVERGED and res.message:
        print(res.message.splitlines()[0], file=sys.stderr)
    if ns.output:
        row = bench.SuiteRow(spec.method, spec.n, spec.eps_label, spec.drop_label, res.iterations, 0.0,
                             res.final_value, res.final_value - f_star, f_star, res.status.value)
        Path(ns.output).write_text(bench.rows_to_csv([row]), encoding="utf-8", newline="")
    return EXIT_CODES[res.status]


def _cmd_suite(ns) -> int:
    if ns.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    try:
        text = Path(ns.matrix).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read matrix file: {exc}") from exc
    rows = bench.run_suite(bench.read_matrix(text), ns.output, ns.jobs)
    if ns.output is None:
        sys.stdout.write(bench.rows_to_csv(rows))
    return 0


def _cmd_oracle(ns) -> int:
    try:
        f_star, x_star = bench.oracle_optimum(ns.problem, ns.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"f_star={_num(f_star)}")
    print("x_star=" + ",".join(_num(v) for v in x_star))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
        handler = {"run": _cmd_run, "suite": _cmd_suite, "oracle": _cmd_oracle}[ns.command]
        return handler(ns)
    except (UsageError, InvalidConfig) as exc:
        print(f"cutplane: error: {exc}", file=sys.stderr)
        print(parser.format_usage().rstrip(), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
