import csv
import math

import pytest

from cutplane.cli import main


def fields(line):
    return dict(tok.split("=", 1) for tok in line.split())


def test_run_converges(capsys):
    code = main("run --method 1.1 --problem p15 --n 10 --eps a1 --drop b1 --stop-eps 1e-5".split())
    out = capsys.readouterr().out.strip().splitlines()
    assert code == 0
    summary = fields(out[-1])
    assert summary["status"] == "Converged"
    assert float(summary["final_f"]) == pytest.approx(-math.sqrt(55), abs=1e-2)


def test_oracle_prints_f_star(capsys):
    assert main("oracle --problem p25 --n 5".split()) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "f_star=0"
    assert out[1] == "x_star=" + ",".join(["0"] * 5)


@pytest.mark.parametrize("argv", [
    "run --method 2.3 --problem p25 --n 2 --eps c9",
    "run --method 1.1 --problem p15 --n 2 --bogus",
    "run --method 1.1 --problem p25 --n 2",
    "run --method 3.3 --problem p34 --n 2 --eps a1",
    "oracle --problem p15 --n 0",
    "frobnicate",
])
def test_usage_errors(argv, capsys):
    assert main(argv.split()) == 64
    assert "usage" in capsys.readouterr().err


def test_iter_limit_exit(capsys):
    assert main("run --method 1.1 --problem p15 --n 5 --max-iters 2".split()) == 2
    assert fields(capsys.readouterr().out.strip())["status"] == "IterLimit"


def test_aborted_exit(monkeypatch, capsys):
    from cutplane import cli
    from cutplane.core_model import Status

    def fake(spec, monitor=None):
        from cutplane.core_model import RunResult
        import numpy as np
        return RunResult(np.zeros(spec.n), 0.0, 0.0, 1, 0, Status.ABORTED, message="store empty")

    monkeypatch.setattr(cli, "execute", fake)
    assert main("run --method 2.1 --problem p25 --n 2".split()) == 3
    assert "store empty" in capsys.readouterr().err


def test_trace_lines(capsys):
    assert main("run --method 2.1 --problem p25 --n 2 --trace".split()) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "# i f(y) F(y) gamma cuts_region cuts_epi refresh"
    body = lines[1:-1]
    assert body and all(len(l.split()) == 7 for l in body)
    assert [int(l.split()[0]) for l in body] == list(range(len(body)))


def test_suite_command(tmp_path, capsys):
    matrix = tmp_path / "m.txt"
    matrix.write_text("--method 1.1 --problem p15 --n 2\n--method 2.2 --problem p25 --n 2 --drop b2\n")
    out = tmp_path / "o.csv"
    assert main(["suite", str(matrix), "--output", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["status"] for r in rows] == ["Converged", "Converged"]
    assert main(["suite", str(tmp_path / "missing.txt")]) == 64


def test_run_output_csv(tmp_path, capsys):
    out = tmp_path / "one.csv"
    assert main(f"run --method 2.4 --problem p25 --n 2 --output {out}".split()) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1 and rows[0]["method"] == "2.4"
