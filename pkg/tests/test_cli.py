import csv
import subprocess
import sys

import pytest

from ruindiv import __version__
from ruindiv.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, main


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def read_csv(path):
    with open(path) as fh:
        comment = fh.readline()
        rows = list(csv.reader(fh))
    return comment, rows[0], rows[1:]


def test_solve_unconstrained_example1(tmp_path, capsys):
    assert run(tmp_path, "solve-unconstrained", "--paper-example", "1") == EXIT_OK
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("b0 = "))
    assert float(line.split("=")[1]) == pytest.approx(0.42, abs=0.02)
    comment, header, rows = read_csv(tmp_path / "solve-unconstrained.csv")
    assert comment.startswith("# ")
    assert header[0] == "x" and len(rows) > 1


def test_solve_unconstrained_example2(tmp_path, capsys):
    assert run(tmp_path, "solve-unconstrained", "--paper-example", "2") == EXIT_OK
    out = capsys.readouterr().out
    assert "b0 = 0.000000" in out
    lb = float(next(l for l in out.splitlines() if l.startswith("lambda_bar")).split("=")[1])
    assert lb == pytest.approx(6.67, abs=0.06)


def test_slack_constraint_is_inactive(tmp_path, capsys):
    assert run(tmp_path, "solve-constrained", "--paper-example", "1", "--x", "1", "--K", "1") == EXIT_OK
    _, header, rows = read_csv(tmp_path / "solve-constrained.csv")
    row = dict(zip(header, rows[0]))
    assert row["status"] == "Inactive"
    assert float(row["Lambda"]) == 0.0
    assert float(row["b_star"]) == pytest.approx(0.4196, abs=1e-4)


def test_infeasible_exit_code(tmp_path, capsys):
    code = run(tmp_path, "solve-constrained", "--paper-example", "1", "--x", "1", "--K", "0.3")
    assert code == EXIT_INFEASIBLE


def test_duality_report_binding(tmp_path, capsys):
    assert run(tmp_path, "duality-report", "--paper-example", "1", "--x", "1", "--K", "0.85") == EXIT_OK
    _, header, rows = read_csv(tmp_path / "duality-report.csv")
    gaps = [float(dict(zip(header, r))["gap"]) for r in rows]
    assert all(abs(g) < 1e-3 for g in gaps)
    assert dict(zip(header, rows[0]))["status"] == "Binding"


def test_csv_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["lambda-map", "--paper-example", "1", "--out", str(d)]) == EXIT_OK
    assert (a / "lambda-map.csv").read_bytes() == (b / "lambda-map.csv").read_bytes()


def test_svg_output(tmp_path, capsys):
    assert run(tmp_path, "psi-curve", "--paper-example", "1", "--b", "0.5,2", "--format", "svg") == EXIT_OK
    assert (tmp_path / "psi-curve.svg").read_text().startswith("<svg")
    assert (tmp_path / "psi-curve.csv").exists()


def test_band_commands(tmp_path, capsys):
    assert run(tmp_path, "band-curve", "--paper-example", "3", "--lambda", "0,1,2") == EXIT_OK
    _, header, rows = read_csv(tmp_path / "band-curve.csv")
    assert len(rows) == 3


def test_simulate(tmp_path, capsys):
    assert run(tmp_path, "simulate", "--paper-example", "1", "--x", "1", "--b", "1", "--paths", "2000") == EXIT_OK
    assert (tmp_path / "simulate.csv").exists()


def test_simulate_stable_rejected(tmp_path, capsys):
    assert run(tmp_path, "simulate", "--paper-example", "3", "--paths", "100") == EXIT_CONFIG


def test_band_command_on_barrier_regime(tmp_path, capsys):
    assert run(tmp_path, "band-curve", "--paper-example", "1") == EXIT_CONFIG


def test_unknown_flag(tmp_path, capsys):
    assert run(tmp_path, "scale", "--paper-example", "1", "--bogus") == EXIT_USAGE


def test_unknown_command(tmp_path, capsys):
    assert run(tmp_path, "nonsense") == EXIT_USAGE


def test_invalid_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('q = -1\n[model]\nkind = "stable"\nalpha = 3.0\n')
    assert run(tmp_path, "scale", "--config", str(cfg)) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "config error: q:" in err and "model.alpha" in err


def test_config_file_round_trip(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        'q = 0.2\n[model]\nkind = "cramer-lundberg"\nc = 1.5\nlam = 1.0\n'
        '[model.claims]\ndist = "exponential"\nrate = 2.0\n[problem]\nx = [0.5, 2.0]\n'
    )
    assert run(tmp_path, "scale", "--config", str(cfg)) == EXIT_OK
    _, header, rows = read_csv(tmp_path / "scale.csv")
    row = dict(zip(header, rows[1]))
    assert float(row["x"]) == 2.0
    assert float(row["W"]) == pytest.approx(1.3380000656878253, rel=1e-9)


def test_version_and_entry_point():
    out = subprocess.run([sys.executable, "-m", "ruindiv.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout
