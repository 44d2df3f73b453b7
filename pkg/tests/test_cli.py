import csv
import json

import numpy as np
import pytest

from siegert import cli, runner
from siegert.config import parse_config
from siegert.runner import RESONANCE_COLUMNS, ResonanceRow, compare, read_resonances

from conftest import config_text

SMALL = dict(N=60, band=(2, 20), points=101)


def write_config(tmp_path, name="exp.toml", **kw):
    opts = {**SMALL, **kw}
    path = tmp_path / name
    path.write_text(config_text(**opts))
    return path


def read_table(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# siegert-csv v1"
    return list(csv.DictReader(lines[1:]))


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    cfg = tmp / "exp.toml"
    cfg.write_text(config_text(**SMALL, directory="a"))
    assert cli.main(["run", str(cfg)]) == cli.EXIT_OK
    return tmp


def test_run_emits_tables(small_run):
    out = small_run / "a"
    for name in ("spectrum", "do_curves", "resonances"):
        assert (out / f"{name}.csv").exists()
    rows = read_table(out / "resonances.csv")
    assert list(rows[0]) == list(RESONANCE_COLUMNS)
    assert sum(r["status"] == "ok" for r in rows) >= len(rows) - 2
    assert all(r["status"] == "ok" or r["status"].startswith("oracle-error") for r in rows)
    spec = read_table(out / "spectrum.csv")
    assert len(spec) == 101 and list(spec[0])[:2] == ["lambda", "E_1"]
    report = json.loads((out / "run_report.json").read_text())
    assert report["rows"] == len(rows) and len(report["config_sha256"]) == 64


def test_floats_round_trip(small_run):
    rows = read_table(small_run / "a" / "resonances.csv")
    for r in rows:
        assert float(r["energy_var"]) == float(f"{float(r['energy_var']):.17g}")
        assert len(r["lambda_star"].replace("-", "").replace(".", "").lstrip("0").split("e")[0]) <= 17


def test_do_curve_table_bounds(small_run):
    rows = read_table(small_run / "a" / "do_curves.csv")
    vals = np.array([[float(v) for k, v in r.items() if k != "lambda"] for r in rows])
    assert np.all((vals >= 0) & (vals <= 2))


def test_deterministic_outputs(tmp_path, monkeypatch, small_run):
    cfg = write_config(tmp_path, directory="b")
    assert cli.main(["run", str(cfg)]) == 0
    for name in ("spectrum.csv", "do_curves.csv", "resonances.csv"):
        assert (tmp_path / "b" / name).read_bytes() == (small_run / "a" / name).read_bytes()


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("SIEGERT_OUTPUT_DIR", str(tmp_path / "env"))
    cfg = write_config(tmp_path, N=30, band=(2, 10), points=11, directory="ignored")
    assert cli.main(["run", str(cfg)]) == 0
    assert (tmp_path / "env" / "resonances.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_oracle_disabled(tmp_path, small_run):
    cfg = write_config(tmp_path, oracle=False, directory="c")
    assert cli.main(["run", str(cfg)]) == 0
    with_oracle = read_table(small_run / "a" / "resonances.csv")
    without = read_table(tmp_path / "c" / "resonances.csv")
    var_cols = ["n0", "lambda_star", "do_value", "energy_var", "density_var", "gamma_var"]
    assert [[r[c] for c in var_cols] for r in without] == [[r[c] for c in var_cols] for r in with_oracle]
    for r in without:
        assert r["energy_exact"] == r["gamma_exact"] == r["rel_err_gamma"] == ""


def test_dat_files(tmp_path):
    cfg = write_config(tmp_path, N=30, band=(2, 10), points=11, directory="d", extra="dat = true")
    assert cli.main(["run", str(cfg)]) == 0
    dat = (tmp_path / "d" / "spectrum.dat").read_text().splitlines()
    assert dat[0].startswith("# lambda E_1")
    assert len(dat[1].split()) == 11


def test_compare_exit_codes(small_run, tmp_path, capsys):
    out = tmp_path / "ok_rows"
    out.mkdir()
    ok = [r for r in read_resonances(small_run / "a") if r.status == "ok"]
    runner._write_csv(out / "resonances.csv", RESONANCE_COLUMNS, [r.values() for r in ok])
    assert cli.main(["compare", str(out), "--tol-gamma", "1e6", "--tol-energy", "1e6"]) == 0
    assert json.loads((out / "verdict.json").read_text())["passed"] is True
    assert cli.main(["compare", str(out / "resonances.csv"), "--tol-gamma", "1e-9", "--tol-energy", "1e-9"]) == 1
    text = capsys.readouterr().out
    assert "FAIL" in text and "relerr_G" in text
    verdict = json.loads((out / "verdict.json").read_text())
    assert verdict["passed"] is False and verdict["failed"] == verdict["rows"]
    bad = verdict["verdicts"][0]
    assert bad["gamma_var"] is not None and bad["gamma_exact"] is not None and bad["rel_err_gamma"] > 1e-9


def test_compare_lists_error_rows(small_run, capsys):
    assert cli.main(["compare", str(small_run / "a"), "--tol-gamma", "10", "--tol-energy", "10"]) == 1
    assert "oracle-error" in capsys.readouterr().out


def test_compare_empty_report(tmp_path, capsys):
    (tmp_path / "resonances.csv").write_text("# siegert-csv v1\n" + ",".join(RESONANCE_COLUMNS) + "\n")
    assert cli.main(["compare", str(tmp_path), "--tol-gamma", "0.1", "--tol-energy", "0.1"]) == 0
    assert "vacuous pass" in capsys.readouterr().out


def test_compare_rows_without_oracle_fail():
    row = ResonanceRow(3, 1.0, 0.1, 0.02, 0.001, 1e-5)
    assert compare([row], 1.0, 1.0)["passed"] is False


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[potential]\nV0 = 0.15\nDelta = 5.0\nr0 = 6.0\n[basis]\nN = 3\n")
    assert cli.main(["run", str(bad)]) == cli.EXIT_CONFIG
    assert "line 6" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.toml")]) == cli.EXIT_CONFIG


def test_compare_missing_report_exit_code(tmp_path):
    assert cli.main(["compare", str(tmp_path / "nope.csv"), "--tol-gamma", "1", "--tol-energy", "1"]) == cli.EXIT_IO


def test_pipeline_error_exit_code(tmp_path, monkeypatch, capsys):
    def boom(cfg):
        raise FloatingPointError("synthetic failure")

    monkeypatch.setattr(runner, "run", boom)
    assert cli.main(["run", str(write_config(tmp_path))]) == cli.EXIT_PIPELINE
    assert "synthetic failure" in capsys.readouterr().err


def test_dump_matrices(tmp_path):
    cfg = write_config(tmp_path, N=12, band=(2, 5), points=5)
    assert cli.main(["dump-matrices", str(cfg), "--out", str(tmp_path / "m")]) == 0
    H0 = np.loadtxt(tmp_path / "m" / "H0.csv", delimiter=",")
    assert H0.shape == (12, 12) and np.allclose(H0, H0.T)


def test_failed_candidate_is_tagged_not_fatal(monkeypatch):
    from siegert import exact

    def refuse(*a, **k):
        raise exact.NoConvergenceError("synthetic", 0.1, 1.0)

    monkeypatch.setattr(runner, "find_resonance", refuse)
    cfg = parse_config(config_text(N=40, band=(2, 12), points=51))
    from siegert.basis import LaguerreBasis, assemble_factors
    from siegert.stabilization import sweep

    f = assemble_factors(LaguerreBasis(cfg.N), cfg.family, cfg.l)
    rows = runner.variational_rows(cfg, sweep(f, cfg.sweep.grid, levels=cfg.levels_needed))
    runner.attach_oracle(cfg, rows)
    assert rows and all(r.status.startswith("oracle-error: NoConvergenceError") for r in rows)


def scaled_rows(scale):
    """Lengths divided by ``scale``, energies multiplied by scale^2, beta multiplied by scale."""
    s2 = scale * scale
    text = f"""
[potential]
V0 = {0.15 * s2}
Delta = {5.0 / scale}
r0 = {6.0 / scale}
[sweep]
lambda_min = 0.0
lambda_max = {10.0 * s2}
points = 101
[basis]
N = 60
beta = {float(scale)}
[do]
band = [2, 20]
[oracle]
enabled = false
"""
    cfg = parse_config(text)
    from siegert.basis import LaguerreBasis, assemble_factors
    from siegert.stabilization import sweep

    f = assemble_factors(LaguerreBasis(cfg.N, cfg.beta), cfg.family, cfg.l)
    return runner.variational_rows(cfg, sweep(f, cfg.sweep.grid, levels=cfg.levels_needed))


def test_beta_scaling_invariance():
    base, doubled = scaled_rows(1), scaled_rows(2)
    assert base and [r.n0 for r in base] == [r.n0 for r in doubled]
    for a, b in zip(base, doubled):
        assert b.lambda_star / 4 == pytest.approx(a.lambda_star, rel=1e-6)
        assert b.gamma_var / b.energy_var == pytest.approx(a.gamma_var / a.energy_var, rel=1e-6)


def test_read_resonances_round_trip(small_run):
    rows = read_resonances(small_run / "a")
    again = read_table(small_run / "a" / "resonances.csv")
    assert [runner.fmt(r.gamma_exact) for r in rows] == [r["gamma_exact"] for r in again]
