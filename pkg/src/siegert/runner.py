"""Pipeline runner: potential -> basis -> sweep -> DO -> width -> oracle -> files."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__, _kernels
from .basis import LaguerreBasis, assemble_factors
from .config import ExperimentConfig
from .exact import ExactSolverError, find_resonance
from .stabilization import localize, sweep
from .width import WidthError, gamma_from_width_input

log = logging.getLogger(__name__)

SCHEMA = "siegert-csv v1"
RESONANCE_COLUMNS = (
    "n0", "lambda_star", "do_value", "energy_var", "density_var", "gamma_var",
    "energy_exact", "gamma_exact", "residual_exact", "rel_err_energy", "rel_err_gamma", "status",
)


@dataclass
class ResonanceRow:
    n0: int
    lambda_star: float
    do_value: float
    energy_var: float
    density_var: float
    gamma_var: float | None = None
    energy_exact: float | None = None
    gamma_exact: float | None = None
    residual_exact: float | None = None
    status: str = "ok"

    @property
    def rel_err_energy(self):
        if self.energy_exact is None or self.energy_exact == 0:
            return None
        return abs(self.energy_var - self.energy_exact) / abs(self.energy_exact)

    @property
    def rel_err_gamma(self):
        if self.gamma_exact is None or self.gamma_var is None or self.gamma_exact == 0:
            return None
        return abs(self.gamma_var - self.gamma_exact) / abs(self.gamma_exact)

    def values(self):
        return [getattr(self, c) for c in RESONANCE_COLUMNS]


@dataclass
class RunReport:
    rows: list[ResonanceRow]
    provenance: dict = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    buf.write(f"# {SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue())
    return path


def _write_dat(path: Path, header, rows):
    lines = ["# " + " ".join(header)]
    for row in rows:
        lines.append(" ".join(fmt(v) if fmt(v) != "" else "nan" for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def variational_rows(config: ExperimentConfig, spectrum) -> list[ResonanceRow]:
    rows = []
    r0 = config.family.r0
    for n in range(config.do.band[0], config.do.band[1] + 1):
        for est in localize(spectrum, n, config.do.window, config.do.threshold):
            row = ResonanceRow(est.n0, est.lambda_star, est.do_value, est.energy, est.density)
            try:
                row.gamma_var = gamma_from_width_input(est.width_input(r0, config.l))
            except (WidthError, ValueError) as exc:
                row.status = f"width-error: {exc}"
            rows.append(row)
    rows.sort(key=lambda r: (r.n0, r.lambda_star))
    return rows


def attach_oracle(config: ExperimentConfig, rows: list[ResonanceRow]) -> None:
    if config.l > 1:
        for row in rows:
            row.status = "oracle-skipped: closed forms only for l <= 1"
        return
    for row in rows:
        if row.status != "ok":
            continue
        if config.oracle.guess == "variational":
            guess = complex(row.energy_var, -0.5 * row.gamma_var)
        else:
            guess = complex(row.energy_var, -1e-3 * abs(row.energy_var))
        try:
            res = find_resonance(config.family.at(row.lambda_star), config.l, guess, tol=config.oracle.tolerance)
        except ExactSolverError as exc:
            row.status = f"oracle-error: {type(exc).__name__}: {exc}"
            continue
        row.energy_exact = res.energy.re
        row.gamma_exact = res.gamma
        row.residual_exact = res.residual


def run(config: ExperimentConfig) -> RunReport:
    """Run the full pipeline and write the configured tables."""
    timings = {}
    t0 = time.perf_counter()
    basis = LaguerreBasis(config.N, config.beta)
    factors = assemble_factors(basis, config.family, config.l)
    timings["assemble"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    grid = config.sweep.grid
    spectrum = sweep(factors, grid, levels=config.levels_needed)
    timings["sweep"] = time.perf_counter() - t1

    t1 = time.perf_counter()
    rows = variational_rows(config, spectrum)
    timings["localize"] = time.perf_counter() - t1

    if config.oracle.enabled:
        t1 = time.perf_counter()
        attach_oracle(config, rows)
        timings["oracle"] = time.perf_counter() - t1

    out = config.output.directory
    out.mkdir(parents=True, exist_ok=True)
    files = []
    tables = {}
    if "spectrum" in config.output.tables:
        k = config.output.spectrum_levels
        header = ["lambda"] + [f"E_{n}" for n in range(1, k + 1)]
        tables["spectrum"] = (header, [[lam, *spectrum.energies[j, :k]] for j, lam in enumerate(grid)])
    if "do_curves" in config.output.tables:
        from .stabilization import do_curve

        band = range(config.do.band[0], config.do.band[1] + 1)
        curves = [do_curve(spectrum, n, config.do.window, refine=False) for n in band]
        header = ["lambda"] + [f"D_{n}" for n in band]
        lams = curves[0].lambdas
        tables["do_curves"] = (header, [[lam, *(c.values[j] for c in curves)] for j, lam in enumerate(lams)])
    if "resonances" in config.output.tables:
        tables["resonances"] = (list(RESONANCE_COLUMNS), [r.values() for r in rows])
    for name, (header, data) in tables.items():
        files.append(_write_csv(out / f"{name}.csv", header, data))
        if config.output.dat:
            files.append(_write_dat(out / f"{name}.dat", header, data))

    timings["total"] = time.perf_counter() - t0
    provenance = {
        "schema": SCHEMA,
        "config_sha256": config.source_hash,
        "versions": {
            "siegert": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "numba_kernels": _kernels.USE_NUMBA,
        },
        "timings_s": timings,
        "rows": len(rows),
    }
    report_path = out / "run_report.json"
    report_path.write_text(json.dumps(provenance, indent=2, sort_keys=True) + "\n")
    files.append(report_path)
    return RunReport(rows, provenance, files)


# --- comparison -----------------------------------------------------------------

@dataclass
class RowVerdict:
    n0: int
    lambda_star: float
    status: str
    gamma_var: float | None
    gamma_exact: float | None
    rel_err_gamma: float | None
    energy_var: float | None
    energy_exact: float | None
    rel_err_energy: float | None
    passed: bool


def _num(s):
    return None if s in ("", None) else float(s)


def read_resonances(path) -> list[ResonanceRow]:
    path = Path(path)
    if path.is_dir():
        path = path / "resonances.csv"
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    rows = []
    for rec in csv.DictReader(lines):
        rows.append(ResonanceRow(
            int(rec["n0"]), float(rec["lambda_star"]), float(rec["do_value"]), float(rec["energy_var"]),
            float(rec["density_var"]), _num(rec["gamma_var"]), _num(rec["energy_exact"]),
            _num(rec["gamma_exact"]), _num(rec["residual_exact"]), rec["status"],
        ))
    return rows


def compare(rows: list[ResonanceRow], tol_gamma: float, tol_energy: float) -> dict:
    """Per-row relative-error verdicts; a row without oracle values fails."""
    verdicts = []
    for r in rows:
        eg, ee = r.rel_err_gamma, r.rel_err_energy
        ok = r.status == "ok" and eg is not None and ee is not None and eg <= tol_gamma and ee <= tol_energy
        verdicts.append(RowVerdict(r.n0, r.lambda_star, r.status, r.gamma_var, r.gamma_exact, eg,
                                   r.energy_var, r.energy_exact, ee, ok))
    n_fail = sum(not v.passed for v in verdicts)
    return {
        "tol_gamma": tol_gamma,
        "tol_energy": tol_energy,
        "rows": len(verdicts),
        "failed": n_fail,
        "passed": n_fail == 0,
        "warning": "empty report: vacuous pass" if not verdicts else None,
        "verdicts": [asdict(v) for v in verdicts],
    }


def format_summary(summary: dict) -> str:
    def g(x, spec=".4g"):
        return "-" if x is None or (isinstance(x, float) and math.isnan(x)) else format(x, spec)

    lines = [f"{'n0':>4} {'lambda*':>10} {'Gamma_var':>11} {'Gamma_exact':>11} {'relerr_G':>9} "
             f"{'E_var':>11} {'E_exact':>11} {'relerr_E':>9}  verdict"]
    for v in summary["verdicts"]:
        tag = "PASS" if v["passed"] else ("FAIL" if v["status"] == "ok" else f"FAIL ({v['status']})")
        lines.append(
            f"{v['n0']:>4} {v['lambda_star']:>10.5f} {g(v['gamma_var']):>11} {g(v['gamma_exact']):>11} "
            f"{g(v['rel_err_gamma'], '.3%'):>9} {g(v['energy_var']):>11} {g(v['energy_exact']):>11} "
            f"{g(v['rel_err_energy'], '.3%'):>9}  {tag}"
        )
    if summary["warning"]:
        lines.append(f"warning: {summary['warning']}")
    lines.append(
        f"{summary['rows'] - summary['failed']}/{summary['rows']} rows within "
        f"tol_gamma={summary['tol_gamma']:g}, tol_energy={summary['tol_energy']:g}: "
        + ("PASS" if summary["passed"] else "FAIL")
    )
    return "\n".join(lines)
