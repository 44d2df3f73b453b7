"""Experiment configuration: TOML file to validated dataclasses.

Schema (all sections optional except ``[potential]``)::

    l = 0

    [potential]                 # either well+barrier parameters ...
    V0 = 0.15
    Delta = 5.0
    r0 = 6.0
    # ... or explicit segments; the lambda_slot segment (1-based) is swept
    # segments = [{r_end = 5.0, value = -0.15}, {r_end = 6.0, value = 0.0}]
    # lambda_slot = 2

    [sweep]
    lambda_min = 0.0
    lambda_max = 10.0
    points = 201

    [basis]
    N = 100
    beta = 1.0

    [do]
    band = [2, 30]              # inclusive eigen-index range
    threshold = 0.5
    window = [0.0, 10.0]        # defaults to the full sweep

    [oracle]
    enabled = true
    tolerance = 1e-12
    guess = "variational"       # or "energy-only"

    [output]
    directory = "out"
    tables = ["spectrum", "do_curves", "resonances"]
    spectrum_levels = 30
    dat = false

The environment variable ``SIEGERT_OUTPUT_DIR`` overrides ``output.directory``.
"""
from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .potentials import LambdaFamily, PotentialError, WellBarrierParams

OUTPUT_ENV = "SIEGERT_OUTPUT_DIR"
TABLES = ("spectrum", "do_curves", "resonances")
GUESSES = ("variational", "energy-only")


class ConfigError(ValueError):
    def __init__(self, message, field_path=None, line=None, source=None):
        where = []
        if source:
            where.append(str(source))
        if line:
            where.append(f"line {line}")
        if field_path:
            where.append(f"field '{field_path}'")
        prefix = ": ".join([", ".join(where)]) + ": " if where else ""
        super().__init__(prefix + message)
        self.field_path = field_path
        self.line = line


@dataclass(frozen=True)
class SweepConfig:
    lambda_min: float = 0.0
    lambda_max: float = 10.0
    points: int = 201

    @property
    def grid(self):
        return np.linspace(self.lambda_min, self.lambda_max, self.points)


@dataclass(frozen=True)
class DOConfig:
    band: tuple[int, int] = (2, 30)
    threshold: float = 0.5
    window: tuple[float, float] | None = None


@dataclass(frozen=True)
class OracleConfig:
    enabled: bool = True
    tolerance: float = 1e-12
    guess: str = "variational"


@dataclass(frozen=True)
class OutputConfig:
    directory: Path = Path("out")
    tables: tuple[str, ...] = TABLES
    spectrum_levels: int = 30
    dat: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    family: LambdaFamily
    l: int = 0
    N: int = 100
    beta: float = 1.0
    sweep: SweepConfig = field(default_factory=SweepConfig)
    do: DOConfig = field(default_factory=DOConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    well_barrier: WellBarrierParams | None = None
    source_hash: str = ""

    @property
    def levels_needed(self) -> int:
        return min(self.N, max(self.do.band[1], self.output.spectrum_levels))


class _Reader:
    """Pulls typed values out of the parsed TOML, tracking field paths for errors."""

    def __init__(self, text, source):
        self.text = text
        self.source = source

    def line_of(self, path):
        *section, key = path.split(".")
        headers = list(re.finditer(r"^\s*\[([^\]]+)\]", self.text, flags=re.M))
        if section:
            hit = [h for h in headers if h.group(1).strip() == section[0]]
            if not hit:
                return None
            start = hit[0].end()
            later = [h.start() for h in headers if h.start() > start]
        else:
            start, later = 0, [h.start() for h in headers]
        end = later[0] if later else len(self.text)
        m = re.compile(rf"^\s*{re.escape(key)}\s*=", flags=re.M).search(self.text, start, end)
        if m is None:
            return self.text.count("\n", 0, start) + 1 if section else None
        return self.text.count("\n", 0, m.start()) + 1

    def fail(self, path, message):
        raise ConfigError(message, path, self.line_of(path) if path else None, self.source)

    def get(self, table, key, kind, default, path):
        if key not in table:
            return default
        value = table[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is int and isinstance(value, bool):
            self.fail(path, f"expected integer, got {value!r}")
        if not isinstance(value, kind):
            self.fail(path, f"expected {kind.__name__}, got {type(value).__name__} {value!r}")
        return value

    def table(self, data, key):
        value = data.get(key, {})
        if not isinstance(value, dict):
            self.fail(key, "expected a table")
        return value


def _check_keys(reader, table, allowed, prefix):
    for key in table:
        if key not in allowed:
            path = f"{prefix}.{key}" if prefix else key
            reader.fail(path, f"unknown key (allowed: {', '.join(sorted(allowed))})")


def parse_config(text: str, source=None) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax error: {exc}", None, int(m.group(1)) if m else None, source) from None
    rd = _Reader(text, source)
    _check_keys(rd, data, {"l", "potential", "sweep", "basis", "do", "oracle", "output"}, "")

    l = rd.get(data, "l", int, 0, "l")
    if l < 0:
        rd.fail("l", "angular momentum must be >= 0")

    pot = rd.table(data, "potential")
    if not pot:
        rd.fail("potential", "missing [potential] section")
    _check_keys(rd, pot, {"V0", "Delta", "r0", "segments", "lambda_slot"}, "potential")
    wb = None
    try:
        if "segments" in pot:
            segs = pot["segments"]
            if not isinstance(segs, list) or not segs:
                rd.fail("potential.segments", "expected a non-empty array of {r_end, value} tables")
            pairs = []
            for j, seg in enumerate(segs):
                if not isinstance(seg, dict) or set(seg) != {"r_end", "value"}:
                    rd.fail("potential.segments", f"segment {j + 1} must have exactly r_end and value")
                pairs.append((float(seg["r_end"]), float(seg["value"])))
            slot = rd.get(pot, "lambda_slot", int, len(pairs), "potential.lambda_slot")
            family = LambdaFamily(tuple(pairs), slot - 1)
        else:
            for key in ("V0", "Delta", "r0"):
                if key not in pot:
                    rd.fail(f"potential.{key}", "required well+barrier parameter missing")
            wb = WellBarrierParams(
                rd.get(pot, "V0", float, None, "potential.V0"),
                rd.get(pot, "Delta", float, None, "potential.Delta"),
                rd.get(pot, "r0", float, None, "potential.r0"),
            )
            family = wb.family()
    except PotentialError as exc:
        rd.fail("potential", str(exc))

    sw = rd.table(data, "sweep")
    _check_keys(rd, sw, {"lambda_min", "lambda_max", "points"}, "sweep")
    sweep = SweepConfig(
        rd.get(sw, "lambda_min", float, 0.0, "sweep.lambda_min"),
        rd.get(sw, "lambda_max", float, 10.0, "sweep.lambda_max"),
        rd.get(sw, "points", int, 201, "sweep.points"),
    )
    if sweep.points < 3:
        rd.fail("sweep.points", "lambda grid needs at least 3 points")
    if not sweep.lambda_max > sweep.lambda_min:
        rd.fail("sweep.lambda_max", "lambda_max must exceed lambda_min")

    bs = rd.table(data, "basis")
    _check_keys(rd, bs, {"N", "beta"}, "basis")
    N = rd.get(bs, "N", int, 100, "basis.N")
    beta = rd.get(bs, "beta", float, 1.0, "basis.beta")
    if N < 10:
        rd.fail("basis.N", "basis size must be >= 10")
    if not beta > 0:
        rd.fail("basis.beta", "beta must be positive")

    dt = rd.table(data, "do")
    _check_keys(rd, dt, {"band", "threshold", "window"}, "do")
    band = rd.get(dt, "band", list, [2, min(30, N)], "do.band")
    if len(band) != 2 or not all(isinstance(b, int) for b in band) or not 1 <= band[0] <= band[1] <= N:
        rd.fail("do.band", f"band must be [first, last] with 1 <= first <= last <= N={N}")
    window = rd.get(dt, "window", list, None, "do.window")
    if window is not None:
        if len(window) != 2 or not window[0] < window[1]:
            rd.fail("do.window", "window must be [lambda_L, lambda_R] with lambda_L < lambda_R")
        window = (float(window[0]), float(window[1]))
        if window[0] < sweep.lambda_min - 1e-12 or window[1] > sweep.lambda_max + 1e-12:
            rd.fail("do.window", "window must lie inside the sweep range")
        grid = sweep.grid
        for w in window:
            if not np.isclose(grid, w, rtol=0, atol=1e-9 * max(1.0, abs(w))).any():
                rd.fail("do.window", f"window endpoint {w} is not a point of the lambda grid")
        if np.count_nonzero((grid >= window[0] - 1e-9) & (grid <= window[1] + 1e-9)) < 3:
            rd.fail("do.window", "window must contain at least 3 grid points")
    threshold = rd.get(dt, "threshold", float, 0.5, "do.threshold")
    if not 0 < threshold <= 2:
        rd.fail("do.threshold", "threshold must lie in (0, 2]")
    do = DOConfig((band[0], band[1]), threshold, window)

    oc = rd.table(data, "oracle")
    _check_keys(rd, oc, {"enabled", "tolerance", "guess"}, "oracle")
    oracle = OracleConfig(
        rd.get(oc, "enabled", bool, True, "oracle.enabled"),
        rd.get(oc, "tolerance", float, 1e-12, "oracle.tolerance"),
        rd.get(oc, "guess", str, "variational", "oracle.guess"),
    )
    if not oracle.tolerance > 0:
        rd.fail("oracle.tolerance", "tolerance must be positive")
    if oracle.guess not in GUESSES:
        rd.fail("oracle.guess", f"guess must be one of {GUESSES}")

    ot = rd.table(data, "output")
    _check_keys(rd, ot, {"directory", "tables", "spectrum_levels", "dat"}, "output")
    tables = tuple(rd.get(ot, "tables", list, list(TABLES), "output.tables"))
    for t in tables:
        if t not in TABLES:
            rd.fail("output.tables", f"unknown table {t!r} (allowed: {', '.join(TABLES)})")
    directory = Path(rd.get(ot, "directory", str, "out", "output.directory"))
    if os.environ.get(OUTPUT_ENV):
        directory = Path(os.environ[OUTPUT_ENV])
    elif source is not None and not directory.is_absolute():
        directory = (Path(source).parent / directory).resolve()
    levels = rd.get(ot, "spectrum_levels", int, 30, "output.spectrum_levels")
    if not 1 <= levels <= N:
        rd.fail("output.spectrum_levels", f"spectrum_levels must lie in 1..{N}")
    output = OutputConfig(directory, tables, levels, rd.get(ot, "dat", bool, False, "output.dat"))

    return ExperimentConfig(
        family=family, l=l, N=N, beta=beta, sweep=sweep, do=do, oracle=oracle, output=output,
        well_barrier=wb, source_hash=hashlib.sha256(text.encode()).hexdigest(),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", source=path) from None
    return parse_config(text, source=path)
