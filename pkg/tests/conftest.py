import functools
import os

import numpy as np
import pytest

from siegert.config import parse_config
from siegert.exact import find_resonance
from siegert.potentials import WellBarrierParams, well_barrier
from siegert.runner import attach_oracle, variational_rows
from siegert.basis import LaguerreBasis, assemble_factors
from siegert.stabilization import sweep

S_WAVE = dict(V0=0.15, Delta=5.0, r0=6.0)
P_WAVE = dict(V0=0.3, Delta=5.0, r0=6.0)
BANDS = {(0, 100): (2, 30), (0, 500): (2, 140), (1, 100): (2, 40), (1, 500): (2, 200)}


def config_text(l=0, N=100, band=None, points=201, lam=(0.0, 10.0), oracle=True, directory="out", extra=""):
    pot = S_WAVE if l == 0 else P_WAVE
    band = band or BANDS.get((l, N), (2, min(30, N)))
    return f"""
l = {l}
[potential]
V0 = {pot['V0']}
Delta = {pot['Delta']}
r0 = {pot['r0']}
[sweep]
lambda_min = {lam[0]}
lambda_max = {lam[1]}
points = {points}
[basis]
N = {N}
[do]
band = [{band[0]}, {band[1]}]
[oracle]
enabled = {'true' if oracle else 'false'}
[output]
directory = "{directory}"
spectrum_levels = {band[1]}
{extra}
"""


@functools.lru_cache(maxsize=None)
def pipeline(l, N):
    """Spectrum and resonance rows of the benchmark well+barrier, cached per session."""
    cfg = parse_config(config_text(l, N))
    factors = assemble_factors(LaguerreBasis(cfg.N, cfg.beta), cfg.family, cfg.l)
    spectrum = sweep(factors, cfg.sweep.grid, levels=cfg.levels_needed)
    rows = variational_rows(cfg, spectrum)
    attach_oracle(cfg, rows)
    return cfg, spectrum, rows


@functools.lru_cache(maxsize=None)
def exact_at(l, lam):
    pot = S_WAVE if l == 0 else P_WAVE
    guess = {0: 0.0245, 1: 0.05}[l]
    return find_resonance(well_barrier(WellBarrierParams(lam=lam, **pot)), l, complex(guess, -1e-5))


@pytest.fixture
def s_res():
    return exact_at(0, 5.0)


@pytest.fixture
def p_res():
    return exact_at(1, 5.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _no_output_override(monkeypatch):
    if "SIEGERT_OUTPUT_DIR" in os.environ:
        monkeypatch.delenv("SIEGERT_OUTPUT_DIR")
