"""Orthonormal Laguerre basis, quadrature, overlaps and Hamiltonian factors.

Basis functions are labelled i = 1..N and carry Laguerre degree d = i - 1;
with x = beta * r::

    Phi_i(r) = sqrt(beta) / sqrt((d+1)(d+2)) * x * exp(-x/2) * L_d^{(2)}(x)

They vanish at the origin and are orthonormal under dr on [0, inf).  Degree
zero must be kept: without it the set misses the direction x exp(-x/2)
for every N.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _kernels
from .potentials import LambdaFamily, WellBarrierParams

LEGENDRE_NODES = 32
PANEL_WIDTH = 1.0


@dataclass(frozen=True)
class LaguerreBasis:
    N: int
    beta: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"basis size must be >= 1, got {self.N}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(self.N)

    @property
    def norms(self) -> np.ndarray:
        d = self.degrees.astype(float)
        return 1.0 / np.sqrt((d + 1.0) * (d + 2.0))

    def values(self, r) -> np.ndarray:
        """Matrix ``Phi[i-1, k] = Phi_i(r_k)``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        x = self.beta * r
        lag = _kernels.laguerre_scaled(x, 2.0, self.N - 1)
        return np.sqrt(self.beta) * self.norms[:, None] * x * lag

    def derivatives(self, r) -> np.ndarray:
        """Matrix of ``dPhi_i/dr`` at ``r``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        x = self.beta * r
        lag = _kernels.laguerre_scaled(x, 2.0, self.N - 1)
        return self.beta**1.5 * self.norms[:, None] * _bracket_derivative(lag, x)

    def __call__(self, coeffs, r):
        """Expansion ``sum_i coeffs[i-1] Phi_i(r)``."""
        return np.asarray(coeffs) @ self.values(r)


def _bracket_derivative(lag, x):
    # d/dx [x e^{-x/2} L_d] = e^{-x/2} [(1 + d - x/2) L_d - (d + 2) L_{d-1}]
    d = np.arange(lag.shape[0], dtype=float)[:, None]
    prev = np.vstack([np.zeros((1, lag.shape[1])), lag[:-1]])
    return (1.0 + d - 0.5 * x) * lag - (d + 2.0) * prev


def basis_eval(basis: LaguerreBasis, i: int, r):
    if not 1 <= i <= basis.N:
        raise IndexError(f"basis index {i} outside 1..{basis.N}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("basis evaluated at negative radius")
    vals = basis.values(np.atleast_1d(r_arr))[i - 1]
    return float(vals[0]) if r_arr.ndim == 0 else vals


@functools.lru_cache(maxsize=16)
def gauss_laguerre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and *scaled* weights ``w_k * exp(x_k)`` of n-point Gauss-Laguerre.

    Nodes from the Jacobi matrix, polished by Newton steps on the scaled
    recurrence; weights from the Christoffel sum ``1 / sum_j L_j(x)^2``, which
    stays accurate where the textbook formula loses digits (n > 100).
    """
    j = np.arange(n, dtype=float)
    x = eigh_tridiagonal(2 * j + 1, np.arange(1, n, dtype=float), eigvals_only=True)
    for _ in range(3):
        lag = _kernels.laguerre_scaled(x, 0.0, n)
        x = x - x * lag[n] / (n * (lag[n] - lag[n - 1]))
    lag = _kernels.laguerre_scaled(x, 0.0, n - 1)
    w_scaled = 1.0 / np.sum(lag * lag, axis=0)
    x.setflags(write=False)
    w_scaled.setflags(write=False)
    return x, w_scaled


@functools.lru_cache(maxsize=4)
def _legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def panel_legendre(a: float, b: float, width: float = PANEL_WIDTH, nodes: int = LEGENDRE_NODES):
    """Composite Gauss-Legendre rule on [a, b] with panels no wider than ``width``."""
    npanel = max(1, int(np.ceil((b - a) / width - 1e-12)))
    t, w = _legendre(nodes)
    edges = np.linspace(a, b, npanel + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wr = (half[:, None] * w[None, :]).ravel()
    return r, wr


def gram_matrix(basis: LaguerreBasis, nodes: int | None = None) -> np.ndarray:
    """Overlap matrix on [0, inf) by Gauss-Laguerre (exact up to rounding)."""
    n = nodes or basis.N + 4
    x, ws = gauss_laguerre(n)
    phi = basis.values(x / basis.beta)
    return (phi * (ws / basis.beta)) @ phi.T


@dataclass(frozen=True)
class TruncatedOverlaps:
    R: float
    matrix: np.ndarray = field(repr=False)


def truncated_overlaps(basis: LaguerreBasis, R: float) -> TruncatedOverlaps:
    """``I_ij(R) = int_0^R Phi_i Phi_j dr`` by panel Gauss-Legendre."""
    if not R > 0:
        raise ValueError(f"truncation radius must be positive, got {R}")
    r, w = panel_legendre(0.0, float(R), width=_panel_width(basis, R))
    phi = basis.values(r)
    mat = (phi * w) @ phi.T
    mat = 0.5 * (mat + mat.T)
    return TruncatedOverlaps(float(R), mat)


def _panel_width(basis: LaguerreBasis, R: float) -> float:
    # Phi_i oscillates like J_2(2 sqrt(i x)); keep a few nodes per half-wave near the origin
    return min(PANEL_WIDTH, 4.0 / (basis.beta * np.sqrt(basis.N)))


def kinetic_centrifugal_matrix(basis: LaguerreBasis, l: int) -> np.ndarray:
    """``T_ij = 1/2 <Phi_i'|Phi_j'> + l(l+1)/2 <Phi_i|r^-2|Phi_j>``."""
    if l < 0:
        raise ValueError("angular momentum must be non-negative")
    x, ws = gauss_laguerre(basis.N + 4)
    lag = _kernels.laguerre_scaled(x, 2.0, basis.N - 1)
    norms = basis.norms[:, None]
    dphi = norms * _bracket_derivative(lag, x)
    # in x: dPhi/dr = beta^{3/2} * dphi, dr = dx / beta
    T = 0.5 * basis.beta**2 * (dphi * ws) @ dphi.T
    if l:
        # Phi_i Phi_j / r^2 dr = beta^2 e^{-x} L_i L_j n_i n_j dx
        g = norms * lag
        T += 0.5 * l * (l + 1) * basis.beta**2 * (g * ws) @ g.T
    return 0.5 * (T + T.T)


@dataclass(frozen=True)
class HamiltonianFactors:
    """Affine split ``H(lam) = H0 + lam * W`` for a one-parameter potential family."""

    H0: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)
    basis: LaguerreBasis
    family: LambdaFamily
    l: int
    overlaps_r0: TruncatedOverlaps = field(repr=False)

    def hamiltonian(self, lam: float) -> np.ndarray:
        return self.H0 + lam * self.W

    def potential(self, lam: float):
        return self.family.at(lam)

    @property
    def r0(self) -> float:
        return self.family.r0


def assemble_factors(basis: LaguerreBasis, params: WellBarrierParams | LambdaFamily, l: int) -> HamiltonianFactors:
    """Matrix factors; for well+barrier parameters ``params.lam`` is ignored.

    Each constant segment contributes ``value * (I(r_end) - I(r_start))``.
    """
    family = params.family() if isinstance(params, WellBarrierParams) else params
    cache: dict[float, np.ndarray] = {}

    def overlap(R):
        if R == 0:
            return np.zeros((basis.N, basis.N))
        if R not in cache:
            cache[R] = truncated_overlaps(basis, R).matrix
        return cache[R]

    H0 = kinetic_centrifugal_matrix(basis, l)
    for a, b, v in family.fixed_part():
        if v != 0:
            H0 = H0 + v * (overlap(b) - overlap(a))
    a, b = family.slot_range
    W = overlap(b) - overlap(a)
    I_r0 = TruncatedOverlaps(family.r0, overlap(family.r0))
    return HamiltonianFactors(0.5 * (H0 + H0.T), 0.5 * (W + W.T), basis, family, l, I_r0)


def dump_matrices(factors: HamiltonianFactors, directory) -> list[Path]:
    """Write H0 and W as row-major CSV with a one-line comment header."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    segs = ", ".join(f"({r!r}, {'lambda' if j == factors.family.slot else repr(v)})"
                     for j, (r, v) in enumerate(factors.family.segments))
    header = (
        f"siegert-matrix v1; N={factors.basis.N}; beta={factors.basis.beta!r}; l={factors.l}; "
        f"segments=[{segs}]; row-major, row i = basis label i (1-based, Laguerre degree i-1)"
    )
    paths = []
    for name, mat in (("H0", factors.H0), ("W", factors.W)):
        path = directory / f"{name}.csv"
        np.savetxt(path, mat, delimiter=",", fmt="%.17g", header=f"{name}: {header}")
        paths.append(path)
    return paths
