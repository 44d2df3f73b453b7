"""Barrier-height sweeps, double-orthogonality curves and resonance localisation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from . import _kernels
from .basis import HamiltonianFactors
from .width import WidthInput, gamma_from_width_input

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5
REFINE_RTOL = 1e-7


class ContractError(ValueError):
    pass


class WindowError(ValueError):
    pass


def eigensolve_symmetric(matrix, symmetry_tol: float = 1e-12):
    """Full eigendecomposition of a real symmetric matrix (LAPACK ``syevd``).

    Eigenvalues ascend; each eigenvector column is sign-fixed so that its
    largest-magnitude entry is positive, which makes output deterministic.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.T).max(initial=0.0) > symmetry_tol * scale:
        raise ContractError("matrix is not symmetric")
    w, v = np.linalg.eigh(a)
    return w, _fix_signs(v)


def _fix_signs(v):
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def householder_tridiagonal(matrix):
    """Reduce a symmetric matrix to tridiagonal form with Householder reflections.

    Returns ``(diag, off)``.  Plain numpy; used as the independent route to
    the eigenvalues via Sturm bisection.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k]
        alpha = -np.copysign(np.linalg.norm(x), x[0] if x[0] != 0 else 1.0)
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0:
            continue
        v /= vnorm
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        K = v @ p
        q = p - K * v
        a[k + 1:, k + 1:] = sub - 2.0 * (np.outer(v, q) + np.outer(q, v))
        a[k + 1, k] = a[k, k + 1] = alpha
        a[k + 2:, k] = 0.0
        a[k, k + 2:] = 0.0
    return np.diag(a).copy(), np.diag(a, 1).copy()


def bisection_eigenvalues(matrix, tol: float = 1e-15):
    """Eigenvalues by Householder reduction and Sturm-sequence bisection."""
    d, e = householder_tridiagonal(matrix)
    return _kernels.tridiagonal_bisection(d, e, tol)


@dataclass(frozen=True)
class VariationalSpectrum:
    lambdas: np.ndarray
    energies: np.ndarray = field(repr=False)   # (n_lambda, N)
    vectors: np.ndarray = field(repr=False)    # (n_lambda, N, levels), columns are eigenvectors
    factors: HamiltonianFactors = field(repr=False)

    def __len__(self):
        return len(self.lambdas)


def sweep(factors: HamiltonianFactors, lambda_grid, levels: int | None = None) -> VariationalSpectrum:
    """Independent eigensolves of H0 + lam W over an ordered grid.

    All eigenvalues are kept; eigenvectors only for the lowest ``levels``
    (default all), which bounds memory at large N.
    """
    lams = np.asarray(lambda_grid, dtype=float)
    if lams.ndim != 1 or lams.size == 0:
        raise ValueError("lambda grid must be a non-empty 1-d sequence")
    if np.any(np.diff(lams) <= 0):
        raise ValueError("lambda grid must be strictly increasing")
    N = factors.basis.N
    keep = N if levels is None else min(int(levels), N)
    energies = np.empty((lams.size, N))
    vectors = np.empty((lams.size, N, keep))
    for j, lam in enumerate(lams):
        w, v = eigensolve_symmetric(factors.hamiltonian(lam))
        energies[j], vectors[j] = w, v[:, :keep]
    return VariationalSpectrum(lams, energies, vectors, factors)


def eigenpair(factors: HamiltonianFactors, lam: float, n: int):
    """Energy and coefficient vector of the n-th (1-based) level at ``lam``."""
    w, v = scipy.linalg.eigh(factors.hamiltonian(lam), subset_by_index=[n - 1, n - 1], driver="evr")
    return float(w[0]), _fix_signs(v)[:, 0]


@dataclass(frozen=True)
class DOMinimum:
    lam: float
    value: float
    energy: float
    coeffs: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class DOCurve:
    n: int
    window: tuple[float, float]
    lambdas: np.ndarray
    values: np.ndarray
    minima: tuple[DOMinimum, ...] = ()


def _window_slice(spectrum: VariationalSpectrum, window):
    lams = spectrum.lambdas
    if window is None:
        lo, hi = 0, len(lams) - 1
    else:
        lo = int(np.argmin(np.abs(lams - window[0])))
        hi = int(np.argmin(np.abs(lams - window[1])))
        if not (np.isclose(lams[lo], window[0]) and np.isclose(lams[hi], window[1])):
            raise WindowError(f"window endpoints {window} must be grid points")
    if hi - lo < 2:
        raise WindowError("window must contain at least 3 grid points")
    return lo, hi


def do_curve(spectrum: VariationalSpectrum, n: int, window=None, refine: bool = True) -> DOCurve:
    """D_n(lam) = <a_n(lam_L), a_n(lam)>^2 + <a_n(lam_R), a_n(lam)>^2.

    The basis does not depend on lam, so wavefunction overlaps are plain
    coefficient dot products.  Every interior local minimum of the sampled
    curve is refined by a bounded Brent search (parabolic steps with golden
    section fallback) with a fresh eigensolve at each trial lam.
    """
    kept = spectrum.vectors.shape[2]
    if not 1 <= n <= kept:
        raise ValueError(f"eigen index {n} outside 1..{kept} (levels kept by the sweep)")
    lo, hi = _window_slice(spectrum, window)
    lams = spectrum.lambdas[lo:hi + 1]
    vecs = spectrum.vectors[lo:hi + 1, :, n - 1]
    left, right = vecs[0], vecs[-1]
    values = (vecs @ left) ** 2 + (vecs @ right) ** 2
    values = np.clip(values, 0.0, 2.0)
    minima = []
    if refine:
        width = lams[-1] - lams[0]
        for j in range(1, len(lams) - 1):
            if values[j] <= values[j - 1] and values[j] < values[j + 1]:
                minima.append(_refine_minimum(spectrum.factors, n, left, right, lams[j - 1], lams[j + 1], width))
        minima.sort(key=lambda m: m.value)
    return DOCurve(n, (float(lams[0]), float(lams[-1])), lams, values, tuple(minima))


def _do_value(factors, n, left, right, lam):
    E, a = eigenpair(factors, lam, n)
    return min(2.0, (a @ left) ** 2 + (a @ right) ** 2), E, a


def _refine_minimum(factors, n, left, right, a, b, width):
    res = minimize_scalar(
        lambda lam: _do_value(factors, n, left, right, lam)[0],
        bounds=(a, b), method="bounded", options={"xatol": REFINE_RTOL * width},
    )
    value, E, coeffs = _do_value(factors, n, left, right, float(res.x))
    return DOMinimum(float(res.x), float(value), E, coeffs)


@dataclass(frozen=True)
class ResonanceEstimate:
    n0: int
    lambda_star: float
    energy: float
    density: float
    do_value: float
    N: int
    gamma: float | None = None
    coeffs: np.ndarray | None = field(default=None, repr=False)

    def width_input(self, r0: float, l: int) -> WidthInput:
        return WidthInput(self.energy, self.density, r0, l)


def boundary_density(factors: HamiltonianFactors, coeffs) -> float:
    """|psi(r0)|^2 / int_0^r0 |psi|^2 for a variational coefficient vector."""
    a = np.asarray(coeffs, dtype=float)
    r0 = factors.r0
    psi = float(factors.basis(a, [r0])[0])
    inside = float(a @ factors.overlaps_r0.matrix @ a)
    return psi * psi / inside


def localize(spectrum: VariationalSpectrum, n: int, window=None, threshold: float = DEFAULT_THRESHOLD):
    """Resonance candidates for level n, deepest first; empty if none.

    A candidate is a refined interior minimum of D_n below ``threshold``.
    """
    curve = do_curve(spectrum, n, window)
    out = []
    for m in curve.minima:
        if m.value < threshold:
            p = boundary_density(spectrum.factors, m.coeffs)
            out.append(ResonanceEstimate(n, m.lam, m.energy, p, m.value, spectrum.factors.basis.N, coeffs=m.coeffs))
    return out


def with_width(est: ResonanceEstimate, r0: float, l: int) -> ResonanceEstimate:
    return replace(est, gamma=gamma_from_width_input(est.width_input(r0, l)))
