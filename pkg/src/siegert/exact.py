"""Exact Siegert states of piecewise-constant potentials (s and p waves).

Inside each constant segment the reduced radial equation is solved in
closed form.  The regular solution is started at the origin and its
logarithmic derivative is carried across segments; resonances are the
complex energies where it matches the purely outgoing exterior solution
``exp(ikr) v_l(k, r)`` at the support radius.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .potentials import PotentialSpec
from .width import outgoing_factor

MAX_L = 1
SERIES_CUTOFF = 1e-2


class ExactSolverError(RuntimeError):
    pass


class NoConvergenceError(ExactSolverError):
    def __init__(self, message, last_energy, last_residual):
        super().__init__(message)
        self.last_energy = last_energy
        self.last_residual = last_residual


class NotAResonanceError(ExactSolverError):
    """Root found, but with a non-positive width (bound or virtual state)."""

    def __init__(self, message, energy):
        super().__init__(message)
        self.energy = energy


class FlowReversalError(ExactSolverError):
    pass


class PoleError(ExactSolverError):
    pass


@dataclass(frozen=True)
class ComplexEnergy:
    re: float
    im: float

    @classmethod
    def from_complex(cls, E: complex) -> "ComplexEnergy":
        return cls(float(E.real), float(E.imag))

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def gamma(self) -> float:
        return -2.0 * self.im

    @property
    def k(self) -> complex:
        # principal branch: Re(k) >= 0, so resonances have Im(k) < 0
        return complex(np.sqrt(2.0 * self.value))


def _check_l(l):
    if l not in (0, 1):
        raise NotImplementedError(f"closed-form solutions are provided for l = 0, 1 only (got l={l})")


# --- closed-form pieces -------------------------------------------------------

def _outgoing_parts(l, z):
    """For w(z) = e^{iz} f(z) return (f, g) with w' = e^{iz} g."""
    if l == 0:
        return 1.0 + 0j, 1j
    return 1.0 + 1j / z, 1j - 1.0 / z - 1j / (z * z)


def _incoming_parts(l, z):
    """Same for the incoming partner e^{-iz} f(z)."""
    if l == 0:
        return 1.0 + 0j, -1j
    return 1.0 - 1j / z, -1j - 1.0 / z + 1j / (z * z)


def _regular_logderiv(l, q, r):
    """q * F'(qr)/F(qr) for the solution regular at the origin."""
    z = q * r
    if l == 0:
        if abs(z) < SERIES_CUTOFF:
            z2 = z * z
            return (1.0 - z2 / 3.0 - z2 * z2 / 45.0) / r
        return q / np.tan(z)
    if abs(z) < SERIES_CUTOFF:
        z2 = z * z
        F = z2 / 3.0 - z2 * z2 / 30.0 + z2**3 / 840.0
        dF = 2.0 * z / 3.0 - 4.0 * z * z2 / 30.0 + 6.0 * z * z2 * z2 / 840.0
        return q * dF / F
    # Riccati-Bessel F = sin z / z - cos z, divided through by the larger of sin, cos
    t = np.tan(z)
    if abs(t) <= 1.0:
        F = t / z - 1.0
        dF = 1.0 / z - t / (z * z) + t
    else:
        c = 1.0 / t
        F = 1.0 / z - c
        dF = c / z - 1.0 / (z * z) + 1.0
    return q * dF / F


def _regular_value(l, q, r):
    z = q * r
    if l == 0:
        return np.sin(z), q * np.cos(z)
    if abs(z) < SERIES_CUTOFF:
        z2 = z * z
        F = z2 / 3.0 - z2 * z2 / 30.0 + z2**3 / 840.0
        dF = 2.0 * z / 3.0 - 4.0 * z * z2 / 30.0 + 6.0 * z * z2 * z2 / 840.0
        return F, q * dF
    s, c = np.sin(z), np.cos(z)
    return s / z - c, q * (c / z - s / (z * z) + s)


def _transfer_logderiv(l, q, a, b, y):
    """Carry u'/u = y at r=a across a constant segment to r=b."""
    fpa, gpa = _outgoing_parts(l, q * a)
    fma, gma = _incoming_parts(l, q * a)
    fpb, gpb = _outgoing_parts(l, q * b)
    fmb, gmb = _incoming_parts(l, q * b)
    # u = A e^{iq(r-a)} f+ + B e^{-iq(r-a)} f-, with u'(a) = y u(a)
    A = -(q * gma - y * fma)
    B = q * gpa - y * fpa
    s = np.exp(1j * q * (b - a))
    if abs(s) <= 1.0:
        s2 = s * s
        num = A * s2 * gpb + B * gmb
        den = A * s2 * fpb + B * fmb
    else:
        s2 = 1.0 / (s * s)
        num = A * gpb + B * s2 * gmb
        den = A * fpb + B * s2 * fmb
    return q * num / den


def _segment_q(E, V):
    return np.sqrt(2.0 * (E - V) + 0j)


def exterior_logderiv(l, k, r):
    """ik + v_l'/v_l at r for the outgoing exterior solution."""
    f, g = _outgoing_parts(l, k * r)
    return k * g / f


def matching_function(potential: PotentialSpec, l: int, E: complex) -> complex:
    """Interior minus exterior logarithmic derivative at the support radius."""
    _check_l(l)
    E = complex(E)
    if E == 0:
        raise ValueError("matching function undefined at E = 0")
    edges = potential.breakpoints
    vals = potential.values
    q = _segment_q(E, vals[0])
    y = _regular_logderiv(l, q, edges[1])
    for j in range(1, len(vals)):
        q = _segment_q(E, vals[j])
        y = _transfer_logderiv(l, q, edges[j], edges[j + 1], y)
    k = np.sqrt(2.0 * E)
    return complex(y - exterior_logderiv(l, k, potential.r0))


# --- wavefunction -------------------------------------------------------------

_GL64 = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class ExactWavefunction:
    """Piecewise closed-form u(r), normalised to one on [0, r0].

    Segment 0 holds ``u = coeffs[0][0] * F_l(q r)`` (regular solution);
    segment j >= 1 holds
    ``u = c+ e^{iq(r-a)} f+(qr) + c- e^{-iq(r-a)} f-(qr)``.
    """

    potential: PotentialSpec
    l: int
    energy: ComplexEnergy
    q: tuple = field(repr=False)
    coeffs: tuple = field(repr=False)

    @property
    def r0(self) -> float:
        return self.potential.r0

    @property
    def k(self) -> complex:
        return self.energy.k

    def _segment(self, r):
        edges = self.potential.breakpoints
        return int(np.searchsorted(edges[1:], r, side="right"))

    def value_and_derivative(self, r: float) -> tuple[complex, complex]:
        if r < 0:
            raise ValueError("negative radius")
        j = self._segment(r)
        nseg = len(self.q)
        if j >= nseg:
            u0, _ = self.value_and_derivative_interior(nseg - 1, self.r0)
            k = self.k
            v0 = outgoing_factor(self.l, k, self.r0)[0]
            v, dv = outgoing_factor(self.l, k, r)
            u = u0 * np.exp(1j * k * (r - self.r0)) * v / v0
            return complex(u), complex(u * (1j * k + dv / v))
        return self.value_and_derivative_interior(j, r)

    def value_and_derivative_interior(self, j, r):
        q = self.q[j]
        if j == 0:
            F, dF = _regular_value(self.l, q, r)
            c = self.coeffs[0][0]
            return complex(c * F), complex(c * dF)
        a = self.potential.breakpoints[j]
        cp, cm = self.coeffs[j]
        fp, gp = _outgoing_parts(self.l, q * r)
        fm, gm = _incoming_parts(self.l, q * r)
        ep = np.exp(1j * q * (r - a))
        em = np.exp(-1j * q * (r - a))
        return complex(cp * ep * fp + cm * em * fm), complex(q * (cp * ep * gp + cm * em * gm))

    def __call__(self, r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.array([self.value_and_derivative(float(x))[0] for x in r_arr])
        return out[0] if np.ndim(r) == 0 else out

    def density_integral(self, R: float) -> float:
        """int_0^R |u|^2 dr: Gauss-Legendre inside, adaptive quadrature beyond r0."""
        edges = self.potential.breakpoints
        t, w = _GL64
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            hi = min(b, R)
            if hi <= a:
                break
            r = 0.5 * (hi + a) + 0.5 * (hi - a) * t
            u = self(r)
            total += 0.5 * (hi - a) * float(np.sum(w * np.abs(u) ** 2))
        if R > self.r0:
            extra, _ = integrate.quad(
                lambda x: abs(self.value_and_derivative(x)[0]) ** 2,
                self.r0, R, epsabs=0.0, epsrel=1e-13, limit=200,
            )
            total += extra
        return total


def _propagate(potential: PotentialSpec, l: int, E: complex):
    """Regular solution carried linearly across the segments.

    Returns per-segment wavenumbers and coefficients plus (u, u') at r0.
    Linear propagation keeps (u, u') entire in E, unlike the log-derivative.
    """
    edges = potential.breakpoints
    vals = potential.values
    qs = [complex(_segment_q(E, v)) for v in vals]
    coeffs = [(1.0 + 0j,)]
    u, du = _regular_value(l, qs[0], edges[1])
    for j in range(1, len(vals)):
        q, a, b = qs[j], edges[j], edges[j + 1]
        fp, gp = _outgoing_parts(l, q * a)
        fm, gm = _incoming_parts(l, q * a)
        M = np.array([[fp, fm], [q * gp, q * gm]], dtype=complex)
        cp, cm = np.linalg.solve(M, np.array([u, du], dtype=complex))
        coeffs.append((complex(cp), complex(cm)))
        fp, gp = _outgoing_parts(l, q * b)
        fm, gm = _incoming_parts(l, q * b)
        ep, em = np.exp(1j * q * (b - a)), np.exp(-1j * q * (b - a))
        u, du = cp * ep * fp + cm * em * fm, q * (cp * ep * gp + cm * em * gm)
    return qs, coeffs, complex(u), complex(du)


def _wronskian(potential, l, E):
    _, _, u, du = _propagate(potential, l, E)
    k = np.sqrt(2.0 * E)
    return du - exterior_logderiv(l, k, potential.r0) * u


def build_wavefunction(potential: PotentialSpec, l: int, E: complex) -> ExactWavefunction:
    """Assemble and normalise the regular solution at energy E."""
    _check_l(l)
    E = complex(E)
    qs, coeffs, u, _ = _propagate(potential, l, E)
    raw = ExactWavefunction(potential, l, ComplexEnergy.from_complex(E), tuple(qs), tuple(coeffs))
    # fix |.| by the unit norm on [0, r0] and the phase by u(r0) > 0
    norm = raw.density_integral(potential.r0)
    phase = np.exp(-1j * np.angle(u)) if abs(u) > 0 else 1.0
    scale = phase / math.sqrt(norm)
    scaled = tuple(tuple(c * scale for c in cs) for cs in coeffs)
    return ExactWavefunction(potential, l, raw.energy, tuple(qs), scaled)


@dataclass(frozen=True)
class ExactResonance:
    energy: ComplexEnergy
    wavefunction: ExactWavefunction = field(repr=False)
    residual: float
    iterations: int

    @property
    def gamma(self) -> float:
        return self.energy.gamma


def _rounding_floor(E0, E1, f0, f1):
    if E1 == E0:
        return 0.0
    slope = abs((f1 - f0) / (E1 - E0))
    return 64.0 * np.finfo(float).eps * abs(E1) * slope


def find_resonance(
    potential: PotentialSpec,
    l: int,
    guess: complex,
    tol: float = 1e-12,
    max_iter: int = 200,
    window: tuple[float, float] | None = None,
) -> ExactResonance:
    """Complex secant search for a Siegert eigenvalue near ``guess``.

    The secant runs on the Wronskian ``u'(r0) - y_ext u(r0)``, which has
    the same zeros as :func:`matching_function` but no poles; convergence
    is declared on ``|matching_function| < tol``, or below the rounding
    floor ``64 eps |E| |df/dE|`` for narrow resonances where ``tol`` is not
    representable.  Steps are capped at a
    quarter of the current distance from the origin (at least 1e-3).
    """
    _check_l(l)
    if not tol > 0:
        raise ValueError("tol must be positive")
    E0 = complex(guess)
    if E0 == 0:
        raise ValueError("guess must be non-zero")
    E1 = E0 + max(1e-4 * abs(E0), 1e-7) * (1 - 1j)
    w0 = _wronskian(potential, l, E0)
    w1 = _wronskian(potential, l, E1)
    f0 = matching_function(potential, l, E0)
    f1 = matching_function(potential, l, E1)
    it = 0
    while not abs(f1) < max(tol, _rounding_floor(E0, E1, f0, f1)):
        it += 1
        if it > max_iter or not (np.isfinite(w1) and np.isfinite(f1)):
            raise NoConvergenceError(
                f"secant did not converge in {it - 1} iterations (|f|={abs(f1):.3e})", E1, abs(f1)
            )
        dw = w1 - w0
        if dw == 0:
            raise NoConvergenceError("secant stalled (flat matching function)", E1, abs(f1))
        step = -w1 * (E1 - E0) / dw
        cap = max(0.25 * abs(E1), 1e-3)
        if abs(step) > cap:
            step *= cap / abs(step)
        E0, w0, f0 = E1, w1, f1
        E1 = E1 + step
        if E1 == 0:
            E1 = 1e-12 + 0j
        w1 = _wronskian(potential, l, E1)
        f1 = matching_function(potential, l, E1)
    resid = abs(f1)
    energy = ComplexEnergy.from_complex(E1)
    if energy.gamma <= 1e-10 * max(1.0, abs(E1)):
        raise NotAResonanceError(f"root at E={E1:.12g} has Gamma <= 0 (bound or virtual state)", energy)
    if window is not None and not window[0] <= energy.re <= window[1]:
        raise ExactSolverError(f"root real part {energy.re:.6g} outside search window {window}")
    wf = build_wavefunction(potential, l, E1)
    return ExactResonance(energy, wf, resid, it)


def gamma_from_flux(wf: ExactWavefunction, R: float) -> float:
    """Im(u* u') at R divided by the probability inside R."""
    if R < wf.r0 - 1e-12:
        raise ValueError(f"flux radius {R} lies inside the support radius {wf.r0}")
    u, du = wf.value_and_derivative(R)
    return float((np.conj(u) * du).imag / wf.density_integral(R))


def rdot(wf: ExactWavefunction, R: float) -> float:
    """Velocity of the sphere boundary, Im(u'/u) at R."""
    if R < wf.r0 - 1e-12:
        raise ValueError(f"radius {R} lies inside the support radius {wf.r0}")
    u, du = wf.value_and_derivative(R)
    if abs(u) < 1e-300:
        raise PoleError(f"wavefunction has a node at R={R}")
    return float((du / u).imag)


def time_of_radius(wf: ExactWavefunction, R_start: float, R_end: float) -> float:
    """Time for the conserving sphere to grow from R_start to R_end."""
    if R_start < wf.r0 - 1e-12 or R_end < R_start:
        raise ValueError("need r0 <= R_start <= R_end")
    if R_end == R_start:
        return 0.0
    probe = np.linspace(R_start, R_end, 65)
    if min(rdot(wf, r) for r in probe) <= 0:
        raise FlowReversalError("boundary velocity is not positive on the interval")
    t, _ = integrate.quad(lambda r: 1.0 / rdot(wf, r), R_start, R_end, epsabs=0.0, epsrel=1e-13, limit=200)
    return t


def radius_at_time(wf: ExactWavefunction, t: float, R_start: float | None = None) -> float:
    """Invert :func:`time_of_radius` by integrating dR/dt = rdot(R)."""
    R0 = wf.r0 if R_start is None else R_start
    if t == 0:
        return R0
    sol = integrate.solve_ivp(lambda _t, R: [rdot(wf, R[0])], (0.0, t), [R0], rtol=1e-12, atol=1e-12)
    return float(sol.y[0, -1])
