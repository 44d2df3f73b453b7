"""Resonance width from real quantities: energy and boundary density.

With u normalised to one on [0, r0] and ``p = |u(r0)|^2``, the width
satisfies ``Gamma = p * (Re k + Im(v_l'/v_l)(r0))`` with ``k^2 = 2E - i Gamma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class WidthError(ArithmeticError):
    pass


class BelowThresholdError(WidthError):
    pass


class CubicRootError(WidthError):
    def __init__(self, message, coefficients):
        super().__init__(f"{message}; cubic coefficients {coefficients}")
        self.coefficients = coefficients


class FixedPointError(WidthError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class WidthInput:
    energy: float
    density: float
    r0: float
    l: int = 0

    def __post_init__(self):
        if self.density < 0:
            raise ValueError(f"boundary density must be non-negative, got {self.density}")
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if self.l < 0:
            raise ValueError("l must be non-negative")


def outgoing_factor(l: int, k: complex, r: float) -> tuple[complex, complex]:
    """``v_l(k, r)`` and its r-derivative, where u ~ e^{ikr} v_l for r > r0."""
    v = 0j
    dv = 0j
    z = 2j * k * r
    for j in range(l + 1):
        c = (-1) ** j * math.factorial(l + j) / (math.factorial(j) * math.factorial(l - j))
        term = c / z**j
        v += term
        dv += -j * term / r
    return v, dv


def gamma_s_wave(inp: WidthInput) -> float:
    """Closed form for l = 0: p * sqrt(2E + (p/2)^2)."""
    if inp.l != 0:
        raise ValueError("gamma_s_wave needs l = 0")
    p = inp.density
    rad = 2.0 * inp.energy + 0.25 * p * p
    if rad < 0:
        raise BelowThresholdError(f"negative radicand 2E + (p/2)^2 = {rad:.3e}")
    return p * math.sqrt(rad)


def p_wave_cubic(inp: WidthInput) -> tuple[float, float, float, float]:
    """Coefficients (1, b, c, d) of the cubic in x = Im(k) for l = 1."""
    p, E, r0 = inp.density, inp.energy, inp.r0
    return (1.0, 1.0 / r0 + 0.5 * p, E + 0.5 / r0**2 + 0.5 * p / r0, 0.5 * E * p)


def _cubic(c, y):
    return ((c[0] * y + c[1]) * y + c[2]) * y + c[3]


def _dcubic(c, y):
    return (3 * c[0] * y + 2 * c[1]) * y + c[2]


def _bracketed_newton(c, lo, hi, start=None):
    flo = _cubic(c, lo)
    y = start if start is not None and lo < start < hi else 0.5 * (lo + hi)
    for _ in range(200):
        fy = _cubic(c, y)
        if fy == 0:
            return y
        if (fy < 0) == (flo < 0):
            lo, flo = y, fy
        else:
            hi = y
        d = _dcubic(c, y)
        y_new = y - fy / d if d != 0 else 0.5 * (lo + hi)
        if not lo < y_new < hi:
            y_new = 0.5 * (lo + hi)
        if abs(y_new - y) <= 4e-16 * max(abs(y), 1e-300) or hi - lo <= 4e-16 * hi:
            return y_new
        y = y_new
    return y


def p_wave_root(inp: WidthInput) -> float:
    """Magnitude y = -Im(k) > 0 of the resonant root of the p-wave cubic.

    With Re(k) > 0 a resonance has Im(k) < 0, so the cubic is solved for
    y = -x, i.e. ``y^3 - b y^2 + c y - d = 0``, on the bracket
    ``[0, p/2 + 1/r0 + sqrt(2E)]``.  The bracket is split at the critical
    points so every root is counted; more than one root is an error.
    """
    _, b, c, d = p_wave_cubic(inp)
    coef = (1.0, -b, c, -d)
    if d == 0:
        return 0.0
    hi = 0.5 * inp.density + 1.0 / inp.r0 + math.sqrt(2.0 * inp.energy)
    disc = b * b - 3.0 * c
    cuts = [0.0]
    if disc > 0:
        s = math.sqrt(disc)
        cuts += sorted(y for y in ((b - s) / 3.0, (b + s) / 3.0) if 0 < y < hi)
    cuts.append(hi)
    roots = []
    for lo_, hi_ in zip(cuts[:-1], cuts[1:]):
        flo, fhi = _cubic(coef, lo_), _cubic(coef, hi_)
        if flo == 0 and lo_ > 0:
            roots.append(lo_)
        elif flo != 0 and fhi != 0 and (flo < 0) != (fhi < 0):
            # near y = 0 the cubic is ~ c y - d; starting there avoids cancellation for tiny roots
            start = d / c if lo_ == 0 else None
            roots.append(_bracketed_newton(coef, lo_, hi_, start))
    if not roots:
        raise CubicRootError("no positive root of the p-wave cubic in the bracket", coef)
    if len(roots) > 1:
        raise CubicRootError(f"{len(roots)} positive roots, resonance root is ambiguous: {roots}", coef)
    return roots[0]


def gamma_p_wave(inp: WidthInput) -> float:
    """Width for l = 1 from the real root of the cubic in Im(k)."""
    if inp.l != 1:
        raise ValueError("gamma_p_wave needs l = 1")
    if not inp.energy > 0:
        raise BelowThresholdError("p-wave width needs E > 0")
    if inp.density == 0:
        return 0.0
    y = p_wave_root(inp)
    return 2.0 * y * math.sqrt(2.0 * inp.energy + y * y)


def re_k(energy: float, gamma: float) -> float:
    """Re(k) for k^2 = 2E - i Gamma on the branch Re(k) > 0."""
    return math.sqrt(math.hypot(energy, 0.5 * gamma) + energy)


def _general_rhs(inp, gamma, R):
    a = re_k(inp.energy, gamma)
    k = complex(a, -0.5 * gamma / a)
    v, dv = outgoing_factor(inp.l, k, R)
    if v == 0:
        raise ZeroDivisionError
    return inp.density * (a + (dv / v).imag)


def gamma_general(inp: WidthInput, R: float | None = None, tol: float = 1e-12, max_iter: int = 500) -> float:
    """Width for any l by fixed-point iteration on Gamma.

    ``R`` defaults to ``r0``; the density in ``inp`` must be taken at the
    same radius.  Iteration starts from the s-wave value.  Steps that
    alternate in sign are damped by 0.5.  When successive steps keep their
    sign but shrink slowly (map slope near one) the iterate jumps to the
    secant estimate of the fixed point built from the last two residuals.
    Convergence is judged on the residual ``|rhs(Gamma) - Gamma|``.
    """
    if not inp.energy > 0:
        raise BelowThresholdError("general width extraction needs E > 0")
    R = inp.r0 if R is None else R
    if inp.density == 0:
        return 0.0
    g = inp.density * math.sqrt(2.0 * inp.energy + 0.25 * inp.density**2)
    trace = [g]
    damping = 1.0
    prev = None  # (Gamma, residual) of the previous iterate
    for _ in range(max_iter):
        try:
            g_new = _general_rhs(inp, g, R)
        except ZeroDivisionError:
            raise FixedPointError(f"v_l(k, r0) vanished at Gamma={g}", trace) from None
        step = g_new - g
        if abs(step) < tol * max(1.0, abs(g)):
            return g_new
        g_next = g + damping * step
        if prev is not None and prev[1] != 0:
            ratio = step / prev[1]
            if ratio < 0:
                damping = 0.5
                g_next = g + damping * step
            elif ratio > 0.5 and g != prev[0]:
                # residual is linear in Gamma near the root: secant zero
                slope = (step - prev[1]) / (g - prev[0])
                if slope != 0:
                    cand = g - step / slope
                    if cand > 0:
                        g_next = cand
        prev = (g, step)
        trace.append(g_next)
        g = g_next
    raise FixedPointError(f"fixed point did not converge in {max_iter} iterations", trace)


def gamma_from_width_input(inp: WidthInput) -> float:
    """Dispatch to the closed forms for s and p waves, fixed point otherwise."""
    if inp.l == 0:
        return gamma_s_wave(inp)
    if inp.l == 1:
        return gamma_p_wave(inp)
    return gamma_general(inp)


def width_input_from_coefficients(coeffs, basis, r0: float, energy: float, l: int, overlaps=None) -> WidthInput:
    """Boundary density of a variational state normalised to one on [0, r0]."""
    coeffs = np.asarray(coeffs, dtype=float)
    if overlaps is None:
        from .basis import truncated_overlaps

        overlaps = truncated_overlaps(basis, r0).matrix
    psi_r0 = float(basis(coeffs, [r0])[0])
    inside = float(coeffs @ overlaps @ coeffs)
    return WidthInput(energy, psi_r0 * psi_r0 / inside, r0, l)
