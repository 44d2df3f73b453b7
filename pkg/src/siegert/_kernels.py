"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``SIEGERT_DISABLE_NUMBA`` is unset or ``0``.  Both paths are
always importable by name so they can be benchmarked against each other.
"""
from __future__ import annotations

import math
import os

import numpy as np

_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)

_disabled = os.environ.get("SIEGERT_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    njit = None

USE_NUMBA = njit is not None and not _disabled


# --------------------------------------------------------------------------
# e^{-x/2} L_i^{(alpha)}(x) for i = 0..nmax, without overflow at large x
# --------------------------------------------------------------------------

def laguerre_scaled_numpy(x, alpha, nmax):
    """Return ``out[i, k] = exp(-x_k/2) * L_i^{(alpha)}(x_k)`` for ``i <= nmax``.

    The three-term recurrence is run on unscaled values with a running
    log-scale per node, so nodes near ``4 * nmax`` neither overflow the
    polynomial nor underflow the exponential.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((nmax + 1, x.size))
    logscale = -0.5 * x
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    out[0] = np.exp(logscale)
    for i in range(nmax):
        nxt = ((2 * i + 1 + alpha - x) * cur - (i + alpha) * prev) / (i + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            prev[big] /= _RESCALE
            cur[big] /= _RESCALE
            logscale[big] += _LOG_RESCALE
        out[i + 1] = cur * np.exp(logscale)
    return out


def _laguerre_scaled_loop(x, alpha, nmax):
    # degree-major so every output row is written contiguously
    m = x.shape[0]
    out = np.empty((nmax + 1, m))
    logscale = np.empty(m)
    scale = np.empty(m)
    prev = np.zeros(m)
    cur = np.ones(m)
    for k in range(m):
        logscale[k] = -0.5 * x[k]
        scale[k] = math.exp(logscale[k])
        out[0, k] = scale[k]
    for i in range(nmax):
        a = 2 * i + 1 + alpha
        b = i + alpha
        for k in range(m):
            nxt = ((a - x[k]) * cur[k] - b * prev[k]) / (i + 1)
            prev[k] = cur[k]
            cur[k] = nxt
            if abs(nxt) > _RESCALE:
                prev[k] /= _RESCALE
                cur[k] /= _RESCALE
                logscale[k] += _LOG_RESCALE
                scale[k] = math.exp(logscale[k])
            out[i + 1, k] = cur[k] * scale[k]
    return out


# --------------------------------------------------------------------------
# Sturm-sequence bisection for symmetric tridiagonal matrices
# --------------------------------------------------------------------------

def _sturm_count_loop(diag, off2, x):
    # number of eigenvalues strictly below x; off2 holds squared off-diagonals
    n = diag.shape[0]
    count = 0
    q = diag[0] - x
    if q < 0.0:
        count += 1
    for i in range(1, n):
        if q == 0.0:
            q = 1e-300
        q = diag[i] - x - off2[i - 1] / q
        if q < 0.0:
            count += 1
    return count


def _bisection_loop(diag, off2, lo, hi, tol):
    n = diag.shape[0]
    eig = np.empty(n)
    for j in range(n):
        a = lo
        b = hi
        # eigenvalue j (0-based) is the smallest x with count(x) > j
        while b - a > tol * max(1.0, abs(a) + abs(b)):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            q = diag[0] - mid
            count = 1 if q < 0 else 0
            for i in range(1, n):
                if q == 0.0:
                    q = 1e-300
                q = diag[i] - mid - off2[i - 1] / q
                if q < 0:
                    count += 1
            if count > j:
                b = mid
            else:
                a = mid
        eig[j] = 0.5 * (a + b)
    return eig


def sturm_count_numpy(diag, off2, x):
    """Count eigenvalues below ``x`` by the Sturm sequence (scalar loop)."""
    return _sturm_count_loop(np.asarray(diag, float), np.asarray(off2, float), float(x))


def _bisection_numpy(diag, off2, lo, hi, tol):
    """Vectorised bisection: all eigenvalue brackets advance together."""
    n = diag.shape[0]
    a = np.full(n, lo)
    b = np.full(n, hi)
    target = np.arange(n)
    for _ in range(200):
        mid = 0.5 * (a + b)
        # Sturm counts for every midpoint at once
        q = diag[0] - mid
        count = (q < 0).astype(np.int64)
        for i in range(1, n):
            q = np.where(q == 0.0, 1e-300, q)
            q = diag[i] - mid - off2[i - 1] / q
            count += q < 0
        upper = count > target
        b = np.where(upper, mid, b)
        a = np.where(upper, a, mid)
        if np.all(b - a <= tol * np.maximum(1.0, np.abs(a) + np.abs(b))):
            break
    return 0.5 * (a + b)


if njit is not None:
    # compiled lazily on first call; available even when dispatch is disabled
    laguerre_scaled_numba = njit(cache=True)(_laguerre_scaled_loop)
    bisection_numba = njit(cache=True)(_bisection_loop)
else:  # pragma: no cover
    laguerre_scaled_numba = None
    bisection_numba = None

bisection_numpy = _bisection_numpy


def laguerre_scaled(x, alpha, nmax):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if USE_NUMBA:
        return laguerre_scaled_numba(x, float(alpha), int(nmax))
    return laguerre_scaled_numpy(x, float(alpha), int(nmax))


def tridiagonal_bisection(diag, off, tol=1e-15):
    """All eigenvalues of a symmetric tridiagonal matrix, ascending.

    ``diag`` has length n and ``off`` length n-1.  Brackets come from the
    Gershgorin discs.
    """
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off = np.ascontiguousarray(off, dtype=np.float64)
    radius = np.zeros_like(diag)
    radius[:-1] += np.abs(off)
    radius[1:] += np.abs(off)
    lo = float(np.min(diag - radius)) - 1e-12
    hi = float(np.max(diag + radius)) + 1e-12
    off2 = off * off
    if USE_NUMBA:
        return bisection_numba(diag, off2, lo, hi, tol)
    return _bisection_numpy(diag, off2, lo, hi, tol)
