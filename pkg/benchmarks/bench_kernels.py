#!/usr/bin/env python3
"""Compare the numba and pure-numpy paths of the hot kernels.

Times the scaled Laguerre recurrence (basis evaluation on the quadrature
grids used for N = 100 and 500) and the Sturm bisection oracle, after a
warm-up call that absorbs JIT compilation.  Also checks both paths agree.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from siegert import _kernels
from siegert.basis import gauss_laguerre, panel_legendre


def best_of(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    for N in (100, 500):
        x, _ = gauss_laguerre(N + 4)
        yield f"laguerre Gauss-Laguerre N={N}", lambda x=x, N=N: (x, 2.0, N - 1), "laguerre"
        r, _ = panel_legendre(0.0, 6.0, width=min(1.0, 4.0 / np.sqrt(N)))
        yield f"laguerre panels r<6 N={N} ({r.size} nodes)", lambda r=r, N=N: (r, 2.0, N - 1), "laguerre"
    rng = np.random.default_rng(0)
    for n in (50, 200):
        d, e = rng.standard_normal(n), rng.standard_normal(n - 1)
        yield f"Sturm bisection n={n}", lambda d=d, e=e: (d, e * e, -30.0, 30.0, 1e-15), "bisection"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels.laguerre_scaled_numba is None:
        raise SystemExit("numba is not installed; nothing to compare")
    impls = {
        "laguerre": (_kernels.laguerre_scaled_numpy, _kernels.laguerre_scaled_numba),
        "bisection": (_kernels.bisection_numpy, _kernels.bisection_numba),
    }
    print(f"dispatch default: {'numba' if _kernels.USE_NUMBA else 'numpy'} (SIEGERT_DISABLE_NUMBA)")
    print(f"{'kernel':<40} {'numpy [ms]':>11} {'numba [ms]':>11} {'speed-up':>9} {'max |diff|':>11}")
    for name, make_args, kind in cases():
        f_np, f_nb = impls[kind]
        a = make_args()
        diff = np.max(np.abs(f_np(*a) - f_nb(*a)))
        t_np = best_of(lambda: f_np(*a), args.repeat)
        t_nb = best_of(lambda: f_nb(*a), args.repeat)
        print(f"{name:<40} {1e3 * t_np:>11.3f} {1e3 * t_nb:>11.3f} {t_np / t_nb:>8.1f}x {diff:>11.1e}")


if __name__ == "__main__":
    main()
