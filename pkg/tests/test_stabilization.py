import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from siegert.basis import HamiltonianFactors, LaguerreBasis, assemble_factors
from siegert.potentials import WellBarrierParams
from siegert.stabilization import (
    ContractError, WindowError, bisection_eigenvalues, boundary_density, do_curve, eigensolve_symmetric,
    householder_tridiagonal, localize, sweep,
)

from conftest import pipeline

GRID = np.linspace(0.0, 10.0, 201)


@pytest.fixture(scope="module")
def spec100():
    f = assemble_factors(LaguerreBasis(100), WellBarrierParams(0.15, 5.0, 6.0), 0)
    return sweep(f, GRID, levels=30)


def test_trivial_eigenproblems():
    w, v = eigensolve_symmetric(np.eye(5))
    assert np.allclose(w, 1.0)
    w, v = eigensolve_symmetric(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(w, [-1.0, 1.0], atol=1e-15)


def test_non_symmetric_rejected():
    with pytest.raises(ContractError):
        eigensolve_symmetric(np.array([[0.0, 1.0], [0.5, 0.0]]))


def test_random_against_bisection(rng):
    for _ in range(5):
        A = rng.standard_normal((50, 50))
        A = A + A.T
        w, v = eigensolve_symmetric(A)
        assert np.max(np.abs(w - bisection_eigenvalues(A))) < 1e-10
        assert np.linalg.norm(A @ v - v * w) <= 1e-10 * np.linalg.norm(A)
        assert np.max(np.abs(v.T @ v - np.eye(50))) < 1e-10


def test_householder_is_similarity(rng):
    A = rng.standard_normal((30, 30))
    A = A + A.T
    d, e = householder_tridiagonal(A)
    T = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    assert np.allclose(np.linalg.eigvalsh(T), np.linalg.eigvalsh(A), atol=1e-12)


def test_eigensolve_deterministic(rng):
    A = rng.standard_normal((40, 40))
    A = A + A.T
    w1, v1 = eigensolve_symmetric(A)
    w2, v2 = eigensolve_symmetric(A.copy())
    assert np.array_equal(w1, w2) and np.array_equal(v1, v2)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (8, 8), elements=st.floats(-10, 10)))
def test_eigensolve_residual_property(M):
    A = M + M.T
    w, v = eigensolve_symmetric(A)
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(A @ v - v * w) <= 1e-10 * max(np.linalg.norm(A), 1.0)


def test_single_point_sweep():
    f = assemble_factors(LaguerreBasis(20), WellBarrierParams(0.15, 5.0, 6.0), 0)
    s = sweep(f, [0.3])
    assert s.energies.shape == (1, 20)
    assert np.allclose(np.linalg.norm(s.vectors[0], axis=0), 1.0)
    with pytest.raises(ValueError):
        sweep(f, [0.3, 0.2])


def test_spectrum_monotone(spec100):
    assert np.all(np.diff(spec100.energies, axis=0) >= -1e-12)


def test_do_bounds_and_endpoints(spec100):
    for n in range(2, 31):
        c = do_curve(spec100, n, refine=False)
        assert np.all((c.values >= 0) & (c.values <= 2))
        assert c.values[0] >= 1 - 1e-12 and c.values[-1] >= 1 - 1e-12


def test_window_validation(spec100):
    with pytest.raises(WindowError):
        do_curve(spec100, 5, window=(0.0, 0.05))
    with pytest.raises(WindowError):
        do_curve(spec100, 5, window=(0.01, 5.0))
    c = do_curve(spec100, 5, window=(1.0, 4.0), refine=False)
    assert c.window == (1.0, 4.0) and len(c.lambdas) == 61


def test_sign_flip_invariance(spec100, rng):
    flips = rng.choice([-1.0, 1.0], size=spec100.vectors.shape[::2])[:, None, :]
    flipped = dataclasses.replace(spec100, vectors=spec100.vectors * flips)
    for n in (12, 20):
        a, b = localize(spec100, n), localize(flipped, n)
        assert [(x.lambda_star, x.energy, x.density) for x in a] == [(x.lambda_star, x.energy, x.density) for x in b]
        assert np.allclose(do_curve(spec100, n, refine=False).values, do_curve(flipped, n, refine=False).values,
                           atol=1e-14)


def test_degenerate_w_zero():
    f = assemble_factors(LaguerreBasis(20), WellBarrierParams(0.15, 5.0, 6.0), 0)
    frozen = dataclasses.replace(f, W=np.zeros_like(f.W))
    s = sweep(frozen, np.linspace(0, 1, 11))
    for n in range(1, 21):
        assert np.allclose(do_curve(s, n).values, 2.0)
        assert localize(s, n) == []


def test_boundary_density_scale_invariant(spec100):
    est = localize(spec100, 20)[0]
    for c in (-1.0, 3.5, 1e-3):
        assert boundary_density(spec100.factors, c * est.coeffs) == pytest.approx(est.density, rel=1e-12)


def test_localized_estimates(spec100):
    found = {n: localize(spec100, n) for n in range(2, 31)}
    assert sum(bool(v) for v in found.values()) >= 10
    for n, ests in found.items():
        for e in ests:
            assert e.do_value < 0.5 and e.density >= 0
            assert 0.0 < e.lambda_star < 10.0
            # energy is the n-th eigenvalue at the refined lambda
            w = np.linalg.eigvalsh(spec100.factors.hamiltonian(e.lambda_star))
            assert e.energy == pytest.approx(w[n - 1], abs=1e-12)


def test_candidates_ordered_by_depth(spec100):
    for n in range(2, 31):
        vals = [e.do_value for e in localize(spec100, n, threshold=2.0)]
        assert vals == sorted(vals)


@pytest.mark.slow
def test_energy_convergence_100_vs_500():
    _, _, r100 = pipeline(0, 100)
    _, _, r500 = pipeline(0, 500)
    lam5 = np.array([r.lambda_star for r in r500])
    E5 = np.array([r.energy_var for r in r500])
    order = np.argsort(lam5)
    lo, hi = lam5.min(), lam5.max()
    mid = [r for r in r100 if lo + 0.25 * (hi - lo) <= r.lambda_star <= hi - 0.25 * (hi - lo)]
    assert mid
    for r in mid:
        assert abs(r.energy_var - np.interp(r.lambda_star, lam5[order], E5[order])) <= 1e-3
