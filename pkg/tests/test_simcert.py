import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from oracles import grid_similarity_2x2
from simlab.errors import RadiusBelowOne, RadiusNotLessThanOne, RateBelowAbscissa, ZeroPolynomial
from simlab.numkit import TolerancePolicy, cond_pd, matexp, numerical_abscissa, spectral_abscissa
from simlab.simcert import (INFINITY, SemigroupSpec, Verdict, certificate_is_valid,
                            continuous_residual, contraction_feasible, crsim_profile,
                            discrete_residual, neumann_certificate, peripheral_vector,
                            poly_lower_bound, power_lower_bound, quasi_rate, rota_renorm,
                            semigroup_constant, similarity_constant)

JORDAN = np.array([[1.0, 1.0], [0.0, 1.0]])
NIL2 = np.array([[0.0, 2.0], [0.0, 0.0]])
seeds = st.integers(0, 2 ** 32 - 1)


def cgauss(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def stable(rng, n, margin=(0.1, 1.0)):
    G = cgauss(rng, n)
    return G - (spectral_abscissa(G) + rng.uniform(*margin)) * np.eye(n)


# ---------------------------------------------------------------- Neumann series

def test_neumann_examples():
    c = neumann_certificate(np.zeros((2, 2)))
    assert np.allclose(c.P, np.eye(2)) and c.kappa == 1.0
    c = neumann_certificate([[0, 0.5], [0, 0]])
    assert np.allclose(c.P, np.diag([1.0, 1.25]), atol=1e-14)
    assert c.kappa == pytest.approx(1.25, rel=1e-14)
    assert neumann_certificate([[0.9]]).kappa == 1.0


def test_neumann_rejects_radius_one():
    with pytest.raises(RadiusNotLessThanOne):
        neumann_certificate(JORDAN)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 6), st.floats(0.05, 0.97))
def test_neumann_certificate_is_sound(seed, n, r):
    rng = np.random.default_rng(seed)
    T = cgauss(rng, n)
    T *= r / np.max(np.abs(np.linalg.eigvals(T)))
    c = neumann_certificate(T)
    assert certificate_is_valid(c, T=T)


# ---------------------------------------------------------------- feasibility

def test_feasibility_examples():
    assert np.allclose(contraction_feasible(np.diag([0.5, -1.0]), 1.0), np.eye(2))
    P = contraction_feasible(NIL2, 4.0)
    assert P is not None
    assert np.linalg.eigvalsh(P - NIL2.T @ P @ NIL2)[0] >= -1e-9 * np.max(np.abs(P))
    assert cond_pd(P) <= 4.0 * (1 + 1e-8)
    assert contraction_feasible(NIL2, 3.9) is None


# ---------------------------------------------------------------- similarity constant

def test_similarity_examples():
    assert similarity_constant(np.diag([0.3, -1.0])).constant == 1.0
    res = similarity_constant(NIL2)
    assert res.similar and res.constant == pytest.approx(2.0, rel=1e-6)
    for kmax in (1e2, 1e4, 1e8):
        assert similarity_constant(JORDAN, kappa_max=kmax).verdict is Verdict.NOT_SIMILAR_WITHIN_BUDGET
    res = similarity_constant([[1.5]])
    assert res.verdict is Verdict.SPECTRAL_OBSTRUCTION and res.constant == INFINITY
    assert res.certificate is None


def test_similarity_matches_grid_oracle():
    rng = np.random.default_rng(77)
    for _ in range(8):
        T = cgauss(rng, 2)
        T *= rng.uniform(0.3, 0.95) / np.max(np.abs(np.linalg.eigvals(T)))
        res = similarity_constant(T)
        ref = grid_similarity_2x2(T, neumann_certificate(T).kappa)
        assert abs(res.constant - ref) <= 1e-2


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 6), st.floats(0.1, 0.95))
def test_sandwich_and_soundness(seed, n, r):
    rng = np.random.default_rng(seed)
    T = cgauss(rng, n)
    T *= r / np.max(np.abs(np.linalg.eigvals(T)))
    res = similarity_constant(T)
    assert res.similar
    assert certificate_is_valid(res.certificate, T=T)
    assert res.lower_bound <= res.constant * (1 + 1e-8) <= res.upper_bound * (1 + 1e-8)
    assert max(1.0, power_lower_bound(T, 20)) <= res.constant * (1 + 1e-8)
    assert res.constant <= np.sqrt(neumann_certificate(T).kappa) * (1 + 1e-8)


def test_unitary_invariance():
    rng = np.random.default_rng(4)
    for n in (2, 3):
        T = cgauss(rng, n)
        T *= 0.8 / np.max(np.abs(np.linalg.eigvals(T)))
        U = unitary_group.rvs(n, random_state=rng)
        a = similarity_constant(T).constant
        b = similarity_constant(U.conj().T @ T @ U).constant
        assert b == pytest.approx(a, rel=1e-6)


def test_certificate_invariants_hold_independently():
    rng = np.random.default_rng(9)
    tol = TolerancePolicy()
    for _ in range(10):
        T = cgauss(rng, 3)
        T *= 0.9 / np.max(np.abs(np.linalg.eigvals(T)))
        cert = similarity_constant(T).certificate
        w = np.linalg.eigvalsh(cert.P)
        assert w[0] >= 1 - tol.tol_psd
        assert w[-1] <= cert.kappa * (1 + tol.tol_rel)
        D = cert.P - T.conj().T @ cert.P @ T
        assert np.linalg.eigvalsh((D + D.conj().T) / 2)[0] >= -tol.tol_psd * cert.kappa


# ---------------------------------------------------------------- semigroups

def test_semigroup_examples():
    res = semigroup_constant(-np.eye(3))
    assert res.constant == 1.0 and np.allclose(res.certificate.P, np.eye(3))
    assert semigroup_constant([[1j]]).constant == 1.0
    A = np.array([[-1.0, 4.0], [0.0, -1.0]])
    ref = grid_similarity_2x2(A, 100.0, generator=True)
    assert abs(semigroup_constant(A).constant - ref) <= 1e-2


def test_semigroup_obstruction_and_budget():
    assert semigroup_constant([[0.5]]).verdict is Verdict.SPECTRAL_OBSTRUCTION
    res = semigroup_constant([[0.0, 1.0], [0.0, 0.0]])
    assert res.verdict is Verdict.NOT_SIMILAR_WITHIN_BUDGET


def test_semigroup_spec_forms():
    S = SemigroupSpec.generator([[-1.0]])
    assert S.is_generator and S.at(2.0)[0, 0] == pytest.approx(np.exp(-2.0))
    S = SemigroupSpec.sampled([1.0, 2.0], [[[0.5]], [[0.25]]])
    assert not S.is_generator and S.at(2.0)[0, 0] == 0.25
    with pytest.raises(ValueError):
        SemigroupSpec.sampled([2.0, 1.0], [[[0.5]], [[0.25]]])


# ---------------------------------------------------------------- Rota renorming

def test_rota_examples():
    c = rota_renorm([[-1.0]], -0.5)
    assert c.P[0, 0].real == pytest.approx(2.0, rel=1e-12) and c.rate == -0.5
    assert continuous_residual(np.array([[-1.0]]), c.P, -0.5) <= 1e-12
    c2 = rota_renorm(-np.eye(2), -0.5)
    assert np.allclose(c2.P, 2.0 * np.eye(2), atol=1e-12)


def test_rota_rejects_rate_below_abscissa():
    with pytest.raises(RateBelowAbscissa):
        rota_renorm(np.diag([-1.0, -0.2]), -0.3)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 4), st.floats(0.01, 0.99))
def test_rota_residual(seed, n, frac):
    rng = np.random.default_rng(seed)
    A = stable(rng, n)
    a = spectral_abscissa(A) * (1 - frac)
    Q = rota_renorm(A, a)
    assert continuous_residual(A, Q.P, a) <= 1e-9
    assert np.linalg.eigvalsh(Q.P)[0] >= 1 - 1e-9


# ---------------------------------------------------------------- quasi rates

def test_quasi_rate_examples():
    A = np.diag([-1.0, -3.0 + 2j])
    assert quasi_rate(A, 1.0) == pytest.approx(-1.0, abs=1e-7)
    assert quasi_rate([[0.0, 1.0], [0.0, 0.0]], 4.0) == pytest.approx(0.25, abs=1e-6)


def test_quasi_rate_monotone_in_budget():
    rng = np.random.default_rng(12)
    for _ in range(4):
        A = cgauss(rng, 3)
        rates = [quasi_rate(A, k) for k in (1.0, 10.0, 100.0, 1e4)]
        assert all(b <= a + 1e-8 for a, b in zip(rates, rates[1:]))
        assert rates[-1] >= spectral_abscissa(A) - 1e-8
        assert rates[0] <= numerical_abscissa(A) + 1e-8


# ---------------------------------------------------------------- lower bounds

def test_power_lower_bound_examples():
    rng = np.random.default_rng(1)
    C = cgauss(rng, 3)
    C /= np.linalg.norm(C, 2)
    assert power_lower_bound(C, 10) <= 1 + 1e-12
    assert power_lower_bound(JORDAN, 10) >= 10
    assert power_lower_bound(NIL2, 5) == pytest.approx(2.0)


def test_poly_lower_bound_examples():
    rng = np.random.default_rng(6)
    C = cgauss(rng, 3)
    C /= np.linalg.norm(C, 2)
    polys = [cgauss(rng, 1).ravel().tolist() + cgauss(rng, 1).ravel().tolist() for _ in range(5)]
    assert poly_lower_bound(C, polys) <= 1 + 1e-6
    assert poly_lower_bound(NIL2, [[0, 1]]) == pytest.approx(2.0)
    for n in (1, 2, 3):
        mono = [0] * n + [1]
        assert poly_lower_bound(JORDAN, [mono]) == pytest.approx(
            np.linalg.norm(np.linalg.matrix_power(JORDAN, n), 2))
    with pytest.raises(ZeroPolynomial):
        poly_lower_bound(C, [[0, 0]])


# ---------------------------------------------------------------- peripheral vectors

def test_peripheral_examples():
    x = peripheral_vector(np.diag([1.0, 0.5]))
    assert np.allclose(np.abs(x), [1, 0])
    x = peripheral_vector(JORDAN, n0=20)
    assert np.allclose(np.abs(x), [1, 0], atol=1e-8)
    for n in range(1, 20):
        assert np.linalg.norm(np.linalg.matrix_power(JORDAN, n) @ x) == pytest.approx(1.0)
    U = np.array([[0, 1], [1, 0]], dtype=complex)
    x = peripheral_vector(U, n0=5)
    assert np.linalg.norm(x) == pytest.approx(1.0)
    with pytest.raises(RadiusBelowOne):
        peripheral_vector(np.diag([0.5]))


# ---------------------------------------------------------------- small-time profile

def test_crsim_examples():
    grid = [2.0 ** -k for k in range(6, -1, -1)]
    prof = crsim_profile(-np.eye(2), grid)
    assert prof.verdict == "Consistent"
    assert all(r.constant == 1.0 for r in prof.results)
    R = np.diag([1.0, 2.0])
    A = R @ np.diag([-1.0, -2.0]) @ np.linalg.inv(R)
    prof = crsim_profile(A, grid)
    assert prof.verdict == "Consistent"
    consts = [r.constant for r in prof.results]
    assert max(consts) <= 2.0 + 1e-8
    assert abs(max(consts) - prof.semigroup.constant) <= 0.05 * prof.semigroup.constant
    prof = crsim_profile([[0.0, 1.0], [0.0, 0.0]], grid)
    assert all(r.verdict is Verdict.NOT_SIMILAR_WITHIN_BUDGET for r in prof.results)
    assert prof.semigroup.verdict is Verdict.NOT_SIMILAR_WITHIN_BUDGET


def test_discrete_residual_sign():
    T = np.diag([0.5, 2.0])
    assert discrete_residual(T, np.eye(2)) == pytest.approx(3.0)
    assert discrete_residual(matexp(-np.eye(2), 1.0), np.eye(2)) < 0
