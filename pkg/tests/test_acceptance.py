"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line (collected into the pytest
terminal summary) with the measured error and wall time, then asserts
both the numerical tolerance and the time limit.  Running this file as a
script prints the same lines without pytest.
"""
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import cgauss, conjugated_contraction, grid_similarity_2x2
from simlab.bhatskeide import (CircleGrid, InterpolatedSemigroup, bs_check_interpolation,
                               bs_extract_certificate, bs_matrix, bs_semigroup_residual)
from simlab.gallery import ModelSpec, build_model, foguel_matrix, lemerdy_basis, sample
from simlab.numkit import kron, matexp, op_norm, spectral_abscissa, spectral_radius
from simlab.simcert import (Verdict, continuous_residual, crsim_profile, neumann_certificate,
                            rota_renorm, semigroup_constant, similarity_constant)
from simlab.tensorsplit import extract_factor_certificate, split_scaling_discrete

FOGUEL_GOLDENS = {9: 1.61803399, 27: 1.85910849, 81: 2.11630214}


def record(number, title, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    line = (f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}; "
            f"{elapsed:.1f} s (limit {limit:g} s)")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_1_product_laws():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst_n = worst_r = 0.0
    for _ in range(200):
        A = cgauss(rng, int(rng.integers(1, 6)))
        B = cgauss(rng, int(rng.integers(1, 6)))
        K = kron(A, B)
        nA, nB = op_norm(A), op_norm(B)
        rA, rB = spectral_radius(A), spectral_radius(B)
        worst_n = max(worst_n, abs(op_norm(K) - nA * nB) / (nA * nB))
        worst_r = max(worst_r, abs(spectral_radius(K) - rA * rB) / (rA * rB))
    ok = worst_n <= 1e-8 and worst_r <= 1e-8
    assert record(1, "product laws, 200 pairs", ok,
                  f"max rel err norm {worst_n:.1e}, radius {worst_r:.1e}",
                  time.perf_counter() - t0, 10)


@pytest.mark.slow
def test_2_solver_vs_grid_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    above_neumann = 0
    for _ in range(50):
        T = cgauss(rng, 2)
        T *= rng.uniform(0.1, 0.95) / spectral_radius(T)
        res = similarity_constant(T)
        bound = np.sqrt(neumann_certificate(T).kappa)
        ref = grid_similarity_2x2(T, bound ** 2)
        worst = max(worst, abs(res.constant - ref))
        above_neumann += res.constant > bound * (1 + 1e-12)
    ok = worst <= 1e-2 and above_neumann == 0
    assert record(2, "certificate solver vs grid oracle, 50 matrices", ok,
                  f"max |C - C_grid| {worst:.1e}, {above_neumann} above Neumann bound",
                  time.perf_counter() - t0, 60)


def test_3_lyapunov_renorming():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = -np.inf
    for _ in range(100):
        n = int(rng.integers(1, 6))
        G = cgauss(rng, n)
        A = G - (spectral_abscissa(G) + rng.uniform(0.05, 2.0)) * np.eye(n)
        a = rng.uniform(spectral_abscissa(A), 0.0)
        Q = rota_renorm(A, a)
        worst = max(worst, continuous_residual(A, Q.P, a))
    assert record(3, "rate-a renorming, 100 generators", worst <= 1e-9,
                  f"max dissipativity residual {worst:.1e}", time.perf_counter() - t0, 30)


def test_4_splitting_round_trip():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    not_similar = 0
    worst_prod = worst_ext = 0.0
    for _ in range(50):
        mats = [conjugated_contraction(rng, int(n)) for n in rng.integers(1, 5, size=2)]
        res = split_scaling_discrete(mats)
        if not res.similar:
            not_similar += 1
            continue
        prod = res.factor_certificates[0].kappa * res.factor_certificates[1].kappa
        worst_prod = max(worst_prod, abs(res.tensor_certificate.kappa - prod) / prod)
        T1, T2 = (a * F for a, F in zip(res.scalings, mats))
        for index in (1, 2):
            ext = extract_factor_certificate(res.tensor_certificate, T1, T2, index)
            worst_ext = max(worst_ext, ext.kappa - res.tensor_certificate.kappa)
    ok = not_similar == 0 and worst_prod <= 1e-8 and worst_ext <= 1e-8
    assert record(4, "splitting round trip, 50 pairs", ok,
                  f"{not_similar} not Similar, kappa product rel err {worst_prod:.1e}, "
                  f"max extracted - tensor kappa {worst_ext:.1e}",
                  time.perf_counter() - t0, 120)


def _dyadic_contraction(rng, n):
    # dyadic entries, halved until contractive: all products stay exact
    T = rng.integers(-8, 9, size=(n, n)) / 8.0
    while op_norm(T) >= 1:
        T = T / 2
    return T


def test_5_interpolation_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    M = 16
    grid = CircleGrid(M)
    times = [Fraction(k, M) for k in range(4 * M + 1)]
    law = power = 0.0
    worst_norm = 0.0
    worst_res = -np.inf
    for _ in range(20):
        T = _dyadic_contraction(rng, int(rng.integers(1, 4)))
        S = InterpolatedSemigroup(T, grid)
        for s in times:
            for t in times:
                if s + t <= 4:
                    law = max(law, bs_semigroup_residual(S, s, t))
        power = max(power, max(bs_check_interpolation(S, n) for n in range(9)))
        worst_norm = max(worst_norm, max(op_norm(bs_matrix(S, t)) for t in times))
        base = similarity_constant(T).certificate
        cert = bs_extract_certificate(np.kron(np.eye(M), base.P), S)
        worst_res = max(worst_res, cert.residual)
    ok = law == 0.0 and power == 0.0 and worst_norm <= 1 + 1e-12 and worst_res <= 1e-9
    assert record(5, "interpolation identities, 20 bases, M = 16", ok,
                  f"law residual {law:g}, power residual {power:g}, "
                  f"max norm {worst_norm:.15f}, extraction residual {worst_res:.1e}",
                  time.perf_counter() - t0, 60)


def test_6_crsim_profile():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    grid = [2.0 ** -k for k in range(8, -1, -1)]
    worst_mono = -np.inf
    worst_gap = 0.0
    for _ in range(20):
        G = cgauss(rng, 3)
        A = G - (spectral_abscissa(G) + rng.uniform(0.1, 1.0)) * np.eye(3)
        prof = crsim_profile(A, grid)
        cs = [r.constant for r in prof.results]
        # cs[j + 1] is the constant at twice the time of cs[j]
        worst_mono = max(worst_mono, max(cs[j + 1] - cs[j] for j in range(len(cs) - 1)))
        c_small = similarity_constant(matexp(A, 2.0 ** -10)).constant
        c_semi = semigroup_constant(A).constant
        worst_gap = max(worst_gap, abs(c_small - c_semi) / c_semi)
    ok = worst_mono <= 1e-6 and worst_gap <= 0.05
    assert record(6, "small-time profile, 20 generators", ok,
                  f"max C(2t) - C(t) {worst_mono:.1e}, "
                  f"max rel gap to semigroup constant {worst_gap:.1e}",
                  time.perf_counter() - t0, 120)


@pytest.mark.slow
def test_7_gallery_trends():
    t0 = time.perf_counter()
    consts = {N: similarity_constant(foguel_matrix(N)).constant for N in FOGUEL_GOLDENS}
    golden = max(abs(consts[N] - FOGUEL_GOLDENS[N]) for N in FOGUEL_GOLDENS)
    increasing = consts[9] < consts[27] < consts[81]
    m = build_model(ModelSpec("counter_nilpotent", {"M": 8, "N": 8, "B": lemerdy_basis(8, 5.0)}))
    nilpotent = all(not np.any(sample(m, t)) for t in (1, 1.5, 2, 4))
    lm = build_model(ModelSpec("lemerdy", {"B": lemerdy_basis(8, 5.0)}))
    lm_fails = semigroup_constant(lm.generator, kappa_max=1e6).verdict is \
        Verdict.NOT_SIMILAR_WITHIN_BUDGET
    ok = increasing and golden <= 1e-6 and nilpotent and lm_fails
    detail = (", ".join(f"C({N}) = {c:.8f}" for N, c in consts.items())
              + f", max golden err {golden:.1e}, nilpotent at t >= 1: {nilpotent}, "
              f"factor fails kappa 1e6: {lm_fails}")
    assert record(7, "gallery trends", ok, detail, time.perf_counter() - t0, 300)


def test_8_obstruction_soundness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    false_pos = 0
    for _ in range(100):
        A = cgauss(rng, int(rng.integers(1, 5)))
        B = cgauss(rng, int(rng.integers(1, 5)))
        B *= rng.uniform(1.01, 3.0) / (spectral_radius(A) * spectral_radius(B))
        res = split_scaling_discrete([A, B])
        false_pos += (res.verdict is not Verdict.SPECTRAL_OBSTRUCTION
                      or res.tensor_certificate is not None
                      or any(c is not None for c in res.factor_certificates))
    assert record(8, "obstruction soundness, 100 pairs", false_pos == 0,
                  f"{false_pos} false positives", time.perf_counter() - t0, 10)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
