"""Quick invariant suites runnable from the command line.

Each suite draws its data from a fixed seed and returns a
:class:`SuiteSummary`; the checks mirror the property tests shipped with
the package, at a smaller scale.
"""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..bhatskeide import (CircleGrid, InterpolatedSemigroup, bs_check_interpolation,
                          bs_extract_certificate, bs_matrix, bs_semigroup_residual,
                          structure_law_holds)
from ..errors import UnknownSuite
from ..gallery import ModelSpec, build_model, sample
from ..numkit.core import (kron, numerical_abscissa, op_norm, spectral_abscissa,
                           spectral_radius)
from ..simcert import (Verdict, certificate_is_valid, continuous_residual,
                       neumann_certificate, rota_renorm, similarity_constant)
from ..tensorsplit import extract_factor_certificate, split_scaling_discrete

SEED = 20240607


@dataclass
class SuiteSummary:
    suite: str
    checks: list = field(default_factory=list)

    def check(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.checks)

    def lines(self):
        return [f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else "")
                for name, ok, detail in self.checks]


def _cgauss(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def _product_laws(s, rng):
    worst_n = worst_r = 0.0
    for _ in range(50):
        A, B = _cgauss(rng, rng.integers(1, 5)), _cgauss(rng, rng.integers(1, 5))
        K = kron(A, B)
        worst_n = max(worst_n, abs(op_norm(K) / (op_norm(A) * op_norm(B)) - 1))
        worst_r = max(worst_r, abs(spectral_radius(K) / (spectral_radius(A) * spectral_radius(B)) - 1))
    s.check("norm multiplicativity", worst_n <= 1e-8, f"max rel err {worst_n:.2e}")
    s.check("radius multiplicativity", worst_r <= 1e-8, f"max rel err {worst_r:.2e}")


def _certificates(s, rng):
    ok = True
    for _ in range(10):
        T = _cgauss(rng, 2)
        T *= rng.uniform(0.3, 0.95) / spectral_radius(T)
        res = similarity_constant(T)
        neu = neumann_certificate(T)
        ok &= res.similar and certificate_is_valid(res.certificate, T=T)
        ok &= res.constant <= np.sqrt(neu.kappa) * (1 + 1e-6)
    s.check("similarity certificates valid and below the Neumann bound", ok)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 5))
        G = _cgauss(rng, n)
        A = G - (spectral_abscissa(G) + rng.uniform(0.1, 2.0)) * np.eye(n)
        a = rng.uniform(spectral_abscissa(A), 0)
        Q = rota_renorm(A, a)
        worst = max(worst, continuous_residual(A, Q.P, a))
    s.check("Lyapunov renorming residual", worst <= 1e-9, f"max residual {worst:.2e}")


def conjugated_contraction(rng, n):
    """``R C R^-1`` with ``C`` a unimodular eigenvalue plus a strict contraction block."""
    C = np.zeros((n, n), dtype=complex)
    C[0, 0] = np.exp(2j * np.pi * rng.uniform())
    if n > 1:
        B = _cgauss(rng, n - 1)
        C[1:, 1:] = B * rng.uniform(0.2, 0.95) / op_norm(B)
    R = np.eye(n) + 0.5 * _cgauss(rng, n)
    return R @ C @ np.linalg.inv(R)


def _splitting(s, rng):
    ok = True
    for _ in range(5):
        mats = [conjugated_contraction(rng, int(n)) for n in rng.integers(1, 4, size=2)]
        res = split_scaling_discrete(mats)
        ok &= res.similar
        if res.similar:
            prod = np.prod([c.kappa for c in res.factor_certificates])
            ok &= abs(res.tensor_certificate.kappa - prod) <= 1e-8 * prod
            T1, T2 = (a * F for a, F in zip(res.scalings, mats))
            ext = extract_factor_certificate(res.tensor_certificate, T1, T2, 1)
            ok &= ext.kappa <= res.tensor_certificate.kappa + 1e-8
    s.check("split round trip", ok)
    bad = 0
    for _ in range(20):
        A, B = _cgauss(rng, 2), _cgauss(rng, 2)
        B *= 1.2 / (spectral_radius(A) * spectral_radius(B))
        res = split_scaling_discrete([A, B])
        bad += res.verdict is not Verdict.SPECTRAL_OBSTRUCTION or res.tensor_certificate is not None
    s.check("obstruction soundness", bad == 0, f"{bad} false positives")


def _interpolation(s, rng):
    grid = CircleGrid(8)
    ok_law = ok_int = ok_cert = True
    for _ in range(3):
        T = rng.integers(-4, 5, size=(2, 2)) / 8.0
        S = InterpolatedSemigroup(T, grid)
        for a in range(0, 17, 3):
            for b in range(0, 17, 5):
                ok_law &= bs_semigroup_residual(S, Fraction(a, 8), Fraction(b, 8)) == 0.0
                ok_law &= structure_law_holds(8, a, b)
        ok_int &= all(bs_check_interpolation(S, n) == 0.0 for n in range(5))
        if op_norm(T) < 1:
            P = np.eye(S.dim)
            cert = bs_extract_certificate(P, S)
            ok_cert &= cert.residual <= 1e-9
            ok_cert &= all(op_norm(bs_matrix(S, Fraction(k, 8))) <= 1 + 1e-12 for k in range(17))
    s.check("exact semigroup law", ok_law)
    s.check("integer times reproduce powers", ok_int)
    s.check("contractivity and certificate extraction", ok_cert)


def _gallery_trends(s, rng):
    consts = [similarity_constant(sample(build_model(ModelSpec("foguel", {"N": N})), 1)).constant
              for N in (3, 9, 27)]
    s.check("Foguel constants strictly increase", consts[0] < consts[1] < consts[2],
            ", ".join(f"{c:.6f}" for c in consts))
    m = build_model(ModelSpec("counter_nilpotent", {"M": 6, "N": 4}))
    s.check("counter_nilpotent vanishes at t = 1", not np.any(sample(m, 1)))
    A = build_model(ModelSpec("benchimol", {"K": 2, "q": 1})).generator
    s.check("Benchimol generator is a bounded perturbation",
            np.isfinite(numerical_abscissa(A)))


SUITES = {
    "product-laws": _product_laws,
    "certificates": _certificates,
    "splitting": _splitting,
    "interpolation": _interpolation,
    "gallery-trends": _gallery_trends,
}


def verify_suite(name):
    """Run a named invariant suite.

    Raises
    ------
    UnknownSuite
        If ``name`` is not one of :data:`SUITES`.
    """
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    summary = SuiteSummary(name)
    SUITES[name](summary, np.random.default_rng(SEED))
    return summary
