"""Splitting similarity to contractions across Kronecker factors.

A Kronecker product ``T_1 (x) ... (x) T_m`` is similar to a contraction
exactly when some rescaling ``alpha_k T_k`` with ``prod alpha_k = 1`` makes
every factor similar to a contraction; for semigroups the scalings become
additive shifts ``A_k + d_k I`` with ``sum d_k = 0``.  This module finds the
scalings, certifies the factors, multiplies certificates together, and
compresses a tensor certificate back down to a factor.
"""
from dataclasses import dataclass, field

import numpy as np

from ..errors import BudgetExceeded, DimensionMismatch, EmptySample, NoPeripheralVector, ZeroFactor
from ..numkit.core import (DEFAULT_TOL, adjoint, as_operator, hermitian_part, kron_all,
                           spectral_abscissa, spectral_radius)
from ..numkit.matrixio import format_real
from ..simcert.constants import (KAPPA_MAX, neumann_certificate, rota_renorm,
                                 semigroup_constant, similarity_constant)
from ..simcert.types import (MetricCertificate, SemigroupSpec, Verdict, certificate_is_valid,
                             continuous_residual, discrete_residual, make_certificate)

N_CESARO = 64


@dataclass
class SplitResult:
    """Scalings and certificates for a tensor product.

    ``scalings`` are multiplicative (``mode == "discrete"``, product one)
    or additive (``mode == "continuous"``, sum zero).
    """

    verdict: Verdict
    scalings: list
    factor_certificates: list
    tensor_certificate: MetricCertificate = None
    mode: str = "discrete"
    notes: list = field(default_factory=list)

    @property
    def similar(self):
        return self.verdict is Verdict.SIMILAR

    def report(self):
        """One line per factor ``k scaling kappa residual`` and a tensor summary line."""
        lines = []
        for k, (s, c) in enumerate(zip(self.scalings, self.factor_certificates), start=1):
            kap = format_real(c.kappa) if c is not None else "inf"
            res = format_real(c.residual) if c is not None else "nan"
            lines.append(f"{k} {format_real(float(s))} {kap} {res}")
        t = self.tensor_certificate
        kap = format_real(t.kappa) if t is not None else "inf"
        res = format_real(t.residual) if t is not None else "nan"
        lines.append(f"tensor {self.verdict} {kap} {res}")
        return "\n".join(lines) + "\n"


def growth_bound(S):
    """Exponential growth bound of a semigroup.

    Generator kind: spectral abscissa.  Sampled kind: ``log r(T(t)) / t``
    at the largest sampled time (``-inf`` when that sample is nilpotent).
    """
    if isinstance(S, SemigroupSpec):
        if S.is_generator:
            return spectral_abscissa(S.A)
        if not S.times:
            raise EmptySample("no samples")
        t, T = S.times[-1], S.samples[-1]
        r = spectral_radius(T)
        return float(np.log(r) / t) if r > 0 else -np.inf
    return spectral_abscissa(S)


def _kron_sum_all(gens):
    dims = [g.shape[0] for g in gens]
    n = int(np.prod(dims))
    out = np.zeros((n, n), dtype=complex)
    for k, g in enumerate(gens):
        ops = [np.eye(d) for d in dims]
        ops[k] = g
        out += kron_all(ops)
    return out


def assemble_certificate(certs, factors, mode="discrete"):
    """Kronecker product of factor certificates.

    ``P = P_1 (x) ... (x) P_m`` has condition number ``prod kappa_k``
    because Kronecker eigenvalues are products.  In discrete mode the
    residual is measured against ``(x) factors``; in continuous mode the
    factors are generators, the tensor generator is their Kronecker sum and
    the rates add.

    Raises
    ------
    DimensionMismatch
        If the lists differ in length or a certificate does not match its factor.
    """
    certs = list(certs)
    factors = [as_operator(F, square=True) for F in factors]
    if len(certs) != len(factors) or not certs:
        raise DimensionMismatch("need one certificate per factor")
    for c, F in zip(certs, factors):
        if c.P.shape != F.shape:
            raise DimensionMismatch(f"certificate of size {c.P.shape} for factor {F.shape}")
    P = kron_all([c.P for c in certs])
    kappa = float(np.prod([c.kappa for c in certs]))
    if mode == "discrete":
        residual = discrete_residual(kron_all(factors), P)
        rate = 0.0
    else:
        rate = float(sum(c.rate for c in certs))
        residual = continuous_residual(_kron_sum_all(factors), P, rate)
    return MetricCertificate(P=P, kappa=kappa, rate=rate, residual=residual)


def _certify_discrete(T, kappa_max, tol):
    """Certificate for one scaled factor, or ``None`` when none fits the budget."""
    if spectral_radius(T) < 1.0:
        try:
            cert = neumann_certificate(T, tol)
            if cert.kappa <= kappa_max:
                return cert
        except BudgetExceeded:
            pass
    res = similarity_constant(T, kappa_max, tol)
    return res.certificate if res.similar else None


def _normalize_product(alpha):
    alpha = np.asarray(alpha, dtype=float)
    return alpha / np.exp(np.mean(np.log(alpha)))


def split_scaling_discrete(factors, kappa_max=KAPPA_MAX, tol=DEFAULT_TOL):
    """Scalings ``alpha_k`` (product one) making every ``alpha_k T_k`` similar to a contraction.

    * ``prod r_k > 1``: spectral obstruction.
    * ``prod r_k < 1`` with all radii positive: ``alpha_k = rho^{1/m} / r_k``
      puts every factor at the common radius ``rho^{1/m} < 1``.
    * ``prod r_k < 1`` with a nilpotent factor: factors of radius below one
      stay unscaled, the others are brought to radius one (or one half if
      that fails), and the nilpotent factors absorb the compensation.
    * ``prod r_k = 1``: ``alpha_k = 1 / r_k``.

    Raises
    ------
    ZeroFactor
        If a factor is the zero matrix.
    """
    factors = [as_operator(F, square=True) for F in factors]
    if not factors:
        raise ValueError("need at least one factor")
    for k, F in enumerate(factors):
        if not np.any(F):
            raise ZeroFactor(f"factor {k + 1} is zero")
    m = len(factors)
    radii = np.array([spectral_radius(F) for F in factors])
    rho = float(np.prod(radii))
    if rho > 1.0 + tol.tol_rel:
        return SplitResult(Verdict.SPECTRAL_OBSTRUCTION, [1.0] * m, [None] * m, None, "discrete",
                           [f"radius product {rho:.6g} > 1"])
    # radius is exact zero only for nilpotent factors; tiny radii come from rounding
    zero = radii <= tol.tol_rel * np.array([max(1.0, np.linalg.norm(F, 2)) for F in factors])
    alpha = np.ones(m)
    certs = [None] * m
    notes = []
    if zero.any():
        for k in np.flatnonzero(~zero):
            if radii[k] >= 1.0:
                alpha[k] = 1.0 / radii[k]
                certs[k] = _certify_discrete(alpha[k] * factors[k], kappa_max, tol)
                if certs[k] is None:
                    alpha[k] = 0.5 / radii[k]
                    notes.append(f"factor {k + 1} rescaled to radius 1/2")
        alpha[zero] = np.prod(alpha[~zero]) ** (-1.0 / zero.sum())
    elif rho < 1.0 - tol.tol_rel:
        alpha = rho ** (1.0 / m) / radii
    else:
        alpha = 1.0 / radii
    alpha = _normalize_product(alpha)
    scaled = [a * F for a, F in zip(alpha, factors)]
    for k in range(m):
        if certs[k] is None or not certificate_is_valid(certs[k], T=scaled[k], tol=tol):
            certs[k] = _certify_discrete(scaled[k], kappa_max, tol)
    if any(c is None for c in certs):
        bad = [k + 1 for k, c in enumerate(certs) if c is None]
        return SplitResult(Verdict.NOT_SIMILAR_WITHIN_BUDGET, list(alpha), certs, None, "discrete",
                           notes + [f"factor(s) {bad} not certified within kappa_max"])
    tensor = assemble_certificate(certs, scaled, "discrete")
    return SplitResult(Verdict.SIMILAR, list(alpha), certs, tensor, "discrete", notes)


def _generator(S):
    if isinstance(S, SemigroupSpec):
        if not S.is_generator:
            raise ValueError("split_scaling_semigroup needs generator-kind semigroups")
        return S.A
    return as_operator(S, square=True)


def split_scaling_semigroup(factors, kappa_max=KAPPA_MAX, tol=DEFAULT_TOL):
    """Shifts ``d_k`` (sum zero) making every ``A_k + d_k I`` generate a contraction semigroup.

    With growth bounds ``w_k`` and ``W = sum w_k``:

    * ``W > 0``: spectral obstruction.
    * ``W < 0``: ``d_k = W/m - w_k`` gives every shifted factor growth bound
      ``W/m < 0``; each is renormed at rate ``W/(2m)`` by :func:`rota_renorm`.
    * ``W = 0``: ``d_k = -w_k`` and each factor is certified by
      :func:`semigroup_constant`.
    """
    gens = [_generator(S) for S in factors]
    if not gens:
        raise ValueError("need at least one factor")
    m = len(gens)
    omegas = np.array([spectral_abscissa(A) for A in gens])
    total = float(omegas.sum())
    if total > tol.tol_rel:
        return SplitResult(Verdict.SPECTRAL_OBSTRUCTION, [0.0] * m, [None] * m, None, "continuous",
                           [f"growth bound sum {total:.6g} > 0"])
    stable = total < -tol.tol_rel
    d = total / m - omegas if stable else -omegas
    d = d - d.mean()
    shifted = [A + dk * np.eye(A.shape[0]) for A, dk in zip(gens, d)]
    certs = []
    for A in shifted:
        cert = None
        if stable:
            try:
                cert = rota_renorm(A, total / (2.0 * m), tol)
                if cert.kappa > kappa_max or not certificate_is_valid(cert, A=A, tol=tol):
                    cert = None
            except ArithmeticError:
                cert = None
        if cert is None:
            res = semigroup_constant(A, kappa_max, tol)
            cert = res.certificate if res.similar else None
        certs.append(cert)
    if any(c is None for c in certs):
        bad = [k + 1 for k, c in enumerate(certs) if c is None]
        return SplitResult(Verdict.NOT_SIMILAR_WITHIN_BUDGET, list(d), certs, None, "continuous",
                           [f"factor(s) {bad} not certified within kappa_max"])
    tensor = assemble_certificate(certs, shifted, "continuous")
    return SplitResult(Verdict.SIMILAR, list(d), certs, tensor, "continuous")


def _compress(P, vec, index, n_keep):
    """``V^* P V`` with ``V = I (x) vec`` (index 1) or ``vec (x) I`` (index 2)."""
    vec = vec.reshape(-1, 1)
    eye = np.eye(n_keep)
    V = np.kron(eye, vec) if index == 1 else np.kron(vec, eye)
    return hermitian_part(adjoint(V) @ P @ V)


def extract_factor_certificate(cert, T1, T2, index, tol=DEFAULT_TOL):
    """Certificate for one factor of ``T1 (x) T2`` from a certificate of the product.

    The form is compressed with ``h (x) I`` (or ``I (x) h``) where ``h`` is a
    unit eigenvector of the other factor for an eigenvalue of modulus one,
    so that ``(T1 (x) T2)(x (x) h) = lambda (T1 x (x) h)`` and the tensor
    inequality restricts to the factor.  If that residual is too large the
    Cesàro averages of compressions along the orbit ``T_other^k h``,
    ``k < N_CESARO``, are tried and the best one is kept.

    Raises
    ------
    NoPeripheralVector
        If the other factor has spectral radius below ``1 - tol_rel``.
    """
    T1 = as_operator(T1, square=True)
    T2 = as_operator(T2, square=True)
    if index not in (1, 2):
        raise ValueError("index must be 1 or 2")
    n1, n2 = T1.shape[0], T2.shape[0]
    P = hermitian_part(np.asarray(cert.P, dtype=complex))
    if P.shape != (n1 * n2, n1 * n2):
        raise DimensionMismatch("certificate does not match T1 (x) T2")
    keep, other = (T1, T2) if index == 1 else (T2, T1)
    r = spectral_radius(other)
    if r < 1.0 - tol.tol_rel:
        raise NoPeripheralVector(f"other factor has spectral radius {r:.6g} < 1")
    lam, vecs = np.linalg.eig(other)
    order = np.argsort(-np.abs(lam))
    resid = lambda Q: discrete_residual(keep, Q)
    best = None
    for j in order:
        if abs(lam[j]) < r * (1.0 - tol.tol_rel):
            break
        h = vecs[:, j] / np.linalg.norm(vecs[:, j])
        cand = make_certificate(_compress(P, h, index, keep.shape[0]), resid)
        if best is None or cand.residual < best.residual:
            best = cand
    slack = tol.tol_psd * max(1.0, best.kappa)
    if best.residual <= slack:
        return best
    h = vecs[:, order[0]] / np.linalg.norm(vecs[:, order[0]])
    acc = np.zeros((keep.shape[0], keep.shape[0]), dtype=complex)
    v = h.copy()
    for k in range(N_CESARO):
        acc += _compress(P, v, index, keep.shape[0])
        cand = make_certificate(acc / (k + 1), resid)
        if cand.residual < best.residual:
            best = cand
        v = other @ v
        nv = np.linalg.norm(v)
        if nv == 0 or not np.isfinite(nv):
            break
    return best


def tensorially_preserves(S, kappa_max=KAPPA_MAX, tol=DEFAULT_TOL):
    """Whether tensoring with ``S`` preserves similarity to contraction semigroups.

    True exactly when ``S`` is similar to a contraction semigroup within
    the budget and its growth bound is zero.
    """
    A = _generator(S)
    if abs(spectral_abscissa(A)) > tol.tol_rel:
        return False
    return semigroup_constant(A, kappa_max, tol).similar
