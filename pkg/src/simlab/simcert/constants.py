"""Similarity constants, renormings and lower bounds."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ..errors import (BudgetExceeded, NotPositive, RadiusBelowOne, RadiusNotLessThanOne,
                      RateBelowAbscissa, ZeroPolynomial)
from ..numkit.core import (DEFAULT_TOL, adjoint, as_operator, hermitian_part,
                           numerical_abscissa, op_norm, spectral_abscissa, spectral_radius)
from ..numkit.expm import matexp
from ..numkit.lyapunov import lyap_solve
from .lmi import CertificateProblem, minimize_kappa, solve_feasibility
from .types import (INFINITY, ConstantResult, MetricCertificate, Verdict,
                    continuous_residual, discrete_residual, make_certificate)

KAPPA_MAX = 1e8


def _identity_certificate(n, residual, rate=0.0):
    return MetricCertificate(P=np.eye(n, dtype=complex), kappa=1.0, rate=rate, residual=residual)


def neumann_certificate(T, tol=DEFAULT_TOL):
    """Certificate ``P = sum_n (T^*)^n T^n`` for a matrix with spectral radius below one.

    The series is summed by doubling, ``S_2N = S_N + (T^N)^* S_N T^N``, until
    ``||T^N||^2 <= tol_psd``.  The truncated sum satisfies
    ``S_N - T^* S_N T = I - (T^N)^* T^N`` exactly, so it certifies
    contractivity as soon as ``||T^N|| <= 1``.

    Raises
    ------
    RadiusNotLessThanOne
        If ``spectral_radius(T) >= 1``.
    """
    T = as_operator(T, square=True)
    r = spectral_radius(T)
    if r >= 1.0:
        raise RadiusNotLessThanOne(f"spectral radius {r:.6g} is not below 1")
    n = T.shape[0]
    S = np.eye(n, dtype=complex)
    M = T.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(200):
            if not (np.all(np.isfinite(M)) and np.all(np.isfinite(S))):
                raise BudgetExceeded("Neumann series overflowed before converging")
            if op_norm(M) ** 2 <= tol.tol_psd:
                break
            S = S + adjoint(M) @ S @ M
            S = hermitian_part(S)
            M = M @ M
        else:
            raise BudgetExceeded("Neumann series did not converge in 200 doublings")
    try:
        cert = make_certificate(S, lambda P: discrete_residual(T, P))
    except NotPositive:
        raise BudgetExceeded("Neumann sum lost positivity to rounding") from None
    if cert.residual > tol.tol_psd * cert.kappa:
        raise BudgetExceeded("Neumann sum lost the contraction property to rounding")
    return cert


def power_lower_bound(T, N):
    """``max_{1 <= n <= N} ||T^n||``, a lower bound for the similarity constant."""
    if N < 1:
        raise ValueError("N must be at least 1")
    T = as_operator(T, square=True)
    best = 0.0
    M = np.eye(T.shape[0], dtype=complex)
    for _ in range(int(N)):
        M = M @ T
        best = max(best, op_norm(M))
    return best


def _power_bracket(T, stop_at):
    """Lower bound for ``C(T)`` from ``||T^n||``, ``n <= 64``, plus dyadic powers up to ``2^32``.

    Repeated squaring amplifies rounding in the peripheral eigenvalues
    roughly like ``(1 + eps)^(2^k)``, so the dyadic sweep stops at ``2^32``
    where that factor is still ``1 + O(1e-6)``.  Stops early once the bound
    exceeds ``stop_at``.
    """
    best = max(1.0, power_lower_bound(T, 64))
    M = np.linalg.matrix_power(T, 64)
    for _ in range(6, 32):
        if best > stop_at:
            break
        M = M @ M
        nm = op_norm(M) if np.all(np.isfinite(M)) else INFINITY
        best = max(best, nm)
        if nm < 1e-200 or nm > 1e200:
            break
    return best


def _semigroup_bracket(A, stop_at):
    """Lower bound ``sup_t ||exp(tA)||`` sampled on a dyadic time grid."""
    scale = max(op_norm(A), 1e-12)
    E = matexp(A, 1.0 / (64.0 * scale))
    best = 1.0
    for _ in range(70):
        nm = op_norm(E) if np.all(np.isfinite(E)) else INFINITY
        best = max(best, nm)
        if best > stop_at or nm < 1e-200 or nm > 1e200:
            break
        E = E @ E
    return best


def contraction_feasible(T, kappa, tol=DEFAULT_TOL):
    """Search for ``P`` with ``I <= P <= kappa I`` and ``T^* P T <= P``.

    Returns the form, or ``None`` when the barrier duality bound shows
    that no such form exists within ``tol_psd``.

    Raises
    ------
    BudgetExceeded
        If ``tol.max_iter`` Newton steps pass without a decision.
    """
    T = as_operator(T, square=True)
    if kappa < 1:
        raise ValueError("kappa must be at least 1")
    n = T.shape[0]
    if op_norm(T) <= 1.0:
        return np.eye(n, dtype=complex)
    out = solve_feasibility(CertificateProblem(T, "discrete"), float(kappa), tol)
    return out.P if out.feasible else None


def _relaxation(distance, tol):
    """Slack for the dynamic block when the spectrum (nearly) touches the stability boundary."""
    return 0.25 * tol.tol_psd if distance < 1e-3 else 0.0


def _optimize(problem, kappa_lo, kappa_hi, residual_fn, tol, start=None):
    """Shared kappa minimization for matrices and generators.

    Returns ``(certificate, lower, upper)`` or ``None`` if ``kappa_hi`` is
    infeasible.
    """
    phase1 = solve_feasibility(problem, kappa_hi, tol)
    if not phase1.feasible:
        return None
    if phase1.margin <= 0.0:
        # boundary-feasible only: the budget itself is the best we can claim
        cert = make_certificate(phase1.P, residual_fn)
        return cert, kappa_lo, max(cert.kappa, kappa_lo)
    out = minimize_kappa(problem, phase1.state, kappa_hi, tol)
    cert = make_certificate(out.P, residual_fn)
    lower = max(kappa_lo, min(out.lower, cert.kappa))
    return cert, lower, max(cert.kappa, lower)


def similarity_constant(T, kappa_max=KAPPA_MAX, tol=DEFAULT_TOL):
    """Smallest ``||R|| ||R^{-1}||`` making ``R T R^{-1}`` a contraction.

    The constant is ``sqrt(kappa*)`` where ``kappa*`` is the least condition
    number of a form ``P`` with ``T^* P T <= P``.  The bracket starts from
    ``max_n ||T^n||`` below and the Neumann certificate (or ``kappa_max``)
    above; the barrier path of ``min kappa`` closes it to relative width
    ``tol_rel``.

    Returns
    -------
    ConstantResult
        ``constant`` is ``sqrt(cond(P))`` for the returned certificate;
        ``lower_bound`` and ``upper_bound`` bracket the exact constant.
    """
    T = as_operator(T, square=True)
    n = T.shape[0]
    r = spectral_radius(T)
    if r > 1.0 + tol.tol_rel:
        return ConstantResult(Verdict.SPECTRAL_OBSTRUCTION, INFINITY, None, INFINITY, INFINITY,
                              note=f"spectral radius {r:.6g} > 1")
    nrm = op_norm(T)
    if nrm ** 2 <= 1.0 + tol.tol_psd:
        cert = _identity_certificate(n, discrete_residual(T, np.eye(n)))
        return ConstantResult(Verdict.SIMILAR, 1.0, cert, 1.0, 1.0)
    c_lo = _power_bracket(T, np.sqrt(kappa_max))
    if c_lo ** 2 > kappa_max:
        return ConstantResult(Verdict.NOT_SIMILAR_WITHIN_BUDGET, INFINITY, None, c_lo, INFINITY,
                              note="power growth exceeds the budget")
    kappa_hi = kappa_max
    fallback = None
    if r < 1.0 - 1e-6:
        try:
            fallback = neumann_certificate(T, tol)
            kappa_hi = min(kappa_max, fallback.kappa * (1.0 + 1e-6))
        except BudgetExceeded:
            pass
    kappa_hi = max(kappa_hi, c_lo ** 2)
    problem = CertificateProblem(T, "discrete", relax=_relaxation(1.0 - r, tol))
    res = _optimize(problem, c_lo ** 2, kappa_hi, lambda P: discrete_residual(T, P), tol)
    if res is None:
        return ConstantResult(Verdict.NOT_SIMILAR_WITHIN_BUDGET, INFINITY, None, c_lo, INFINITY,
                              note=f"infeasible at kappa_max = {kappa_max:g}")
    cert, lo, hi = res
    if fallback is not None and fallback.kappa < cert.kappa:
        cert, hi = fallback, fallback.kappa
    return ConstantResult(Verdict.SIMILAR, float(np.sqrt(cert.kappa)), cert,
                          float(np.sqrt(lo)), float(np.sqrt(hi)))


def semigroup_constant(A, kappa_max=KAPPA_MAX, tol=DEFAULT_TOL):
    """``sup``-similarity constant of ``t -> exp(tA)``.

    Same scheme as :func:`similarity_constant` with the dissipativity
    inequality ``A^* P + P A <= 0`` and the Lyapunov solution of
    ``A^* X + X A = -I`` as the upper bracket when ``A`` is stable.
    """
    A = as_operator(A, square=True)
    n = A.shape[0]
    alpha = spectral_abscissa(A)
    if alpha > tol.tol_rel:
        return ConstantResult(Verdict.SPECTRAL_OBSTRUCTION, INFINITY, None, INFINITY, INFINITY,
                              note=f"spectral abscissa {alpha:.6g} > 0")
    if numerical_abscissa(A) <= 0.0:
        cert = _identity_certificate(n, continuous_residual(A, np.eye(n)))
        return ConstantResult(Verdict.SIMILAR, 1.0, cert, 1.0, 1.0)
    c_lo = _semigroup_bracket(A, np.sqrt(kappa_max))
    if c_lo ** 2 > kappa_max:
        return ConstantResult(Verdict.NOT_SIMILAR_WITHIN_BUDGET, INFINITY, None, c_lo, INFINITY,
                              note="semigroup growth exceeds the budget")
    kappa_hi = kappa_max
    fallback = None
    if alpha < 0.0:
        try:
            fallback = make_certificate(lyap_solve(A, np.eye(n), tol),
                                        lambda P: continuous_residual(A, P))
            kappa_hi = min(kappa_max, fallback.kappa * (1.0 + 1e-6))
        except ArithmeticError:
            fallback = None
    kappa_hi = max(kappa_hi, c_lo ** 2)
    problem = CertificateProblem(A, "continuous",
                                 relax=_relaxation(-alpha / max(op_norm(A), 1e-300), tol))
    res = _optimize(problem, c_lo ** 2, kappa_hi, lambda P: continuous_residual(A, P), tol)
    if res is None:
        return ConstantResult(Verdict.NOT_SIMILAR_WITHIN_BUDGET, INFINITY, None, c_lo, INFINITY,
                              note=f"infeasible at kappa_max = {kappa_max:g}")
    cert, lo, hi = res
    if fallback is not None and fallback.kappa < cert.kappa:
        cert, hi = fallback, fallback.kappa
    return ConstantResult(Verdict.SIMILAR, float(np.sqrt(cert.kappa)), cert,
                          float(np.sqrt(lo)), float(np.sqrt(hi)))


def rota_renorm(A, a, tol=DEFAULT_TOL):
    """Equivalent form in which ``exp(tA)`` has norm at most ``exp(at)``.

    For ``a < 0`` the form is the integral norm
    ``Q = P0 - 2a X`` with ``(A - aI)^* X + X (A - aI) = -P0``, where ``P0``
    is ``I`` when ``A`` is dissipative and otherwise the normalized solution
    of ``A^* P0 + P0 A = -I``.  Then
    ``(A - aI)^* Q + Q (A - aI) = A^* P0 + P0 A <= 0``.
    For ``a >= 0`` the identity is returned when it already works, and the
    Lyapunov form of ``A - aI`` otherwise.

    Raises
    ------
    RateBelowAbscissa
        If ``a`` does not exceed the spectral abscissa of ``A``.
    """
    A = as_operator(A, square=True)
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)
    alpha = spectral_abscissa(A)
    if a <= alpha:
        raise RateBelowAbscissa(f"rate {a:.6g} does not exceed the spectral abscissa {alpha:.6g}")
    resid = lambda P: continuous_residual(A, P, a)
    dissipative = numerical_abscissa(A) <= 0.0
    if a >= 0.0:
        if numerical_abscissa(A) <= a:
            return MetricCertificate(P=eye, kappa=1.0, rate=float(a), residual=resid(eye))
        return make_certificate(lyap_solve(A - a * eye, eye, tol), resid, rate=a)
    P0 = eye if dissipative else make_certificate(lyap_solve(A, eye, tol), lambda P: 0.0).P
    X = lyap_solve(A - a * eye, P0, tol)
    Q = hermitian_part(P0 - 2.0 * a * X)
    w = np.linalg.eigvalsh(Q)
    return MetricCertificate(P=Q, kappa=float(w[-1] / w[0]), rate=float(a), residual=resid(Q))


def _rate_feasible(A, a, kappa_budget, tol):
    n = A.shape[0]
    eye = np.eye(n, dtype=complex)
    if numerical_abscissa(A) <= a:
        return True
    if a <= spectral_abscissa(A):
        return False
    try:
        X = lyap_solve(A - a * eye, eye, tol)
        w = np.linalg.eigvalsh(hermitian_part(X))
        if w[0] > 0 and w[-1] / w[0] <= kappa_budget:
            return True
    except ArithmeticError:
        pass
    try:
        out = solve_feasibility(CertificateProblem(A, "continuous", rate=a), kappa_budget, tol)
    except BudgetExceeded:
        # undecided counts as infeasible so the returned rate stays certified
        return False
    return out.feasible


def quasi_rate(A, kappa_budget, tol=DEFAULT_TOL):
    """Smallest rate ``a`` admitting ``A^* P + P A <= 2a P`` with ``cond(P) <= kappa_budget``.

    Bisection between the spectral abscissa (never attained unless ``A``
    is normal) and the numerical abscissa (attained by ``P = I``) to
    absolute width ``tol_rel``.  The returned rate is always feasible.
    """
    A = as_operator(A, square=True)
    if kappa_budget < 1:
        raise ValueError("kappa_budget must be at least 1")
    lo = spectral_abscissa(A)
    hi = numerical_abscissa(A)
    while hi - lo > tol.tol_rel:
        mid = 0.5 * (lo + hi)
        if _rate_feasible(A, mid, kappa_budget, tol):
            hi = mid
        else:
            lo = mid
    return float(hi)


def _polyval(coeffs, X):
    """Horner evaluation of ``sum_k coeffs[k] X^k`` for a square matrix ``X``."""
    out = np.zeros_like(X)
    eye = np.eye(X.shape[0], dtype=complex)
    for c in reversed(coeffs):
        out = out @ X + c * eye
    return out


def poly_lower_bound(T, coeffs, boundary_samples=256):
    """``max_p ||p(T)|| / max_{|z| = 1} |p(z)|`` over the supplied polynomials.

    Coefficients are in ascending order (``coeffs[k]`` multiplies ``z^k``).
    The circle maximum is taken over ``boundary_samples`` equally spaced
    points, which underestimates the true maximum by a relative amount of
    order ``(deg p / boundary_samples)^2``; the ratio is therefore a lower
    bound for the similarity constant up to that sampling error.

    Raises
    ------
    ZeroPolynomial
        If some polynomial has only zero coefficients.
    """
    if boundary_samples < 16:
        raise ValueError("boundary_samples must be at least 16")
    T = as_operator(T, square=True)
    z = np.exp(2j * np.pi * np.arange(boundary_samples) / boundary_samples)
    best = 0.0
    for p in coeffs:
        p = np.atleast_1d(np.asarray(p, dtype=complex))
        if not np.any(p):
            raise ZeroPolynomial("polynomial has no nonzero coefficient")
        circle = np.max(np.abs(np.polyval(p[::-1], z)))
        best = max(best, op_norm(_polyval(p, T)) / circle)
    return float(best)


def peripheral_vector(T, n0=1, tol=DEFAULT_TOL):
    """Unit eigenvector for an eigenvalue of maximal modulus.

    In finite dimensions such a vector satisfies ``||T^n x|| = r(T)^n``,
    which is at least ``1/2`` for every ``n <= n0`` when ``r(T) >= 1``.

    Raises
    ------
    RadiusBelowOne
        If ``spectral_radius(T) < 1 - tol_rel``.
    """
    T = as_operator(T, square=True)
    n = T.shape[0]
    lam = sla.eigvals(T, check_finite=False)
    r = float(np.max(np.abs(lam)))
    if r < 1.0 - tol.tol_rel:
        raise RadiusBelowOne(f"spectral radius {r:.6g} is below 1")
    top = lam[np.argmax(np.abs(lam))]
    # the null vector of T - top I via SVD is robust for defective eigenvalues
    _, _, vh = np.linalg.svd(T - top * np.eye(n))
    x = vh[-1].conj()
    k = int(np.argmax(np.abs(x)))
    x = x * (abs(x[k]) / x[k])
    x = x / np.linalg.norm(x)
    M = x.copy()
    for _ in range(int(n0)):
        M = T @ M
        if np.linalg.norm(M) < 0.5:
            raise RadiusBelowOne("no vector keeps its orbit above 1/2")
    return x


@dataclass
class CrSimProfile:
    times: list
    results: list
    semigroup: ConstantResult
    verdict: str
    violations: list


def crsim_profile(A, t_grid, kappa_max=KAPPA_MAX, tol=DEFAULT_TOL, mono_tol=1e-6):
    """Similarity constants of ``exp(tA)`` over a time grid, checked against ``C(exp(.A))``.

    The verdict is ``"Consistent"`` when every sampled constant is at most
    the semigroup constant (up to ``mono_tol`` plus the bracket widths) and
    ``C(exp(2tA)) <= C(exp(tA)) + mono_tol`` for every pair ``t, 2t`` on the
    grid.  Budget failures must agree: a finite semigroup constant forbids
    a budget failure at any sample, and an infinite one forbids none.
    """
    A = as_operator(A, square=True)
    times = [float(t) for t in t_grid]
    if not times:
        raise ValueError("t_grid must be nonempty")
    if any(t <= 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("t_grid must be positive and increasing")
    results = [similarity_constant(matexp(A, t), kappa_max, tol) for t in times]
    semi = semigroup_constant(A, kappa_max, tol)
    violations = []
    for t, res in zip(times, results):
        if semi.similar:
            if not res.similar:
                violations.append((t, "sample not similar within budget"))
            elif res.lower_bound > semi.upper_bound + mono_tol:
                violations.append((t, "sample constant exceeds semigroup constant"))
    index = {t: i for i, t in enumerate(times)}
    for t, res in zip(times, results):
        j = index.get(2.0 * t)
        if j is None:
            continue
        nxt = results[j]
        if res.similar and nxt.similar and nxt.lower_bound > res.upper_bound + mono_tol:
            violations.append((2.0 * t, "dyadic monotonicity fails"))
        if not res.similar and nxt.similar and res.verdict is Verdict.SPECTRAL_OBSTRUCTION:
            violations.append((2.0 * t, "obstruction disappears at a later time"))
    verdict = "Consistent" if not violations else "Inconsistent"
    return CrSimProfile(times, results, semi, verdict, violations)
