"""Result and input types for the certificate layer."""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import DimensionMismatch, EmptySample, NotPositive, NotSquare
from ..numkit.core import DEFAULT_TOL, adjoint, as_operator, hermitian_part
from ..numkit.expm import matexp


class Verdict(str, Enum):
    SIMILAR = "Similar"
    NOT_SIMILAR_WITHIN_BUDGET = "NotSimilarWithinBudget"
    SPECTRAL_OBSTRUCTION = "SpectralObstruction"

    def __str__(self):
        return self.value


INFINITY = float("inf")


@dataclass(frozen=True)
class MetricCertificate:
    """A positive definite form ``P`` in whose norm an operator is contractive.

    Attributes
    ----------
    P : ndarray
        Hermitian form normalized to ``lambda_min(P) = 1``.
    kappa : float
        Condition number of ``P``.
    rate : float
        Quasi-contraction exponent ``a``; zero for plain contraction.
    residual : float
        Largest eigenvalue of the defect block, ``T^* P T - P`` for a
        matrix or ``(A - aI)^* P + P (A - aI)`` for a generator.  A valid
        certificate has ``residual <= tol_psd * kappa``.
    """

    P: np.ndarray
    kappa: float
    rate: float = 0.0
    residual: float = 0.0

    @property
    def dim(self):
        return self.P.shape[0]


def discrete_residual(T, P):
    """``lambda_max(T^* P T - P)``; nonpositive iff ``T`` contracts the ``P``-norm."""
    D = hermitian_part(adjoint(T) @ P @ T - P)
    return float(np.linalg.eigvalsh(D)[-1])


def continuous_residual(A, P, rate=0.0):
    """``lambda_max((A - aI)^* P + P (A - aI))``; nonpositive iff the rate-``a`` bound holds."""
    B = A - rate * np.eye(A.shape[0])
    D = hermitian_part(adjoint(B) @ P + P @ B)
    return float(np.linalg.eigvalsh(D)[-1])


def make_certificate(P, residual_fn, rate=0.0):
    """Normalize ``P`` to unit smallest eigenvalue and record kappa and residual."""
    P = hermitian_part(np.asarray(P, dtype=complex))
    w = np.linalg.eigvalsh(P)
    if not w[0] > 0:
        raise NotPositive(f"certificate form is not positive definite (min eigenvalue {w[0]:.3e})")
    P = P / w[0]
    return MetricCertificate(P=P, kappa=float(w[-1] / w[0]), rate=float(rate),
                             residual=residual_fn(P))


def certificate_is_valid(cert, T=None, A=None, tol=DEFAULT_TOL):
    """Independently recheck a certificate against a matrix ``T`` or generator ``A``."""
    P = hermitian_part(cert.P)
    w = np.linalg.eigvalsh(P)
    if w[0] < 1.0 - tol.tol_psd or w[-1] > cert.kappa * (1.0 + tol.tol_rel) + tol.tol_psd:
        return False
    slack = tol.tol_psd * max(1.0, cert.kappa)
    if T is not None:
        return discrete_residual(as_operator(T, square=True), P) <= slack
    if A is not None:
        return continuous_residual(as_operator(A, square=True), P, cert.rate) <= slack
    raise ValueError("pass either T or A")


@dataclass
class ConstantResult:
    """Outcome of a similarity-constant computation.

    ``constant`` is the certified upper end of the bisection bracket
    (``INFINITY`` unless the verdict is Similar).
    """

    verdict: Verdict
    constant: float
    certificate: MetricCertificate = None
    lower_bound: float = 1.0
    upper_bound: float = INFINITY
    note: str = ""

    @property
    def similar(self):
        return self.verdict is Verdict.SIMILAR


@dataclass(frozen=True)
class SemigroupSpec:
    """A matrix semigroup given by a generator or by samples on a time grid.

    Build with :meth:`generator` or :meth:`sampled`.
    """

    kind: str
    dim: int
    A: np.ndarray = None
    times: tuple = field(default=())
    samples: tuple = field(default=())

    @classmethod
    def generator(cls, A):
        A = as_operator(A, square=True)
        return cls(kind="generator", dim=A.shape[0], A=A)

    @classmethod
    def sampled(cls, times, samples):
        times = tuple(float(t) for t in times)
        if not times:
            raise EmptySample("a sampled semigroup needs at least one time")
        if len(samples) != len(times):
            raise DimensionMismatch("times and samples differ in length")
        if any(t <= 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be positive and increasing")
        ops = tuple(as_operator(S, square=True) for S in samples)
        n = ops[0].shape[0]
        if any(S.shape[0] != n for S in ops):
            raise NotSquare("all samples must share one square shape")
        return cls(kind="sampled", dim=n, times=times, samples=ops)

    @property
    def is_generator(self):
        return self.kind == "generator"

    def at(self, t):
        """``T(t)``; generator kind only, or a stored sample time."""
        if self.is_generator:
            return matexp(self.A, t)
        for s, S in zip(self.times, self.samples):
            if s == t:
                return S
        raise ValueError(f"time {t} is not on the sample grid")
