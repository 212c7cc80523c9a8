"""Dense complex linear algebra with explicit tolerances.

Everything here works on plain ``numpy.ndarray`` objects of complex dtype.
Real input is embedded into complex arithmetic on entry.
"""
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from ..errors import NonFinite, NotHermitian, NotPositive, NotSquare


@dataclass(frozen=True)
class TolerancePolicy:
    """Tolerances shared by every numerical routine.

    ``tol_herm`` bounds the asymmetry accepted for Hermitian input,
    ``tol_psd`` the negative eigenvalue slack accepted in positivity tests,
    ``tol_rel`` the relative accuracy of norms, bisections and identities.
    """

    tol_herm: float = 1e-10
    tol_psd: float = 1e-9
    tol_rel: float = 1e-8
    max_iter: int = 500

    def __post_init__(self):
        for name in ("tol_herm", "tol_psd", "tol_rel"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be an integer >= 1, got {self.max_iter!r}")

    def with_overrides(self, **changes):
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


DEFAULT_TOL = TolerancePolicy()


def as_operator(T, square=False):
    """Validate ``T`` and return it as a 2-D complex array (copied)."""
    A = np.array(T, dtype=complex, copy=True)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise ValueError(f"an operator must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite("operator contains NaN or Inf entries")
    if square and A.shape[0] != A.shape[1]:
        raise NotSquare(f"expected a square operator, got shape {A.shape}")
    return A


def is_real(T):
    return not np.any(np.imag(T))


def adjoint(T):
    return np.conj(T).T


def hermitian_part(H):
    return 0.5 * (H + adjoint(H))


def as_hermitian(H, tol=DEFAULT_TOL):
    H = as_operator(H, square=True)
    scale = max(1.0, np.max(np.abs(H)))
    if np.max(np.abs(H - adjoint(H))) > tol.tol_herm * scale:
        raise NotHermitian("matrix is not Hermitian within tol_herm")
    return hermitian_part(H)


def op_norm(T):
    """Largest singular value of ``T``."""
    T = as_operator(T)
    return float(np.linalg.norm(T, 2))


def eigenvalues(T):
    T = as_operator(T, square=True)
    return sla.eigvals(T, check_finite=False)


def spectral_radius(T):
    return float(np.max(np.abs(eigenvalues(T))))


def spectral_abscissa(A):
    """max Re of the spectrum; the growth bound of ``t -> exp(tA)``."""
    return float(np.max(eigenvalues(A).real))


def numerical_abscissa(A):
    """Largest eigenvalue of the Hermitian part; the rate of the identity metric."""
    A = as_operator(A, square=True)
    return float(sla.eigvalsh(hermitian_part(A), check_finite=False)[-1])


def kron(A, B):
    """Kronecker product; block ``(i, j)`` of the result is ``A[i, j] * B``."""
    return np.kron(as_operator(A), as_operator(B))


def kron_all(ops):
    ops = list(ops)
    if not ops:
        raise ValueError("need at least one operator")
    out = as_operator(ops[0])
    for op in ops[1:]:
        out = np.kron(out, as_operator(op))
    return out


def kron_sum(A, B):
    """Generator of ``exp(tA) (x) exp(tB)``: ``A (x) I + I (x) B``."""
    A = as_operator(A, square=True)
    B = as_operator(B, square=True)
    return np.kron(A, np.eye(B.shape[0])) + np.kron(np.eye(A.shape[0]), B)


def min_eig(H, tol=DEFAULT_TOL):
    H = as_hermitian(H, tol)
    return float(sla.eigvalsh(H, check_finite=False)[0])


def max_eig(H, tol=DEFAULT_TOL):
    H = as_hermitian(H, tol)
    return float(sla.eigvalsh(H, check_finite=False)[-1])


def cond_pd(P, tol=DEFAULT_TOL):
    """Spectral condition number ``lambda_max / lambda_min`` of a positive definite form."""
    P = as_hermitian(P, tol)
    w = sla.eigvalsh(P, check_finite=False)
    if w[0] <= tol.tol_psd:
        raise NotPositive(f"form is not positive definite (min eigenvalue {w[0]:.3e})")
    return float(w[-1] / w[0])


def normalize_form(P, tol=DEFAULT_TOL):
    """Scale a positive definite form so that its smallest eigenvalue is 1."""
    P = as_hermitian(P, tol)
    w = sla.eigvalsh(P, check_finite=False)
    if w[0] <= 0:
        raise NotPositive(f"form is not positive definite (min eigenvalue {w[0]:.3e})")
    return P / w[0]


def matrix_powers(T, n):
    """``[T^0, T^1, ..., T^n]`` by repeated multiplication."""
    T = as_operator(T, square=True)
    out = [np.eye(T.shape[0], dtype=complex)]
    for _ in range(n):
        out.append(out[-1] @ T)
    return out
