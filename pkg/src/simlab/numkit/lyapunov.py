"""Continuous Lyapunov equations by Schur-form back substitution."""
import numpy as np
import scipy.linalg as sla

from ..errors import SingularPencil, Unstable
from .core import DEFAULT_TOL, adjoint, as_hermitian, as_operator, hermitian_part


def lyap_solve(B, W, tol=DEFAULT_TOL):
    """Solve ``B^* X + X B = -W`` for Hermitian ``X``.

    The complex Schur form ``B = U R U^*`` turns the equation into
    ``R^* Y + Y R = -U^* W U`` with ``R^*`` lower triangular, which is solved
    one column at a time by forward substitution (Bartels-Stewart).

    Raises
    ------
    Unstable
        If the spectral abscissa of ``B`` is not negative.
    SingularPencil
        If ``conj(l_i) + l_j`` nearly vanishes for some eigenvalue pair,
        i.e. the Sylvester operator is numerically singular.
    """
    B = as_operator(B, square=True)
    W = as_hermitian(W, tol)
    n = B.shape[0]
    if W.shape != B.shape:
        raise ValueError(f"shape mismatch: B {B.shape}, W {W.shape}")
    R, U = sla.schur(B, output="complex")
    lam = np.diag(R)
    if np.max(lam.real) >= 0:
        raise Unstable(f"spectral abscissa {np.max(lam.real):.3e} is not negative")
    sep = np.min(np.abs(np.conj(lam)[:, None] + lam[None, :]))
    if sep <= 1e3 * np.finfo(float).eps * max(1.0, np.max(np.abs(R))):
        raise SingularPencil(f"eigenvalue separation {sep:.3e} is too small")
    C = adjoint(U) @ W @ U
    Rh = adjoint(R)
    Y = np.zeros((n, n), dtype=complex)
    for j in range(n):
        rhs = -C[:, j] - Y[:, :j] @ R[:j, j]
        Y[:, j] = sla.solve_triangular(Rh + R[j, j] * np.eye(n), rhs, lower=True,
                                       check_finite=False)
    return hermitian_part(U @ Y @ adjoint(U))


def lyap_residual(B, X, W):
    """``||B^* X + X B + W||_2`` (absolute)."""
    B = as_operator(B)
    return float(np.linalg.norm(adjoint(B) @ X + X @ B + W, 2))
