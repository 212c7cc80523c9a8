"""Matrix exponential (scaling and squaring with Pade approximants, via SciPy)."""
import scipy.linalg as sla

from ..errors import NegativeTime
from .core import as_operator


def matexp(A, t=1.0):
    """Return ``exp(t A)`` for a square ``A`` and ``t >= 0``.

    Raises
    ------
    NegativeTime
        If ``t < 0``.
    """
    A = as_operator(A, square=True)
    if t < 0:
        raise NegativeTime(f"matexp requires t >= 0, got {t}")
    return sla.expm(A * t)
