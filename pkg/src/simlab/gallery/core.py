"""Finite truncations of classical (counter)examples.

Every model is addressed by name through :data:`REGISTRY`.  A model is
described by a :class:`ModelSpec` (name plus parameters), turned into a
:class:`ModelInstance` by :func:`build_model` and evaluated with
:func:`sample`.

Discrete models (``foguel``, ``eckstein``) are single operators; their
sample at integer ``t`` is the ``t``-th power.  The remaining models are
semigroups.  Grid-based semigroups accept only times that land on their
grid.

Layout conventions: ``L^2`` functions on an interval are stored as cell
averages on a uniform grid, coordinate ``j`` holding cell ``(j h, (j + 1) h]``.
The right shift by one cell is the matrix ``S`` with ``S e_j = e_{j + 1}``.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType

import numpy as np

from ..errors import BadParams, NegativeTime, NotGridAligned, OneInSpectrum
from ..numkit.core import DEFAULT_TOL, as_operator, op_norm
from ..numkit.expm import matexp

MODEL_NAMES = ("foguel", "benchimol", "packel_vj", "riemann_liouville", "nilshift",
               "lemerdy", "chernoff_sum", "eckstein", "counter_nilpotent")


@dataclass(frozen=True)
class ModelSpec:
    """A model name and its parameters (missing parameters take the registry defaults)."""

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))


@dataclass(frozen=True)
class ModelInstance:
    """A built model.

    Attributes
    ----------
    spec : ModelSpec
        The model spec with all defaults filled in.
    dim : int
        Dimension of the state space.
    has_generator : bool
        Whether :attr:`generator` holds a bounded generator matrix.
    discrete : bool
        True for single-operator models sampled at integer times.
    """

    spec: ModelSpec
    dim: int
    has_generator: bool
    discrete: bool = False
    generator: np.ndarray = None
    _sampler: object = field(default=None, repr=False, compare=False)

    @property
    def name(self):
        return self.spec.name

    @property
    def operator(self):
        """``sample(1)``: the operator of a discrete model, the time-one map otherwise."""
        return sample(self, 1)


# ----------------------------------------------------------------------------
# building blocks


def shift(n, k=1):
    """Right shift by ``k`` cells on ``n`` cells (truncated, so nilpotent)."""
    return np.eye(n, k=-k) if k < n else np.zeros((n, n))


def delta_cells(n_cells, q):
    """Indicator of the cells of ``[0, n_cells / q]`` inside the bands ``[3^n - 1, 3^n]``, ``n >= 1``."""
    mask = np.zeros(n_cells, dtype=bool)
    n = 1
    while 3 ** n * q <= n_cells:
        lo = (3 ** n - 1) * q
        mask[lo:3 ** n * q] = True
        n += 1
    return mask


def foguel_matrix(N):
    """``[[S^*, Q], [0, S]]`` with ``Q`` the coordinate projection onto ``{3, 9, 27, ...}`` (1-based)."""
    S = shift(N)
    Q = np.zeros((N, N))
    n = 1
    while 3 ** n <= N:
        Q[3 ** n - 1, 3 ** n - 1] = 1.0
        n += 1
    return np.block([[S.T, Q], [np.zeros((N, N)), S]])


def lowest_band(J, t):
    """Index ``n0(t)`` of the lowest reflection band; ``None`` stands for minus infinity.

    ``t`` must be positive.  ``J`` is one of ``"Z"``, ``"Z+"``, ``"Z-"``.
    """
    t = Fraction(t)
    n = 0
    # find n with 3^n < t <= 3^(n+1)
    while Fraction(3) ** (n + 1) < t:
        n += 1
    while Fraction(3) ** n >= t:
        n -= 1
    if J == "Z":
        return n
    if J == "Z+":
        return n if n >= 0 else None
    return n if n <= 0 else 0


def _reflection(n_cells, q, J, t):
    """Cell matrix of the piecewise reflection ``f(2 * 3^n - x - t)`` at grid time ``t``."""
    V = np.zeros((n_cells, n_cells))
    if t == 0:
        return V
    k = int(t * q)
    n0 = lowest_band(J, t)
    bands = []
    if n0 is not None:
        width = int((2 * Fraction(3) ** n0 - t) * q)
        if width > 0:
            bands.append((0, width))
    n = (n0 + 1) if n0 is not None else 0
    top = 0 if J == "Z-" else None
    while (top is None or n <= top) and Fraction(3) ** n * q <= n_cells:
        end = Fraction(3) ** n * q
        bands.append((int(end) - k, int(end)))
        n += 1
    for lo, hi in bands:
        # cell i of (lo, hi] maps to cell lo + hi - 1 - i
        for i in range(lo, hi):
            V[i, lo + hi - 1 - i] = 1.0
    return V


def lemerdy_basis(N, gamma=0.5):
    """Default finite basis ``b_k = e_k + gamma * sum_{j<k} (-1)^j e_j / (k - j)`` (1-based).

    A placeholder for a conditional basis: its basis constant grows with
    ``N`` but it is only meant for trend checks.
    """
    B = np.eye(N)
    for k in range(1, N + 1):
        for j in range(1, k):
            B[j - 1, k - 1] = gamma * (-1) ** j / (k - j)
    return B


def rl_matrix(M, t):
    """Product-midpoint discretization of the fractional integral of order ``t`` on ``[0, 1]``.

    Row ``i`` evaluates at the midpoint ``x_i`` and integrates the kernel
    ``(x_i - y)^(t - 1) / Gamma(t)`` exactly over each cell.
    """
    if t == 0:
        return np.eye(M)
    h = 1.0 / M
    x = (np.arange(M) + 0.5) * h
    a = np.arange(M) * h
    X = x[:, None]
    upper = np.clip(X - a[None, :], 0.0, None)
    lower = np.clip(X - (a[None, :] + h), 0.0, None)
    return (upper ** t - lower ** t) / math.gamma(t + 1.0)


# ----------------------------------------------------------------------------
# parameter checks


def _pos_int(params, key):
    v = params[key]
    if isinstance(v, bool) or int(v) != v or v < 1:
        raise BadParams(key, f"must be a positive integer, got {v!r}")
    return int(v)


def _real(params, key, positive=False):
    v = params[key]
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise BadParams(key, f"must be a real number, got {v!r}") from None
    if not np.isfinite(v) or (positive and v <= 0):
        raise BadParams(key, f"must be a {'positive ' if positive else ''}finite number, got {v!r}")
    return v


def _matrix(params, key):
    try:
        return as_operator(params[key], square=True)
    except Exception as exc:
        raise BadParams(key, str(exc)) from None


def _grid_steps(t, density, what):
    """``t * density`` as an integer, or NotGridAligned."""
    if isinstance(t, Fraction):
        k = t * density
        if k.denominator == 1:
            return int(k)
    else:
        x = float(t) * density
        k = round(x)
        if abs(x - k) <= 1e-9 * max(1.0, abs(x)):
            return int(k)
    raise NotGridAligned(f"t = {t} is not a multiple of 1/{density} ({what})")


def _discrete(T):
    def sampler(t):
        n = _grid_steps(t, 1, "discrete model")
        return np.linalg.matrix_power(T, n)
    return sampler


# ----------------------------------------------------------------------------
# models


def _build_foguel(p):
    N = _pos_int(p, "N")
    T = foguel_matrix(N)
    return 2 * N, None, _discrete(T), True


def _build_eckstein(p):
    N, M = _pos_int(p, "N"), _pos_int(p, "M")
    S = shift(M)
    T = np.kron(np.kron(foguel_matrix(N), S), S.T)
    return 2 * N * M * M, None, _discrete(T), True


def _build_benchimol(p):
    K, q = _pos_int(p, "K"), _pos_int(p, "q")
    eps = _real(p, "eps", positive=True)
    n = q * 3 ** K
    D = q * (shift(n) - np.eye(n))
    P = np.diag(delta_cells(n, q).astype(float))
    A = np.block([[D.T, eps * P], [np.zeros((n, n)), D]])
    return 2 * n, A, (lambda t: matexp(A, float(t))), False


def _build_packel(p):
    K, q = _pos_int(p, "K"), _pos_int(p, "q")
    J = p["J"]
    if J not in ("Z", "Z+", "Z-"):
        raise BadParams("J", f"must be one of Z, Z+, Z-, got {J!r}")
    if J != "Z+" and 3 ** round(math.log(q, 3)) != q:
        raise BadParams("q", "must be a power of 3 when J includes negative indices")
    n = q * 3 ** K

    def sampler(t):
        k = _grid_steps(t, q, "packel_vj grid")
        tf = Fraction(k, q)
        S = shift(n, k)
        V = _reflection(n, q, J, tf)
        return np.block([[S.T, V], [np.zeros((n, n)), S]])
    return 2 * n, None, sampler, False


def _build_rl(p):
    M = _pos_int(p, "M")
    return M, None, (lambda t: rl_matrix(M, float(t))), False


def _build_nilshift(p):
    M = _pos_int(p, "M")
    return M, None, (lambda t: shift(M, _grid_steps(t, M, "nilshift grid"))), False


def _lemerdy_B(p):
    if p.get("B") is not None:
        B = _matrix(p, "B")
    else:
        B = lemerdy_basis(_pos_int(p, "N"), _real(p, "gamma"))
    if np.linalg.cond(B) > 1e14:
        raise BadParams("B", "basis matrix is singular")
    return B


def _lemerdy_generator(B):
    n = B.shape[0]
    rates = -(2.0 ** np.arange(1, n + 1))
    return B @ np.diag(rates) @ np.linalg.inv(B), rates


def _build_lemerdy(p):
    B = _lemerdy_B(p)
    A, rates = _lemerdy_generator(B)
    Binv = np.linalg.inv(B)

    def sampler(t):
        return B @ np.diag(np.exp(rates * float(t))) @ Binv
    return B.shape[0], A, sampler, False


def _build_chernoff(p):
    inner = p["A_inner"]
    if isinstance(inner, ModelSpec):
        inner = build_model(inner)
    if isinstance(inner, ModelInstance):
        if not inner.has_generator:
            raise BadParams("A_inner", f"model {inner.name} has no bounded generator")
        inner = inner.generator
    p = dict(p, A_inner=inner)
    A = _matrix(p, "A_inner")
    m = _pos_int(p, "N_sum")
    d = A.shape[0]
    G = np.zeros((m * d, m * d), dtype=complex)
    for j in range(m):
        G[j * d:(j + 1) * d, j * d:(j + 1) * d] = (j + 1) * A

    def sampler(t):
        out = np.zeros_like(G)
        for j in range(m):
            out[j * d:(j + 1) * d, j * d:(j + 1) * d] = matexp(A, (j + 1) * float(t))
        return out
    return m * d, G, sampler, False


def _build_counter(p):
    M = _pos_int(p, "M")
    B = _lemerdy_B(p)
    _, rates = _lemerdy_generator(B)
    Binv = np.linalg.inv(B)

    def sampler(t):
        k = _grid_steps(t, M, "counter_nilpotent grid")
        left = rl_matrix(M, float(t)) @ shift(M, k)
        return np.kron(left, B @ np.diag(np.exp(rates * float(t))) @ Binv)
    return M * B.shape[0], None, sampler, False


REGISTRY = {
    "foguel": (_build_foguel, {"N": 27}),
    "eckstein": (_build_eckstein, {"N": 9, "M": 3}),
    "benchimol": (_build_benchimol, {"K": 2, "q": 2, "eps": 1.0}),
    "packel_vj": (_build_packel, {"J": "Z+", "K": 2, "q": 1}),
    "riemann_liouville": (_build_rl, {"M": 32}),
    "nilshift": (_build_nilshift, {"M": 16}),
    "lemerdy": (_build_lemerdy, {"N": 8, "gamma": 0.5, "B": None}),
    "chernoff_sum": (_build_chernoff, {"A_inner": [[-1.0]], "N_sum": 3}),
    "counter_nilpotent": (_build_counter, {"M": 8, "N": 8, "gamma": 0.5, "B": None}),
}


def build_model(spec):
    """Build a model instance.

    Dimensions: foguel ``2N``; eckstein ``2 N M^2``; benchimol and
    packel_vj ``2 q 3^K``; riemann_liouville and nilshift ``M``; lemerdy
    ``rows(B)`` (``N`` for the default basis); chernoff_sum
    ``N_sum * dim(A_inner)``; counter_nilpotent ``M * rows(B)``.

    Raises
    ------
    BadParams
        For an unknown model name, unknown parameter or invalid value.
    """
    if isinstance(spec, str):
        spec = ModelSpec(spec)
    if spec.name not in REGISTRY:
        raise BadParams("name", f"unknown model {spec.name!r}")
    builder, defaults = REGISTRY[spec.name]
    unknown = set(spec.params) - set(defaults)
    if unknown:
        raise BadParams(sorted(unknown)[0], f"not a parameter of {spec.name}")
    params = {**defaults, **spec.params}
    dim, gen, sampler, discrete = builder(params)
    return ModelInstance(ModelSpec(spec.name, params), dim, gen is not None, discrete,
                         gen, sampler)


def sample(instance, t):
    """The model's ``T(t)`` as a dense complex matrix.

    Raises
    ------
    NegativeTime
        If ``t < 0``.
    NotGridAligned
        If the model is grid-based and ``t`` is off its grid (integer times
        for discrete models).
    """
    if t < 0:
        raise NegativeTime(f"time must be nonnegative, got {t}")
    return np.asarray(instance._sampler(t), dtype=complex)


def cogenerator(A, tol=DEFAULT_TOL):
    """Cayley-type transform ``(A + I)(A - I)^-1``.

    Raises
    ------
    OneInSpectrum
        If ``A - I`` is singular to working precision, or the two forms
        ``(A + I)(A - I)^-1`` and ``I + 2 (A - I)^-1`` disagree.
    """
    A = as_operator(A, square=True)
    n = A.shape[0]
    I = np.eye(n)
    B = A - I
    if np.linalg.cond(B) > 1.0 / (np.finfo(float).eps * 1e3):
        raise OneInSpectrum("1 lies in the spectrum of A")
    R = np.linalg.inv(B)
    first = (A + I) @ R
    second = I + 2.0 * R
    if np.max(np.abs(first - second)) > tol.tol_rel * max(1.0, op_norm(first)):
        raise OneInSpectrum("A - I is too ill-conditioned for a stable transform")
    return second
