"""Bhat–Skeide interpolation of a matrix by a semigroup on a discretized circle.

The circle is cut into ``M`` equal arcs with weight ``1/M`` each, so a
function on the grid with values in ``C^n`` is a vector of length ``M n``
in arc-major order (index ``j * n + i`` for arc ``j``, coordinate ``i``).
At a grid time ``t = k / M`` with ``k = q M + f`` (``0 <= f < M``) the
interpolating operator rotates the arcs by ``k`` and applies ``T^(q+1)`` on
the first ``f`` arcs and ``T^q`` on the rest:

    (T(t) F)_j = T^(q + [j < f]) F_{(j - k) mod M}.

Every block is a power of the base matrix and the arc map is a
permutation, so the identities ``T(n) = I (x) T^n`` and
``T(s + t) = T(s) T(t)`` hold blockwise as integer bookkeeping on
``(source arc, power)`` pairs.
"""
import csv
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import CertificateInvalid, NegativeTime, NonCommuting, NotGridAligned
from ..numkit.core import DEFAULT_TOL, adjoint, as_operator, hermitian_part, op_norm
from ..simcert.types import MetricCertificate, discrete_residual, make_certificate


@dataclass(frozen=True)
class CircleGrid:
    """``M`` equal arcs of the unit circle, each of normalized Haar weight ``1/M``."""

    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M!r}")

    @property
    def weight(self):
        return 1.0 / self.M

    def constant_vector(self):
        """Grid function equal to 1 on every arc, as a unit vector in the weighted norm."""
        return np.full(self.M, 1.0 / np.sqrt(self.M))

    def times(self, t_max):
        """All grid-aligned times in ``[0, t_max]``."""
        return [k / self.M for k in range(int(np.floor(t_max * self.M + 1e-9)) + 1)]


@dataclass(frozen=True)
class GridTime:
    """A grid-aligned time ``k / M`` with its integer and fractional parts."""

    k: int
    M: int
    requested: float

    @property
    def t(self):
        return self.k / self.M

    @property
    def floor(self):
        return self.k // self.M

    @property
    def frac_steps(self):
        return self.k % self.M

    @property
    def frac(self):
        return self.frac_steps / self.M

    @property
    def perturbation(self):
        return self.t - self.requested


def align_time(grid, t, snap=False):
    """Locate ``t`` on the grid.

    Raises
    ------
    NotGridAligned
        If ``t * M`` is not an integer and ``snap`` is false.  With ``snap``
        the nearest grid time is used and the shift is kept in
        :attr:`GridTime.perturbation`.
    NegativeTime
        If ``t < 0``.
    """
    if t < 0:
        raise NegativeTime(f"time must be nonnegative, got {t}")
    if isinstance(t, Fraction):
        kf = t * grid.M
        if kf.denominator == 1:
            return GridTime(int(kf), grid.M, float(t))
        k = round(kf)
    else:
        kf = float(t) * grid.M
        k = int(round(kf))
        if abs(kf - k) <= 1e-9 * max(1.0, abs(kf)):
            return GridTime(k, grid.M, float(t))
    if not snap:
        raise NotGridAligned(f"t = {t} is not a multiple of 1/{grid.M}")
    return GridTime(int(k), grid.M, float(t))


def arc_structure(M, k):
    """Integer description of the rotation by ``k`` arcs: ``(source arc, power)`` per arc."""
    q, f = divmod(int(k), M)
    j = np.arange(M)
    src = (j - k) % M
    power = q + (j < f).astype(int)
    return src, power


def compose_structure(first, second, M):
    """Structure of ``T(s) T(t)`` from the structures of ``T(s)`` and ``T(t)``."""
    src_s, pow_s = first
    src_t, pow_t = second
    return src_t[src_s], pow_s + pow_t[src_s]


class _PowerCache:
    def __init__(self, T):
        self.powers = [np.eye(T.shape[0], dtype=complex)]
        self.T = T

    def __getitem__(self, p):
        while len(self.powers) <= p:
            self.powers.append(self.powers[-1] @ self.T)
        return self.powers[p]


@dataclass
class InterpolatedSemigroup:
    """Interpolating semigroup of ``base`` on ``grid`` (single-operator form)."""

    base: np.ndarray
    grid: CircleGrid
    m_factors: int = 1

    def __post_init__(self):
        self.base = as_operator(self.base, square=True)
        if not isinstance(self.grid, CircleGrid):
            self.grid = CircleGrid(int(self.grid))
        self._cache = _PowerCache(self.base)

    @property
    def n(self):
        return self.base.shape[0]

    @property
    def dim(self):
        return self.grid.M * self.n

    def power(self, p):
        return self._cache[p]


def _assemble(src, power, cache, n):
    M = len(src)
    out = np.zeros((M * n, M * n), dtype=complex)
    for j in range(M):
        s = src[j]
        out[j * n:(j + 1) * n, s * n:(s + 1) * n] = cache[int(power[j])]
    return out


def bs_matrix(S, t, snap=False):
    """Matrix of ``T(t)`` on the ``M n``-dimensional grid space (arc-major order).

    Raises
    ------
    NotGridAligned
        If ``t M`` is not an integer (unless ``snap``).
    """
    g = align_time(S.grid, t, snap)
    src, power = arc_structure(S.grid.M, g.k)
    return _assemble(src, power, S._cache, S.n)


def bs_check_interpolation(S, n):
    """``||T(n) - I_M (x) T^n||``; zero exactly for every integer ``n >= 0``."""
    if int(n) != n or n < 0:
        raise ValueError("n must be a nonnegative integer")
    lhs = bs_matrix(S, Fraction(int(n)))
    rhs = np.kron(np.eye(S.grid.M), S.power(int(n)))
    return float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0


def bs_semigroup_residual(S, s, t):
    """``max |T(s + t) - T(s) T(t)|`` entrywise, for grid-aligned ``s`` and ``t``.

    The arc bookkeeping always agrees exactly (see :func:`compose_structure`);
    the numerical residual is zero whenever products of powers of the base
    are exact in floating point, for example for dyadic entries.
    """
    gs = align_time(S.grid, s)
    gt = align_time(S.grid, t)
    lhs = bs_matrix(S, Fraction(gs.k + gt.k, S.grid.M))
    rhs = bs_matrix(S, Fraction(gs.k, S.grid.M)) @ bs_matrix(S, Fraction(gt.k, S.grid.M))
    return float(np.max(np.abs(lhs - rhs)))


def structure_law_holds(M, ks, kt):
    """Exact check of the semigroup law on ``(source arc, power)`` pairs."""
    src, power = compose_structure(arc_structure(M, ks), arc_structure(M, kt), M)
    src_sum, power_sum = arc_structure(M, ks + kt)
    return bool(np.array_equal(src, src_sum) and np.array_equal(power, power_sum))


def bs_extract_certificate(P_eq, S, tol=DEFAULT_TOL):
    """Base certificate ``P_H = (chi (x) I)^* P_eq (chi (x) I)``.

    ``chi`` is the constant grid function of unit norm.  Because
    ``T(1) (chi (x) h) = chi (x) T h``, contractivity of ``T(1)`` in the
    ``P_eq`` norm restricts to ``T`` in the ``P_H`` norm.

    Raises
    ------
    CertificateInvalid
        If ``P_eq`` fails to certify ``T(t)`` at some grid time in ``[0, 1]``.
    """
    P = P_eq.P if isinstance(P_eq, MetricCertificate) else np.asarray(P_eq, dtype=complex)
    P = hermitian_part(P)
    if P.shape != (S.dim, S.dim):
        raise CertificateInvalid(f"form has shape {P.shape}, expected {(S.dim, S.dim)}")
    w = np.linalg.eigvalsh(P)
    if w[0] <= 0:
        raise CertificateInvalid("form is not positive definite")
    slack = tol.tol_psd * w[-1]
    for k in range(S.grid.M + 1):
        Tt = bs_matrix(S, Fraction(k, S.grid.M))
        if discrete_residual(Tt, P) > slack:
            raise CertificateInvalid(f"form does not certify T({k}/{S.grid.M})")
    V = np.kron(S.grid.constant_vector()[:, None], np.eye(S.n))
    return make_certificate(adjoint(V) @ P @ V, lambda Q: discrete_residual(S.base, Q))


def bs_multifactor(bases, grids, t, k, snap=False, tol=DEFAULT_TOL):
    """``T_k(t)`` on ``(grid_1 (x) ... (x) grid_m) (x) H`` for commuting bases.

    Only coordinate ``k`` (1-based) of the product grid rotates, and the
    Hilbert-space part receives powers of ``bases[k - 1]``.

    Raises
    ------
    NonCommuting
        If two bases fail to commute within ``tol_rel``.
    """
    bases = [as_operator(B, square=True) for B in bases]
    grids = [g if isinstance(g, CircleGrid) else CircleGrid(int(g)) for g in grids]
    if len(grids) != len(bases):
        raise ValueError("need one grid per base")
    if not 1 <= k <= len(bases):
        raise ValueError(f"factor index {k} out of range")
    n = bases[0].shape[0]
    if any(B.shape[0] != n for B in bases):
        raise ValueError("bases must act on the same space")
    for a in range(len(bases)):
        for b in range(a + 1, len(bases)):
            A, B = bases[a], bases[b]
            scale = max(1.0, op_norm(A) * op_norm(B))
            if np.max(np.abs(A @ B - B @ A)) > tol.tol_rel * scale:
                raise NonCommuting(f"bases {a + 1} and {b + 1} do not commute")
    grid = grids[k - 1]
    g = align_time(grid, t, snap)
    src, power = arc_structure(grid.M, g.k)
    cache = _PowerCache(bases[k - 1])
    pre = int(np.prod([gr.M for gr in grids[:k - 1]]))
    post = int(np.prod([gr.M for gr in grids[k:]]))
    out = None
    for j in range(grid.M):
        E = np.zeros((grid.M, grid.M))
        E[j, src[j]] = 1.0
        term = np.kron(np.kron(np.kron(np.eye(pre), E), np.eye(post)), cache[int(power[j])])
        out = term if out is None else out + term
    return out


def norm_series(S, times, snap=False):
    """Rows ``(t, ||T(t)||, floor(t), frac(t))`` for each requested time."""
    rows = []
    for t in times:
        g = align_time(S.grid, t, snap)
        src, power = arc_structure(S.grid.M, g.k)
        # a permutation of blocks: the norm is the largest block norm
        nrm = max(op_norm(S.power(int(p))) for p in set(power.tolist()))
        rows.append((g.t, nrm, g.floor, g.frac))
    return rows


def write_series_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "norm", "floor_t", "frac_t"])
        for t, nrm, fl, fr in rows:
            w.writerow(["%.17g" % t, "%.17g" % nrm, str(fl), "%.17g" % fr])
