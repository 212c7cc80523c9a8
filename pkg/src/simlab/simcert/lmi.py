"""Feasibility of the metric-certificate LMIs by a log-det barrier method.

For a fixed condition budget ``kappa`` the certificate problems ask for a
Hermitian ``P`` with ``I <= P <= kappa I`` and one dynamic inequality

* discrete:   ``P - T^* P T >= 0``
* continuous: ``2 a P - A^* P - P A >= 0``

Feasibility is decided by maximizing a common margin ``s`` subtracted from
every block, following the central path of ``-tau s - sum log det F_b``
with damped Newton steps.  A strictly positive margin proves feasibility;
the barrier duality bound proves infeasibility once the best attainable
margin is below ``-tol_psd``.

Before solving, the problem is reduced with the diagonal phase symmetries
of the sparsity pattern: if ``D T D^* = e^{i phi} T`` for a diagonal
unitary ``D`` then averaging any certificate over the group generated by
``D`` keeps it feasible with the same condition number, so ``P`` can be
taken block diagonal over the orbits of the grading.  Dense inputs reduce to
a single block; shift-like inputs (Foguel truncations) split into a cyclic
chain of small blocks.
"""
from dataclasses import dataclass
from math import gcd

import numpy as np
import scipy.linalg as sla

from ..errors import BudgetExceeded
from ..numkit.core import DEFAULT_TOL, adjoint, is_real


@dataclass
class LmiOutcome:
    feasible: bool
    P: np.ndarray = None
    margin: float = float("nan")
    margin_upper: float = float("inf")
    iterations: int = 0
    state: np.ndarray = None


def grading_classes(M, step):
    """Index classes of the finest diagonal-phase grading compatible with ``M``.

    Every nonzero ``M[v, u]`` with ``u != v`` (and ``u == v`` when ``step``
    is nonzero) is an edge ``u -> v`` that must raise the grading degree by
    ``step``.  Returns ``(classes, succ)`` where ``classes`` is a list of
    index arrays and ``succ[k]`` is the class that ``M`` maps class ``k``
    into (``None`` if there is none).  ``succ`` is only meaningful for
    ``step == 1``.
    """
    n = M.shape[0]
    nz = M != 0
    if step == 0:
        np.fill_diagonal(nz, False)
    adj = [[] for _ in range(n)]
    edges = []
    for v, u in zip(*np.nonzero(nz)):
        edges.append((u, v))
        adj[u].append((v, step))
        adj[v].append((u, -step))
    comp = -np.ones(n, dtype=int)
    deg = np.zeros(n, dtype=int)
    ncomp = 0
    for root in range(n):
        if comp[root] >= 0:
            continue
        comp[root] = ncomp
        stack = [root]
        while stack:
            u = stack.pop()
            for v, d in adj[u]:
                if comp[v] < 0:
                    comp[v] = ncomp
                    deg[v] = deg[u] + d
                    stack.append(v)
        ncomp += 1
    period = [0] * ncomp
    for u, v in edges:
        c = comp[u]
        period[c] = gcd(period[c], abs(int(deg[u]) + step - int(deg[v])))
    keys = []
    for i in range(n):
        p = period[comp[i]]
        keys.append((int(comp[i]), int(deg[i] % p) if p else int(deg[i])))
    order = sorted(set(keys))
    index = {k: j for j, k in enumerate(order)}
    classes = [[] for _ in order]
    for i, k in enumerate(keys):
        classes[index[k]].append(i)
    classes = [np.array(c, dtype=int) for c in classes]
    succ = []
    for (c, r) in order:
        p = period[c]
        nxt = (c, (r + step) % p) if p else (c, r + step)
        succ.append(index.get(nxt))
    return classes, succ


def _hermitian_basis(m, real):
    """Frobenius-orthonormal basis of (real symmetric or complex Hermitian) m x m matrices."""
    mats = []
    r2 = 1.0 / np.sqrt(2.0)
    for i in range(m):
        E = np.zeros((m, m), dtype=complex)
        E[i, i] = 1.0
        mats.append(E)
    for i in range(m):
        for j in range(i + 1, m):
            E = np.zeros((m, m), dtype=complex)
            E[i, j] = E[j, i] = r2
            mats.append(E)
            if not real:
                E = np.zeros((m, m), dtype=complex)
                E[i, j] = -1j * r2
                E[j, i] = 1j * r2
                mats.append(E)
    return np.array(mats)


class _Block:
    """One LMI block ``F(z) = const + sum_i z[vidx[i]] G[i]`` over the stacked variable ``z``."""

    __slots__ = ("const", "vidx", "G", "dim")

    def __init__(self, const, terms):
        self.const = const
        self.dim = const.shape[0]
        self.vidx = np.concatenate([np.atleast_1d(t[0]) for t in terms])
        self.G = np.concatenate([t[1] for t in terms], axis=0)

    def value(self, z):
        F = self.const + np.tensordot(z[self.vidx], self.G, axes=1)
        return 0.5 * (F + adjoint(F))


class CertificateProblem:
    """Reduced LMI system ``I <= P <= kappa I`` plus one dynamic block per class.

    With peripheral spectrum (``|lambda| = 1`` for a matrix,
    ``Re lambda = rate`` for a generator) the dynamic block is singular for
    every feasible ``P``: it annihilates the peripheral eigenvectors ``X``.
    The problem is then face-reduced to forms with ``D(P) X = 0`` and the
    block is compressed onto the orthogonal complement of ``X``, which
    restores a strict interior.  ``relax`` adds ``relax * I`` to the dynamic
    blocks for spectra that nearly touch the boundary without being caught
    by ``peripheral_tol``; certificates then carry a residual of at most
    ``relax``.

    The stacked variable is ``z = (x, extra)`` where ``x`` holds the
    coordinates of ``P`` and ``extra`` is either the margin ``s`` (fixed
    kappa feasibility) or kappa itself (direct minimization).
    """

    def __init__(self, op, mode, rate=0.0, reduce=True, relax=0.0, peripheral_tol=1e-9):
        op = np.asarray(op, dtype=complex)
        self.relax = float(relax)
        self.op = op
        self.mode = mode
        self.rate = float(rate)
        self.n = op.shape[0]
        self.real = is_real(op)
        face = self._peripheral_face(peripheral_tol)
        if face is not None:
            # face reduction needs the full form; the grading split is skipped
            reduce = False
            self.relax = 0.0
        if reduce:
            classes, succ = grading_classes(op, 1 if mode == "discrete" else 0)
        else:
            classes, succ = [np.arange(self.n)], [0 if mode == "discrete" else None]
        if mode != "discrete":
            succ = [None] * len(classes)
        self.classes = classes
        self.succ = succ
        self.bases = [_hermitian_basis(len(c), self.real) for c in classes]
        self.compress = None
        if face is not None:
            self._apply_face(face)
        offsets = np.cumsum([0] + [b.shape[0] for b in self.bases])
        self.var_slices = [np.arange(offsets[k], offsets[k + 1]) for k in range(len(classes))]
        self.nvar = int(offsets[-1])
        if mode == "discrete":
            gap = np.linalg.norm(np.eye(self.n) - adjoint(op) @ op, 2)
        else:
            gap = np.linalg.norm(op, 2)
        self.dyn_weight = float(min(1.0, max(gap, 1e-6)))
        self._dyn_terms = [self._dynamic_terms(k) for k in range(len(classes))]

    def _defect(self, E):
        """The dynamic operator applied to a stack of forms ``E`` (shape ``k x n x n``)."""
        M = self.op
        if self.mode == "discrete":
            return E - np.einsum("ba,kbc,cd->kad", M.conj(), E, M)
        return (2.0 * self.rate * E - np.einsum("ba,kbc->kac", M.conj(), E)
                - np.einsum("kab,bc->kac", E, M))

    def _peripheral_face(self, thresh):
        """Orthonormal basis of the peripheral eigenspace, or ``None``.

        Peripheral means ``|lambda| = 1`` (discrete) or ``Re lambda = rate``
        (continuous) within ``thresh``.  Every feasible ``P`` has a defect
        block that vanishes on these eigenvectors.
        """
        lam, V = np.linalg.eig(self.op)
        if self.mode == "discrete":
            per = np.abs(np.abs(lam) - 1.0) <= thresh
        else:
            scale = max(1.0, np.linalg.norm(self.op, 2))
            per = np.abs(lam.real - self.rate) <= thresh * scale
        if not per.any():
            return None
        return sla.orth(V[:, per])

    def _apply_face(self, X):
        """Restrict ``P`` to forms with ``D(P) X = 0`` and compress ``D`` onto ``X``'s complement."""
        E = self.bases[0]
        DX = np.einsum("kab,bj->kaj", self._defect(E), X).reshape(E.shape[0], -1)
        C = np.concatenate([DX.real, DX.imag], axis=1).T
        N = sla.null_space(C, rcond=1e-9)
        if N.shape[1] == 0:
            # no form satisfies the face equations: leave the problem unreduced
            return
        self.bases = [np.tensordot(N.T, E, axes=1)]
        self.compress = sla.null_space(adjoint(X))

    def _dynamic_terms(self, k):
        idx = self.classes[k]
        E = self.bases[k]
        if self.mode == "discrete":
            terms = {k: E.copy()}
            j = self.succ[k]
            if j is not None:
                Tk = self.op[np.ix_(self.classes[j], idx)]
                if np.any(Tk):
                    push = -np.einsum("ba,kbc,cd->kad", Tk.conj(), self.bases[j], Tk)
                    terms[j] = terms[j] + push if j in terms else push
        else:
            Ak = self.op[np.ix_(idx, idx)]
            terms = {k: 2.0 * self.rate * E - np.einsum("ba,kbc->kac", Ak.conj(), E)
                     - np.einsum("kab,bc->kac", E, Ak)}
        if self.compress is not None:
            Q = self.compress
            terms = {c: np.einsum("ab,kac,cd->kbd", Q.conj(), G, Q) for c, G in terms.items()}
        return [(self.var_slices[c], G) for c, G in sorted(terms.items())]

    def _dyn_dim(self, k):
        return self.compress.shape[1] if self.compress is not None else len(self.classes[k])

    def feasibility_blocks(self, kappa):
        """Blocks with the margin ``s`` (index ``nvar``) subtracted."""
        s = self.nvar
        out = []
        for k, idx in enumerate(self.classes):
            eye = np.eye(len(idx), dtype=complex)
            out.append(_Block(-eye, [(self.var_slices[k], self.bases[k]), (s, -eye[None])]))
            out.append(_Block(kappa * eye, [(self.var_slices[k], -self.bases[k]), (s, -eye[None])]))
        for k in range(len(self.classes)):
            m = self._dyn_dim(k)
            if m == 0:
                continue
            eye = np.eye(m, dtype=complex)
            out.append(_Block(self.relax * eye,
                              self._dyn_terms[k] + [(s, -self.dyn_weight * eye[None])]))
        return out

    def kappa_blocks(self):
        """Blocks with kappa (index ``nvar``) as a variable."""
        kap = self.nvar
        out = []
        for k, idx in enumerate(self.classes):
            eye = np.eye(len(idx), dtype=complex)
            out.append(_Block(-eye, [(self.var_slices[k], self.bases[k])]))
            out.append(_Block(0 * eye, [(self.var_slices[k], -self.bases[k]), (kap, eye[None])]))
        for k in range(len(self.classes)):
            m = self._dyn_dim(k)
            if m == 0:
                continue
            out.append(_Block(self.relax * np.eye(m, dtype=complex), self._dyn_terms[k]))
        return out

    def assemble(self, x):
        P = np.zeros((self.n, self.n), dtype=complex)
        for k, idx in enumerate(self.classes):
            Pk = np.tensordot(x[self.var_slices[k]], self.bases[k], axes=1)
            P[np.ix_(idx, idx)] = Pk
        return 0.5 * (P + adjoint(P))

    def coordinates(self, P):
        x = np.zeros(self.nvar)
        for k, idx in enumerate(self.classes):
            Pk = P[np.ix_(idx, idx)]
            x[self.var_slices[k]] = np.real(np.einsum("kab,ab->k", self.bases[k].conj(), Pk))
        return x

    def scaled_identity(self, c):
        """Coordinates of the projection of ``c I`` onto the parametrized forms."""
        return self.coordinates(c * np.eye(self.n, dtype=complex))


def _cholesky_inverse(F):
    try:
        L = np.linalg.cholesky(F)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(L)):
        return None
    return sla.solve_triangular(L, np.eye(F.shape[0]), lower=True, check_finite=False)


def _interior(blocks, z):
    return all(_cholesky_inverse(b.value(z)) is not None for b in blocks)


def _center(blocks, z, c, tau, budget, beta=0.1, early=None):
    """Damped Newton on ``tau c.z - sum log det F_b(z)`` until the decrement is ``<= beta``.

    Returns ``(z, decrement, steps)``; stops at once if ``early(z)`` holds.
    """
    nz = z.size
    steps = 0
    while True:
        if steps >= budget:
            return z, np.inf, steps
        steps += 1
        H = np.zeros((nz, nz))
        g = tau * c.copy()
        for b in blocks:
            Linv = _cholesky_inverse(b.value(z))
            K = Linv @ b.G @ adjoint(Linv)
            Kf = K.reshape(K.shape[0], -1)
            idx = b.vidx
            g[idx] -= np.real(np.trace(K, axis1=1, axis2=2))
            H[np.ix_(idx, idx)] += np.real(Kf @ Kf.conj().T)
        # symmetric Jacobi scaling tames the spread between near-active and slack directions
        d = 1.0 / np.sqrt(np.maximum(np.diag(H), 1e-300))
        Hs = H * d[:, None] * d[None, :]
        try:
            step = -d * sla.cho_solve(sla.cho_factor(Hs, check_finite=False), d * g,
                                      check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            step = -d * np.linalg.lstsq(Hs, d * g, rcond=None)[0]
        lam = float(np.sqrt(max(0.0, -g @ step)))
        alpha = 1.0 if lam <= 0.25 else 1.0 / (1.0 + lam)
        while alpha > 1e-12 and not _interior(blocks, z + alpha * step):
            alpha *= 0.5
        if alpha <= 1e-12:
            return z, lam, steps
        z = z + alpha * step
        if early is not None and early(z):
            return z, lam, steps
        if lam <= beta:
            return z, lam, steps


def _gap_bound(nu, beta, tau):
    """Suboptimality bound of an approximately centered point (decrement <= beta)."""
    return (nu + (beta + np.sqrt(nu)) * beta / (1.0 - beta)) / tau


def _min_margin(blocks, z):
    """Largest ``s`` for which every block stays PSD at the point ``z`` (margin slot zeroed)."""
    z0 = z.copy()
    z0[-1] = 0.0
    worst = np.inf
    for b in blocks:
        F = b.value(z0)
        # margin term scale is stored in the last G slice of the block
        w = -np.real(b.G[-1][0, 0])
        worst = min(worst, sla.eigvalsh(F, check_finite=False)[0] / w)
    return worst


def solve_feasibility(problem, kappa, tol=DEFAULT_TOL, x0=None):
    """Decide whether ``problem`` has a certificate with condition budget ``kappa``.

    Returns an :class:`LmiOutcome`.  ``feasible`` is True when a point with
    margin ``>= -tol_psd`` was found; False when the duality bound shows the
    best margin is below ``-tol_psd``.

    Raises
    ------
    BudgetExceeded
        If ``tol.max_iter`` Newton steps pass without a decision.
    """
    blocks = problem.feasibility_blocks(kappa)
    nvar = problem.nvar
    nu = float(sum(b.dim for b in blocks))
    # start near the bottom of the box: certificates are normalized to
    # lambda_min = 1, so this keeps the dynamic slack on the scale of P
    start = 0.5 * (1.0 + kappa) if kappa < 3.0 else 2.0
    x = problem.scaled_identity(start) if x0 is None else np.asarray(x0, float)[:nvar]
    z = np.append(x, 0.0)
    m0 = _min_margin(blocks, z)
    # keep the start well inside relative to the size of P
    z[-1] = m0 - max(1.0, abs(m0))
    c = np.zeros(nvar + 1)
    c[-1] = -1.0
    thresh = tol.tol_psd
    beta = 0.1
    tau = 1.0 / max(1.0, abs(z[-1]))
    used = 0
    best = z.copy()
    while True:
        z, lam, steps = _center(blocks, z, c, tau, tol.max_iter - used, beta,
                                early=lambda v: v[-1] >= 0.0)
        used += steps
        if z[-1] > best[-1]:
            best = z.copy()
        if z[-1] >= 0.0:
            return LmiOutcome(True, problem.assemble(z[:-1]), z[-1], np.inf, used, z[:-1])
        if lam > beta:
            raise BudgetExceeded(
                f"no decision after {used} Newton steps (margin {z[-1]:.3e}, kappa {kappa:.6g})")
        upper = z[-1] + _gap_bound(nu, beta, tau)
        if upper < -thresh:
            return LmiOutcome(False, None, z[-1], upper, used, best[:-1])
        if upper - z[-1] <= 0.1 * thresh:
            if best[-1] >= -thresh:
                return LmiOutcome(True, problem.assemble(best[:-1]), best[-1], upper, used, best[:-1])
            return LmiOutcome(False, None, best[-1], upper, used, best[:-1])
        tau *= 8.0


@dataclass
class KappaOutcome:
    kappa: float
    lower: float
    P: np.ndarray
    iterations: int


def minimize_kappa(problem, x_start, kappa_start, tol=DEFAULT_TOL, rel_gap=None):
    """Follow the central path of ``min kappa`` from a strictly feasible point.

    ``x_start`` must satisfy every block strictly with budget ``kappa_start``
    (for instance the output of :func:`solve_feasibility` with a positive
    margin).  Returns the final kappa, a lower bound from the duality gap,
    and the corresponding form.
    """
    rel_gap = tol.tol_rel if rel_gap is None else rel_gap
    blocks = problem.kappa_blocks()
    nvar = problem.nvar
    nu = float(sum(b.dim for b in blocks))
    z = np.append(np.asarray(x_start, float)[:nvar], kappa_start)
    if not _interior(blocks, z):
        # nudge the budget so the start is strict for the box block
        z[-1] = kappa_start * (1.0 + 1e-6) + 1e-9
        if not _interior(blocks, z):
            raise ValueError("starting point is not strictly feasible")
    c = np.zeros(nvar + 1)
    c[-1] = 1.0
    beta = 0.1
    tau = nu / max(z[-1], 1.0)
    used = 0
    while True:
        z, lam, steps = _center(blocks, z, c, tau, tol.max_iter - used, beta)
        used += steps
        gap = _gap_bound(nu, beta, tau)
        if lam > beta:
            if used >= tol.max_iter:
                raise BudgetExceeded(f"kappa minimization stalled after {used} Newton steps")
            # numerical stall: report the certified point with a wider bracket
            return KappaOutcome(z[-1], max(1.0, z[-1] - gap), problem.assemble(z[:-1]), used)
        if gap <= rel_gap * z[-1]:
            return KappaOutcome(z[-1], max(1.0, z[-1] - gap), problem.assemble(z[:-1]), used)
        tau *= 8.0
