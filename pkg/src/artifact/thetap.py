"""Theta functions of several variables attached to a continued fraction.

For ``n/k = (n_1, ..., n_p)`` the space ``Theta_{n/k}`` consists of entire
functions of ``z = (z_1, ..., z_p)`` that are 1-periodic in every variable and
satisfy

    f(z + tau e_j) = (-1)^{n_j} E(-(n_j z_j - z_{j-1} - z_{j+1} - (delta_{1j} - 1) tau)) f(z)

with ``z_0 = z_{p+1} = 0``.  In Fourier space this is a recurrence along the
columns ``v_j`` of the tridiagonal matrix ``A`` (diagonal ``n_j``,
off-diagonal ``-1``):

    a_{alpha + v_j} = (-1)^{n_j} q^{alpha_j + 1 - delta_{1j}} a_alpha.

Each coset of ``Z^p / A Z^p`` (there are ``n`` of them) carries one
solution, and the basis ``w_alpha`` is obtained from the trivial coset by
repeated application of the twisted shift ``T_{tau/n}``.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .cfrac import CFrac, det_d
from .errors import DegenerateEigenvalueError, InternalCheckError, TruncationError
from .numerics import rel_residual
from .theta1 import TWO_PI_I, E, Lattice

#: Log-magnitude window kept below the dominant term.  ``exp(-100)`` ~ 4e-44.
DEFAULT_DROP = 100.0


def tridiagonal(terms) -> np.ndarray:
    p = len(terms)
    A = np.zeros((p, p), dtype=np.int64)
    for i, t in enumerate(terms):
        A[i, i] = t
        if i:
            A[i, i - 1] = A[i - 1, i] = -1
    return A


def shift_vector(terms) -> np.ndarray:
    """Integer numerators ``d(n_{j+1}, ..., n_p)`` of the shift ``r = (.)/n``."""
    return np.array([det_d(terms[j + 1:]) for j in range(len(terms))], dtype=np.int64)


def check_coset_phase(terms) -> None:
    """Assert ``v_j . r`` is divisible by ``n`` for every lattice generator."""
    A, r, n = tridiagonal(terms), shift_vector(terms), det_d(terms)
    if np.any((A.T @ r) % n):
        raise InternalCheckError("coset phase is not constant along the sublattice")


def enumerate_cosets(terms) -> list[tuple[int, ...]]:
    """Representatives of ``Z^p / A Z^p`` by breadth-first search from 0.

    The label of a point ``alpha`` is ``alpha . r mod n``; it is constant on
    cosets and separates them, so unit steps from the origin meet all ``n``
    classes.  Representatives are returned ordered by label.
    """
    check_coset_phase(terms)
    n, r, p = det_d(terms), shift_vector(terms), len(terms)
    found: dict[int, tuple[int, ...]] = {}
    seen = {(0,) * p}
    dq = deque(seen)
    while dq and len(found) < n:
        a = dq.popleft()
        found.setdefault(int(np.dot(a, r) % n), a)
        for j in range(p):
            for s in (1, -1):
                b = a[:j] + (a[j] + s,) + a[j + 1:]
                if b not in seen:
                    seen.add(b)
                    dq.append(b)
    if len(found) != n or round(abs(np.linalg.det(tridiagonal(terms)))) != n:
        raise InternalCheckError("coset count does not match the determinant")
    return [found[s] for s in range(n)]


@dataclass(frozen=True)
class CoeffTable:
    """Sparse Fourier coefficients ``a_alpha``, stored by logarithm."""

    index: np.ndarray  # (M, p) int
    logc: np.ndarray  # (M,) complex

    @property
    def coeff(self) -> np.ndarray:
        return np.exp(self.logc)

    def lookup(self) -> dict:
        return {tuple(a): l for a, l in zip(self.index.tolist(), self.logc)}


def propagate(terms, tau: complex, seed, drop: float, box: int) -> CoeffTable:
    """Fill one coset's coefficients from ``a_seed = 1`` by the recurrence.

    Entries whose magnitude, inflated by the largest exponential factor
    met after argument reduction, falls ``drop`` below the running maximum
    are not expanded further.
    """
    A = tridiagonal(terms)
    p = len(terms)
    lq = TWO_PI_I * tau
    bound = np.pi * tau.imag  # |E(alpha z)| <= exp(pi Im tau |alpha|_1) on the strip
    cols = [tuple(int(x) for x in A[:, j]) for j in range(p)]
    seed = tuple(int(x) for x in seed)
    logc = {seed: 0j}
    dq = deque([seed])
    best = bound * sum(map(abs, seed))
    while dq:
        a = dq.popleft()
        la = logc[a]
        for j, v in enumerate(cols):
            c = 0 if j == 0 else 1
            fwd = tuple(x + y for x, y in zip(a, v))
            bwd = tuple(x - y for x, y in zip(a, v))
            l_f = la + 1j * np.pi * terms[j] + lq * (a[j] + c)
            l_b = la - 1j * np.pi * terms[j] - lq * (a[j] - v[j] + c)
            for b, lb in ((fwd, l_f), (bwd, l_b)):
                if b in logc:
                    continue
                score = lb.real + bound * sum(map(abs, b))
                best = max(best, score)
                if score < best - drop:
                    continue
                if max(map(abs, b)) > box:
                    raise TruncationError(
                        f"box radius {box} too small: coefficient at {b} still significant")
                logc[b] = lb
                dq.append(b)
    idx = np.array(list(logc.keys()), dtype=np.int64).reshape(-1, p)
    return CoeffTable(idx, np.array(list(logc.values()), dtype=complex))


def reduce_point(z: np.ndarray, terms, tau: complex):
    """Move ``z`` into ``|Im z_j| <= Im tau / 2`` and return the multiplier.

    Returns ``(z0, logmult)`` with ``f(z) = exp(logmult) f(z0)`` for every
    ``f`` in the space.
    """
    z = np.array(z, dtype=complex)
    p = len(terms)
    logm = np.zeros(z.shape[:-1], dtype=complex)
    for j in range(p):
        m = np.rint(z[..., j].imag / tau.imag)
        z[..., j] -= m * tau
        zl = z[..., j - 1] if j > 0 else 0
        zr = z[..., j + 1] if j < p - 1 else 0
        dlt = 1.0 if j == 0 else 0.0
        nj = terms[j]
        # f(z' + m tau e_j) = (-1)^{m n_j} E(-[m (n_j z'_j - z_{j-1} - z_{j+1} - (d-1) tau) + n_j tau m (m-1)/2]) f(z')
        logm = logm + 1j * np.pi * m * nj - TWO_PI_I * (
            m * (nj * z[..., j] - zl - zr - (dlt - 1) * tau) + nj * tau * m * (m - 1) / 2)
    z = z - np.rint(z.real)
    return z, logm


class MultiThetaSpace:
    """``Theta_{n/k}`` built from coefficient tables, one per coset.

    Parameters
    ----------
    cfrac : CFrac
    lattice : Lattice
    box_radius : int, optional
        Hard cap on ``|alpha_j|``; defaults to ``8 * max(n_j)`` grown with
        ``1/Im tau`` so the Gaussian decay fits inside.
    drop : float
        Log-magnitude window, see :func:`propagate`.
    """

    def __init__(self, cfrac: CFrac, lattice: Lattice, box_radius: int | None = None,
                 drop: float = DEFAULT_DROP):
        self.cfrac = cfrac
        self.lattice = lattice
        self.terms = cfrac.terms
        self.n, self.k, self.p = cfrac.n, cfrac.k, cfrac.p
        self.drop = drop
        if box_radius is None:
            box_radius = int(8 * max(self.terms) * max(1.0, 1.5 / lattice.tau.imag))
        self.box_radius = box_radius
        self.A = tridiagonal(self.terms)
        self.r = shift_vector(self.terms)
        self.cosets = enumerate_cosets(self.terms)
        self.tables = [propagate(self.terms, lattice.tau, c, drop, box_radius) for c in self.cosets]

    @property
    def tau(self) -> complex:
        return self.lattice.tau

    def evaluate_table(self, table: CoeffTable, z) -> np.ndarray:
        """Sum a coefficient table at points ``z`` of shape ``(..., p)``."""
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.p:
            raise ValueError(f"expected {self.p} coordinates, got shape {z.shape}")
        z0, logm = reduce_point(z, self.terms, self.tau)
        phase = TWO_PI_I * (z0 @ table.index.T)  # (..., M)
        return np.exp(logm) * (np.exp(phase) @ table.coeff)

    def evaluate(self, table_index: int, z) -> np.ndarray:
        """Value of the coset function ``table_index`` at ``z``."""
        return self.evaluate_table(self.tables[table_index], z)

    def recurrence_residual(self, table_index: int) -> float:
        """Worst relative violation of the recurrence within one table."""
        t = self.tables[table_index]
        lut = t.lookup()
        scale = np.abs(t.coeff).max()
        lq = TWO_PI_I * self.tau
        worst = 0.0
        for a, la in lut.items():
            for j in range(self.p):
                b = tuple(int(x) for x in np.add(a, self.A[:, j]))
                if b in lut:
                    c = 0 if j == 0 else 1
                    pred = np.exp(la + 1j * np.pi * self.terms[j] + lq * (a[j] + c))
                    worst = max(worst, abs(np.exp(lut[b]) - pred) / scale)
        return worst

    def truncation_bound(self) -> float:
        """Relative size of any dropped term after argument reduction."""
        return float(np.exp(-self.drop))


class WBasis:
    """The basis ``w_alpha`` with ``T_{1/n} w_a = E(k a / n) w_a`` and ``T_{tau/n} w_a = w_{a+1}``.

    Parameters
    ----------
    space : MultiThetaSpace
    root : int
        Which ``n``-th root of unity correction is used in ``phi``.  ``0``
        means the real part of ``phi`` is reduced into ``[0, 1/n)``; ``j``
        adds ``j/n``, which multiplies ``w_alpha`` by ``E(j alpha / n)``.
    normalization : complex
        Overall scalar applied to every ``w_alpha``.
    """

    def __init__(self, space: MultiThetaSpace, root: int = 0, normalization: complex = 1.0):
        self.space = space
        self.n, self.k, self.p = space.n, space.k, space.p
        self.root = int(root) % self.n
        self.normalization = complex(normalization)
        n, k, r = self.n, self.k, space.r
        lq = TWO_PI_I * space.tau
        # phases of the coset functions under T_{1/n}
        phases = [int(np.dot(c, r) % n) for c in space.cosets]
        if len(set(phases)) != n:
            raise DegenerateEigenvalueError(f"coset phases {phases} are not distinct")
        e1 = np.zeros(self.p, dtype=np.int64)
        e1[0] = 1
        # w_a lives on the coset with phase k a; each coset table is exact up
        # to a scalar, so T_{tau/n} (with phi = 0) maps g_a to rho_a g_{a+1}
        g = [space.tables[phases.index(a * k % n)] for a in range(n)]
        logrho = []
        for a in range(n):
            src, dst = g[a], g[(a + 1) % n].lookup()
            best, lr = -np.inf, None
            for ix, la in zip(src.index.tolist(), src.logc):
                tgt = tuple(int(x) for x in np.add(ix, e1))
                if tgt in dst and min(la.real, dst[tgt].real) > best:
                    best = min(la.real, dst[tgt].real)
                    lr = la + lq * np.dot(ix, r) / n - dst[tgt]
            if lr is None:
                raise TruncationError("no overlapping coefficients between coset tables")
            logrho.append(lr)
        # T^n w_0 = E(n phi) prod(rho) w_0 must equal w_0
        phi = -sum(logrho) / (TWO_PI_I * n)
        phi = complex((phi.real % (1.0 / n)) + self.root / n, phi.imag)
        self.phi = phi
        self.order = [a * k % n for a in range(n)]
        tables, acc = [], 0j
        for a in range(n):
            tables.append(CoeffTable(g[a].index, g[a].logc + acc))
            acc = acc + TWO_PI_I * phi + logrho[a]
        self.tables = tables

    def with_root(self, root: int) -> "WBasis":
        return WBasis(self.space, root=root, normalization=self.normalization)

    def scaled(self, s: complex) -> "WBasis":
        return WBasis(self.space, root=self.root, normalization=self.normalization * s)

    def w(self, alpha: int, z) -> np.ndarray:
        """``w_alpha(z)``; ``z`` has shape ``(..., p)``."""
        t = self.tables[int(alpha) % self.n]
        return self.normalization * self.space.evaluate_table(t, z)

    def values(self, z) -> np.ndarray:
        """All ``w_alpha(z)`` stacked on a new last axis."""
        return np.stack([self.w(a, z) for a in range(self.n)], axis=-1)

    def T_shift(self, f):
        r = self.space.r / self.n
        return lambda z: f(np.asarray(z) + r)

    def T_tau_shift(self, f):
        r = self.space.r * self.space.tau / self.n
        return lambda z: E(np.asarray(z)[..., 0] + self.phi) * f(np.asarray(z) + r)

    def to_json(self) -> str:
        """Coefficient tables as JSON (coefficients below 1e-300 are omitted)."""
        sp = self.space
        coeffs = []
        for a, t in enumerate(self.tables):
            c = self.normalization * t.coeff
            for ix, v in zip(t.index.tolist(), c):
                if abs(v) > 1e-300:
                    coeffs.append({"table": a, "index": ix, "re": v.real, "im": v.imag})
        doc = {
            "n": self.n, "k": self.k, "tau": [sp.tau.real, sp.tau.imag],
            "terms": list(sp.terms),
            "cosets": [list(c) for c in sp.cosets],
            "phi": [self.phi.real, self.phi.imag],
            "coeffs": coeffs,
        }
        return json.dumps(doc)


def multiplier_residual(f, terms, tau, z) -> np.ndarray:
    """Worst relative violation of the 1- and tau-shift laws at points ``z``."""
    z = np.asarray(z, dtype=complex)
    p = len(terms)
    fz = f(z)
    worst = np.zeros(z.shape[:-1])
    for j in range(p):
        e = np.zeros(p)
        e[j] = 1
        zl = z[..., j - 1] if j > 0 else 0
        zr = z[..., j + 1] if j < p - 1 else 0
        dlt = 1.0 if j == 0 else 0.0
        mult = (-1) ** terms[j] * E(-(terms[j] * z[..., j] - zl - zr - (dlt - 1) * tau))
        fz1, fzt = f(z + e), f(z + tau * e)
        r1 = rel_residual(fz1, fz)
        r2 = rel_residual(fzt, mult * fz)
        worst = np.maximum(worst, np.maximum(r1, r2))
    return worst


def k1_agreement(wb: WBasis, shift: complex, z, series=None) -> dict:
    """Compare the ``k = 1`` basis with shifted one-variable ``theta_alpha``.

    The root of ``wb`` is re-chosen so that its twisted-shift phase agrees
    with that of ``theta_alpha(z + shift)``, namely
    ``shift + 1/(2n) - (n-1) tau / (2n)`` modulo ``1/n``; then one constant
    is fitted at the first point and ``w_a(z) = c theta_a(z + shift)`` is
    tested at every point and every ``a``.

    Returns
    -------
    dict
        ``residual`` (worst ``rel_residual``), ``root`` and ``phase_mismatch``
        (distance of the imaginary parts of the two phases; nonzero means no
        root choice can work).
    """
    from .theta1 import ThetaSeries, theta_alpha

    if wb.p != 1 or wb.k != 1:
        raise ValueError("k1_agreement needs the expansion n/1")
    n, tau = wb.n, wb.space.tau
    series = ThetaSeries(wb.space.lattice) if series is None else series
    target = complex(shift) + 1 / (2 * n) - (n - 1) * tau / (2 * n)
    base = wb.with_root(0)
    root = int(np.rint((target.real - base.phi.real) * n)) % n
    aligned = wb.with_root(root)
    z = np.asarray(z, dtype=complex).reshape(-1)
    W = aligned.values(z[:, None])
    T = np.stack([theta_alpha(a, z + shift, n, series) for a in range(n)], axis=-1)
    c = W[0, 0] / T[0, 0]
    mismatch = abs(((target - aligned.phi) * n).real - round(((target - aligned.phi) * n).real)) \
        + abs((target - aligned.phi).imag)
    return {"residual": float(rel_residual(W, c * T).max()), "root": root,
            "phase_mismatch": float(mismatch)}
