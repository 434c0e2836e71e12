"""The canonical pairing between ``Theta_{n/k}`` and ``Theta_{n/(n-k)}``.

``Delta_{n,k}(z; z')`` is an explicit product of theta functions in
``p + p'`` variables.  In the ``w`` bases of the two spaces it is diagonal,

    Delta(z; z') = c * sum_a w_a(z) w'_{1-a}(z'),

with a constant ``c`` that depends on the normalisations and is fitted here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cfrac import CFrac, det_d, dual
from .errors import InvalidInputError
from .numerics import rel_residual
from .sampling import cell_points, guarded, rng_from
from .theta1 import E, Lattice, ThetaSeries, theta
from .thetap import MultiThetaSpace, WBasis, multiplier_residual

#: Rejection threshold for any theta factor of Delta at a sample point.
DELTA_GUARD = 1e-6


def delta_factors(z, zp, terms, dterms, s: ThetaSeries) -> list:
    """The theta factors of ``Delta`` (without the exponential prefactor)."""
    z, zp = np.asarray(z, dtype=complex), np.asarray(zp, dtype=complex)
    p, pd = len(terms), len(dterms)
    f = [theta(z[..., 0] - zp[..., 0], s), theta(z[..., p - 1] + zp[..., pd - 1], s)]
    for a in range(1, pd):
        j = sum(dterms[:a]) - 2 * a + 1  # 1-based index into z
        f.append(theta(zp[..., a - 1] - zp[..., a] + z[..., j - 1], s))
    for b in range(1, p):
        j = sum(terms[:b]) - 2 * b + 1  # 1-based index into z'
        f.append(theta(z[..., b - 1] - z[..., b] + zp[..., j - 1], s))
    return f


def delta_product(z, zp, terms, dterms, s: ThetaSeries):
    """``E(z'_1) theta(z_1 - z'_1) theta(z_p + z'_p') prod theta(z'_a - z'_{a+1} + z_.) prod theta(z_b - z_{b+1} + z'_.)``."""
    out = E(np.asarray(zp, dtype=complex)[..., 0])
    for fct in delta_factors(z, zp, terms, dterms, s):
        out = out * fct
    return out


def pairing_sum(primal: WBasis, dualb: WBasis, z, zp):
    """``sum_a w_a(z) w'_{1-a}(z')``."""
    n = primal.n
    W, Wd = primal.values(z), dualb.values(zp)
    perm = [(1 - a) % n for a in range(n)]
    return np.sum(W * Wd[..., perm], axis=-1)


def expansion_matrix(primal: WBasis, dualb: WBasis, z, zp, s: ThetaSeries) -> np.ndarray:
    """Least-squares coefficients ``lambda[a, b]`` of Delta in ``w_a (x) w'_b``."""
    n = primal.n
    W, Wd = primal.values(z), dualb.values(zp)
    M = (W[:, :, None] * Wd[:, None, :]).reshape(len(z), n * n)
    rhs = delta_product(z, zp, primal.space.terms, dualb.space.terms, s)
    lam, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return lam.reshape(n, n)


@dataclass
class DualityPair:
    """Bases of a space and its dual, root-aligned, with the fitted constant.

    Build with :func:`build_pair`.
    """

    cfrac: CFrac
    dual_cfrac: CFrac
    primal: WBasis
    dual: WBasis
    series: ThetaSeries
    c: complex = 0j
    fit_residual: float = np.nan
    root_shift: int = 0
    lam: np.ndarray = field(default=None, repr=False)

    @property
    def n(self):
        return self.cfrac.n

    def delta(self, z, zp):
        return delta_product(z, zp, self.cfrac.terms, self.dual_cfrac.terms, self.series)

    def pairing(self, z, zp):
        return pairing_sum(self.primal, self.dual, z, zp)

    def sample(self, rng, count: int):
        """Pole-guarded ``(z, z')`` pairs stacked into two arrays."""
        tau = self.series.tau
        p, pd = self.cfrac.p, self.dual_cfrac.p

        def make(g):
            return cell_points(g, p, tau), cell_points(g, pd, tau)

        def ok(sm):
            return all(abs(f) > DELTA_GUARD for f in delta_factors(*sm, self.cfrac.terms,
                                                                    self.dual_cfrac.terms, self.series))
        pts = guarded(rng, make, ok, count)
        return np.array([a for a, _ in pts]), np.array([b for _, b in pts])


def fit_c(pair: DualityPair, z, zp) -> tuple[complex, float]:
    """Least-squares ``c`` in ``Delta = c * sum_a w_a w'_{1-a}`` and its residual.

    Raises
    ------
    InvalidInputError
        With fewer than 8 samples, or if the pairing sum vanishes at all of them.
    """
    if len(z) < 8:
        raise InvalidInputError("fit_c needs at least 8 samples")
    S = pair.pairing(z, zp)
    D = pair.delta(z, zp)
    if np.all(np.abs(S) < pair.series.tol):
        raise InvalidInputError("pairing sum vanishes at every sample; fit ill-conditioned")
    c = complex(np.vdot(S, D) / np.vdot(S, S))
    return c, float(np.max(rel_residual(D, c * S)))


def eq6_residual(pair: DualityPair, z, zp, c: complex | None = None) -> np.ndarray:
    c = pair.c if c is None else c
    return rel_residual(pair.delta(z, zp), c * pair.pairing(z, zp))


def diagonal_stats(lam: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Off-diagonal size and spread of the surviving ``lambda_a`` (both relative)."""
    n = lam.shape[0]
    diag = np.array([lam[a, (1 - a) % n] for a in range(n)])
    scale = np.abs(diag).max()
    mask = np.ones_like(lam, dtype=bool)
    for a in range(n):
        mask[a, (1 - a) % n] = False
    off = float(np.abs(lam[mask]).max() / scale) if mask.any() else 0.0
    spread = float(np.abs(diag / diag[0] - 1).max())
    return off, spread, diag


def build_pair(cfrac: CFrac, lattice: Lattice, seed=0, align: bool = True,
               series: ThetaSeries | None = None, fit_samples: int = 24) -> DualityPair:
    """Build both bases, align the dual's root of unity and fit ``c``.

    The bases are each fixed only up to the ``n``-th root of unity in their
    twisted shift.  Expanding Delta in the product basis gives
    ``lambda_a / lambda_0 = E(j a / n)`` for some integer ``j``; shifting the
    dual root by ``-j`` makes every ``lambda_a`` equal.
    """
    series = ThetaSeries(lattice) if series is None else series
    dc = dual(cfrac)
    primal = WBasis(MultiThetaSpace(cfrac, lattice))
    dualb = WBasis(MultiThetaSpace(dc, lattice))
    pair = DualityPair(cfrac, dc, primal, dualb, series)
    rng = rng_from(seed)
    n = cfrac.n
    z, zp = pair.sample(rng, max(3 * n * n, 12))
    lam = expansion_matrix(primal, dualb, z, zp, series)
    if align:
        _, _, diag = diagonal_stats(lam)
        j = int(round(np.angle(diag[1 % n] / diag[0]) * n / (2 * np.pi))) % n if n > 1 else 0
        if j:
            # w'_b -> E(-j b / n) w'_b multiplies lambda_a by E(j (1 - a) / n)
            pair.dual = dualb.with_root(dualb.root - j)
            pair.root_shift = -j % n
            lam = expansion_matrix(primal, pair.dual, z, zp, series)
    pair.lam = lam
    zf, zpf = pair.sample(rng, fit_samples)
    pair.c, pair.fit_residual = fit_c(pair, zf, zpf)
    return pair


def shift_law_residuals(pair: DualityPair, z, zp) -> dict[str, np.ndarray]:
    """Residuals of the transformation laws of Delta.

    Keys: ``periodic_tau`` (unit and tau shifts in every variable),
    ``r_shift`` (simultaneous rational shift, factor ``E(1/n)``),
    ``r_tau_shift`` (simultaneous tau-rational shift with factor
    ``-E(tau/n - z_p - z'_p')``) and ``r_tau_shift_printed`` (same without the
    minus sign, reported for comparison).
    """
    t, td, n, tau = pair.cfrac.terms, pair.dual_cfrac.terms, pair.n, pair.series.tau
    p, pd = len(t), len(td)
    zz = np.concatenate([z, zp], axis=-1)

    def f_split(x):
        return pair.delta(x[..., :p], x[..., p:])

    # the laws in z and in z' are those of the two spaces; check them jointly
    res_z = multiplier_residual(lambda x: f_split(np.concatenate([x, zp], -1)), t, tau, z)
    res_zp = multiplier_residual(lambda x: f_split(np.concatenate([z, x], -1)), td, tau, zp)
    r = np.array([det_d(t[:a]) for a in range(p)]) / n
    rd = np.array([det_d(td[:a]) for a in range(pd)]) / n
    D = f_split(zz)
    Dr = pair.delta(z + r, zp + rd)
    Drt = pair.delta(z + r * tau, zp + rd * tau)
    law = E(tau / n - z[..., -1] - zp[..., -1])
    return {
        "periodic_tau": np.maximum(res_z, res_zp),
        "r_shift": rel_residual(Dr, E(1 / n) * D),
        "r_tau_shift": rel_residual(Drt, -law * D),
        "r_tau_shift_printed": rel_residual(Drt, law * D),
    }
