"""The elliptic R-matrix built from the order-``n`` theta functions.

Entries, for indices mod ``n``,

    R[a, b, d, g](u, v) = [a + b == g + d] theta_{b-a+(b-g)(k-1)}(v-u+eta)
                          / (theta_{k(b-g)}(eta) theta_{b-d}(v-u)),

so that the exchange relation reads
``P(u, v) x_a(u) x_b(v) = sum R[a, b, d, g] x_g(v) x_d(u)`` with the scalar
prefactor ``P`` of :func:`relation8_prefactor`.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .cfrac import expand
from .errors import InvalidInputError, LimitNotConvergedError, PoleProximityError
from .numerics import POLE_GUARD
from .theta1 import DegenerationMode, E, Lattice, ThetaSeries, theta, theta_alpha_all


@dataclass(frozen=True)
class RMatrixSpec:
    """Parameters ``(n, k, tau, eta)`` of the R-matrix and its exchange algebra."""

    n: int
    k: int
    lattice: Lattice
    eta: complex
    series: ThetaSeries = None
    mode: DegenerationMode = DegenerationMode.ELLIPTIC
    check_eta: bool = True
    _theta_eta: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (1 <= self.k < self.n) or gcd(self.n, self.k) != 1:
            raise InvalidInputError(f"need coprime 1 <= k < n, got ({self.n}, {self.k})")
        object.__setattr__(self, "eta", complex(self.eta))
        if self.series is None:
            object.__setattr__(self, "series", ThetaSeries(self.lattice))
        if DegenerationMode(self.mode) is not DegenerationMode.ELLIPTIC:
            raise InvalidInputError(
                "the closed-form R-matrix is elliptic only; degenerate tensors come from "
                "artifact.homs.degenerate_r_tensor")
        te = theta_alpha_all(self.eta, self.n, self.series)
        if self.check_eta:
            for j, val in enumerate(te):
                if abs(val) < POLE_GUARD:
                    raise PoleProximityError(f"theta_{j}(eta)", val)
        object.__setattr__(self, "_theta_eta", te)

    @property
    def tau(self):
        return self.lattice.tau


def _theta_rows(spec: RMatrixSpec, u, v):
    s, n = spec.series, spec.n
    x = complex(v) - complex(u)
    num = theta_alpha_all(x + spec.eta, n, s)
    den = theta_alpha_all(x, n, s)
    return num, den


def r_entries(spec: RMatrixSpec, u, v, guard: float = POLE_GUARD) -> np.ndarray:
    """Dense tensor ``R[a, b, d, g]`` at spectral points ``(u, v)``.

    Raises
    ------
    PoleProximityError
        If some ``theta_j(v - u)`` is smaller than ``guard``.
    """
    n, k = spec.n, spec.k
    num, den = _theta_rows(spec, u, v)
    for j, val in enumerate(den):
        if abs(val) < guard:
            raise PoleProximityError(f"theta_{j}(v-u)", val)
    a, b, d = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    g = (a + b - d) % n
    vals = num[(b - a + (b - g) * (k - 1)) % n] / (spec._theta_eta[(k * (b - g)) % n] * den[(b - d) % n])
    R = np.zeros((n,) * 4, dtype=complex)
    R[a, b, d, g] = vals
    return R


def support_violation(R: np.ndarray) -> float:
    """Largest entry outside the index-sum-preserving pattern (exactly 0 if respected)."""
    n = R.shape[0]
    a, b, d, g = np.indices(R.shape)
    return float(np.abs(R[(a + b - g - d) % n != 0]).max(initial=0.0))


def ybe_sides(A: np.ndarray, B: np.ndarray, C: np.ndarray):
    """Both sides of the Yang-Baxter equation from ``A = R(u,v)``, ``B = R(u,w)``, ``C = R(v,w)``.

    ``L[a,b,g,l,f,s] = sum A[a,b,n,m] B[n,g,l,t] C[m,t,f,s]`` and
    ``R[a,b,g,l,f,s] = sum C[b,g,n,m] B[a,m,t,s] A[t,n,l,f]``.
    """
    lhs = np.einsum("abnm,nglt,mtfs->abglfs", A, B, C, optimize=True)
    rhs = np.einsum("bgnm,amts,tnlf->abglfs", C, B, A, optimize=True)
    return lhs, rhs


def ybe_residual_tensors(A, B, C) -> float:
    """Max-abs YBE residual normalised by the largest entry of either side."""
    lhs, rhs = ybe_sides(A, B, C)
    scale = max(1e-300, np.abs(lhs).max(), np.abs(rhs).max())
    return float(np.abs(lhs - rhs).max() / scale)


def ybe_residual(spec: RMatrixSpec, u, v, w) -> float:
    return ybe_residual_tensors(r_entries(spec, u, v), r_entries(spec, u, w), r_entries(spec, v, w))


def relation8_prefactor(spec: RMatrixSpec, u, v) -> complex:
    """``prod_{j>0} theta_j(0) prod_j theta_j(v-u+eta) / (prod_j theta_j(eta) prod_j theta_j(v-u))``."""
    num, den = _theta_rows(spec, u, v)
    for j, val in enumerate(den):
        if abs(val) < POLE_GUARD:
            raise PoleProximityError(f"theta_{j}(v-u)", val)
    t0 = theta_alpha_all(0.0, spec.n, spec.series)[1:]
    return complex(np.prod(t0) * np.prod(num) / (np.prod(spec._theta_eta) * np.prod(den)))


def prefactor_closed_form(spec: RMatrixSpec, u, v) -> complex:
    """``C theta(n(v-u) + n eta) / theta(n(v-u))`` with ``C = n / (theta(n eta) prod theta(b/n))``."""
    n, s = spec.n, spec.series
    x = complex(v) - complex(u)
    c = n / (theta(n * spec.eta, s) * np.prod([theta(b / n, s) for b in range(1, n)]))
    return complex(c * theta(n * x + n * spec.eta, s) / theta(n * x, s))


def unitarity(spec: RMatrixSpec, u, v) -> dict:
    """Raw and scalar-fitted residuals of ``R(u,v) R(v,u) = 1``.

    The product ``U[a,b,x,y] = sum R(u,v)[a,b,g,d] R(v,u)[d,g,x,y]`` is
    compared with ``I[a,b,x,y] = [a == y][b == x]``.  The fitted scalar is
    the least-squares ``s`` in ``U ~ s I``.
    """
    n = spec.n
    U = np.einsum("abgd,dgxy->abxy", r_entries(spec, u, v), r_entries(spec, v, u))
    Uv = np.einsum("abgd,dgxy->abxy", r_entries(spec, v, u), r_entries(spec, u, v))
    I = np.einsum("ay,bx->abxy", np.eye(n), np.eye(n))

    def fit(M):
        return complex(np.vdot(I.ravel(), M.ravel()) / np.vdot(I.ravel(), I.ravel()))

    s_uv, s_vu = fit(U), fit(Uv)
    pp = relation8_prefactor(spec, u, v) * relation8_prefactor(spec, v, u)
    return {
        "raw": float(np.abs(U - I).max()),
        "fitted": float(np.abs(U / s_uv - I).max()),
        "scale": s_uv,
        "symmetry": abs(s_uv - s_vu) / abs(s_uv),
        "vs_prefactors": abs(s_uv - pp) / abs(pp),
    }


def unitarity_residual(spec: RMatrixSpec, u, v) -> tuple[float, float]:
    """``(raw, scalar_fitted)`` unitarity residuals."""
    r = unitarity(spec, u, v)
    return r["raw"], r["fitted"]


def tau_multiplier(spec: RMatrixSpec, u, v, w) -> dict:
    """Measured factor picked up by both YBE sides under ``u -> u + tau``.

    Returns the spread of the entrywise ratios and their deviation from
    ``E(2 n eta)``.
    """
    tau = spec.tau
    L0, R0 = ybe_sides(r_entries(spec, u, v), r_entries(spec, u, w), r_entries(spec, v, w))
    u1 = u + tau
    L1, R1 = ybe_sides(r_entries(spec, u1, v), r_entries(spec, u1, w), r_entries(spec, v, w))
    target = complex(E(2 * spec.n * spec.eta))
    out = {"expected": target}
    for name, a, b in (("lhs", L0, L1), ("rhs", R0, R1)):
        mask = np.abs(a) > 1e-8 * np.abs(a).max()
        ratio = b[mask] / a[mask]
        out[name] = complex(np.median(ratio.real) + 1j * np.median(ratio.imag))
        out[name + "_deviation"] = float(np.abs(ratio - target).max() / abs(target))
    return out


def permutation_phase_tensor(n: int, k: int, mu: int, nu: int) -> np.ndarray:
    """``T[a, b, a - k' nu, b + k' nu] = E((b - a + k' nu) mu / n)``."""
    kp = expand(n, k).kprime
    T = np.zeros((n,) * 4, dtype=complex)
    for a in range(n):
        for b in range(n):
            T[a, b, (a - kp * nu) % n, (b + kp * nu) % n] = E((b - a + kp * nu) * mu / n)
    return T


def normalised_tensor(spec: RMatrixSpec, u, v) -> np.ndarray:
    """``R(u, v) / P(u, v)``; the coefficient tensor of the exchange relation."""
    return r_entries(spec, u, v) / relation8_prefactor(spec, u, v)


def degenerate_eta_check(n: int, k: int, lattice: Lattice, mu: int, nu: int, u, v,
                         eps=(1e-3, 1e-4, 1e-5, 1e-6, 1e-7), angle: float = 0.7,
                         series: ThetaSeries | None = None, conv_tol: float = 1e-5) -> dict:
    """Limit of the relation coefficients as ``eta -> mu/n + nu tau/n``.

    The tensor ``R/P`` is evaluated along ``eta = eta_0 + eps e^{i angle}``
    and extrapolated linearly in ``eps`` to 0 (the first correction is of
    order ``eps``).

    Returns
    -------
    dict
        ``printed``: max deviation from the permutation-phase tensor;
        ``corrected``: deviation from ``E(nu (n-1) (v-u)) T``, the limit
        observed for ``nu != 0``; ``convergence``: disagreement between the
        last two extrapolants.

    Raises
    ------
    LimitNotConvergedError
        If the extrapolants disagree by more than ``conv_tol``.
    """
    series = ThetaSeries(lattice) if series is None else series
    eta0 = mu / n + nu * lattice.tau / n
    vals = []
    for e in eps:
        spec = RMatrixSpec(n, k, lattice, eta0 + e * cmath.exp(1j * angle), series, check_eta=False)
        vals.append(normalised_tensor(spec, u, v))
    ext = [(e1 * A2 - e2 * A1) / (e1 - e2) for (e1, A1), (e2, A2)
           in zip(zip(eps, vals), zip(eps[1:], vals[1:]))]
    conv = float(np.abs(ext[-1] - ext[-2]).max())
    if conv > conv_tol:
        raise LimitNotConvergedError(f"extrapolants differ by {conv:.2e}")
    lim = ext[-1]
    T = permutation_phase_tensor(n, k, mu, nu)
    phase = complex(E(nu * (n - 1) * (complex(v) - complex(u))))
    return {
        "printed": float(np.abs(lim - T).max()),
        "corrected": float(np.abs(lim - phase * T).max()),
        "convergence": conv,
        "limit": lim,
    }
