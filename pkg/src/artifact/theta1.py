"""Theta functions of one variable.

Conventions: ``E(x) = exp(2 pi i x)`` and

    theta(z) = sum_a (-1)^a E(a z + a (a-1) tau / 2),

an odd-looking function with a single zero at ``z = 0`` modulo the lattice
``Z + Z tau``.  The order-``n`` functions ``theta_alpha`` diagonalise the shift
by ``1/n`` and are permuted cyclically by the twisted shift by ``tau/n``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, PoleProximityError, TruncationError

TWO_PI_I = 2j * np.pi


def E(x):
    """``exp(2 pi i x)``; every exponential in the package goes through here."""
    return np.exp(TWO_PI_I * np.asarray(x))


@dataclass(frozen=True)
class Lattice:
    """The period lattice ``Z + Z tau`` with ``Im tau > 0``."""

    tau: complex

    def __post_init__(self):
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise InvalidInputError(f"Im tau must be positive, got {tau}")
        object.__setattr__(self, "tau", tau)

    @property
    def q(self) -> complex:
        return complex(E(self.tau))


class DegenerationMode(str, enum.Enum):
    """Which kernel plays the role of ``theta``."""

    ELLIPTIC = "elliptic"
    TRIGONOMETRIC = "trigonometric"
    RATIONAL = "rational"


_FLOOR = 1e-8  # extra headroom below tol for the truncation bound


@dataclass(frozen=True)
class ThetaSeries:
    """Truncation settings for the theta series.

    Parameters
    ----------
    lattice : Lattice
    truncation : int, optional
        Series indices run over ``[-N, N+1]``.  Chosen automatically when
        omitted so that the first dropped term is below ``tol * 1e-8``
        after the argument has been reduced into the strip
        ``|Im z| <= Im tau / 2``.
    tol : float
    mode : DegenerationMode
    """

    lattice: Lattice
    truncation: int | None = None
    tol: float = 1e-10
    mode: DegenerationMode = DegenerationMode.ELLIPTIC
    _a: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "mode", DegenerationMode(self.mode))
        if self.tol <= 0:
            raise InvalidInputError("tol must be positive")
        t = self.lattice.tau.imag
        need = -math.log(self.tol * _FLOOR) / math.pi
        n_auto = 4
        # the term a = N + 1 has modulus <= exp(-pi Im tau N (N - 1))
        while t * n_auto * (n_auto - 1) < need:
            n_auto += 1
        if self.truncation is None:
            object.__setattr__(self, "truncation", n_auto)
        elif self.truncation < 4:
            raise InvalidInputError("truncation must be at least 4")
        N = self.truncation
        object.__setattr__(self, "_a", np.arange(-N, N + 2))

    @property
    def tau(self) -> complex:
        return self.lattice.tau


def reduce_arg(z, tau):
    """Split ``z = z0 + m tau + l`` with ``|Im z0| <= Im tau / 2``.

    Returns ``(z0, m)``; the integer ``l`` is discarded since every function
    here is 1-periodic.
    """
    z = np.asarray(z, dtype=complex)
    m = np.rint(z.imag / tau.imag)
    z0 = z - m * tau
    z0 = z0 - np.rint(z0.real)
    return z0, m


def theta(z, s: ThetaSeries):
    """Evaluate ``theta(z)``; vectorised over ``z``.

    In the degenerate modes the kernel is ``1 - E(z)`` (trigonometric) or
    ``z`` (rational).

    Raises
    ------
    TruncationError
        If the last retained term is not below ``tol`` relative to the sum of
        the term magnitudes.
    """
    if s.mode is DegenerationMode.TRIGONOMETRIC:
        return 1 - E(z)
    if s.mode is DegenerationMode.RATIONAL:
        return np.asarray(z, dtype=complex)
    tau = s.tau
    z0, m = reduce_arg(z, tau)
    a = s._a
    sign = np.where(a % 2 == 0, 1.0, -1.0)
    expo = TWO_PI_I * (np.multiply.outer(z0, a) + a * (a - 1) / 2 * tau)
    terms = sign * np.exp(expo)
    total = terms.sum(axis=-1)
    mags = np.abs(terms)
    tail = np.maximum(mags[..., 0], mags[..., -1])
    if np.any(tail > s.tol * mags.sum(axis=-1)):
        raise TruncationError("theta series truncation insufficient")
    # theta(z0 + m tau) = (-1)^m E(-(m z0 + tau m (m - 1) / 2)) theta(z0)
    mult = np.where(m % 2 == 0, 1.0, -1.0) * E(-(m * z0 + tau * m * (m - 1) / 2))
    return mult * total


def theta_product(z, lattice: Lattice, terms: int = 60):
    """Infinite-product form of ``theta``, used as an independent oracle.

    The nome is ``q = E(tau)``:
    ``prod (1 - q^a) * (1 - E(z)) * prod (1 - E(z + a tau)) (1 - E(a tau - z))``.
    """
    z = np.asarray(z, dtype=complex)
    a = np.arange(1, terms + 1)
    qa = E(a * lattice.tau)
    ez = E(z)[..., None]
    body = np.prod((1 - qa) * (1 - ez * qa) * (1 - qa / ez), axis=-1)
    return (1 - E(z)) * body


def theta_alpha(alpha: int, z, n: int, s: ThetaSeries):
    """Order-``n`` basis function ``theta_alpha`` (index taken mod ``n``).

    ``prod_j theta(z + alpha tau / n + j / n) * E(alpha z + alpha (alpha - n) tau / (2n) + alpha / (2n))``
    """
    if s.mode is not DegenerationMode.ELLIPTIC:
        raise InvalidInputError("theta_alpha is only defined in elliptic mode")
    if n < 1:
        raise InvalidInputError("n must be positive")
    alpha = int(alpha) % n
    z = np.asarray(z, dtype=complex)
    tau = s.tau
    out = np.ones_like(z)
    for j in range(n):
        out = out * theta(z + alpha * tau / n + j / n, s)
    return out * E(alpha * z + alpha * (alpha - n) * tau / (2 * n) + alpha / (2 * n))


def theta_alpha_all(z, n: int, s: ThetaSeries):
    """All ``theta_alpha(z)``, ``alpha = 0..n-1``, stacked on a new last axis."""
    return np.stack([theta_alpha(a, z, n, s) for a in range(n)], axis=-1)


def T_shift(f, n: int):
    """``T_{1/n}``: ``f(z) -> f(z + 1/n)``."""
    return lambda z: f(np.asarray(z) + 1 / n)


def T_tau_shift(f, n: int, tau: complex):
    """``T_{tau/n}``: ``f(z) -> E(z + 1/(2n) - (n-1) tau / (2n)) f(z + tau/n)``."""
    def g(z):
        z = np.asarray(z, dtype=complex)
        return E(z + 1 / (2 * n) - (n - 1) * tau / (2 * n)) * f(z + tau / n)
    return g


def identity1_residual(z, n: int, s: ThetaSeries, guard: float | None = None):
    """Absolute residual of the product identity for ``theta(n z)``.

    ``theta(nz) = n prod_a theta_a(z) E(-n(n-1) z / 2) / (prod_{b>0} theta_b(0) prod_{b>0} theta(b/n))``
    """
    if n < 2:
        raise InvalidInputError("n must be at least 2")
    guard = s.tol if guard is None else guard
    den = 1 + 0j
    for b in range(1, n):
        tb0 = complex(theta_alpha(b, 0.0, n, s))
        tbn = complex(theta(b / n, s))
        for name, val in ((f"theta_{b}(0)", tb0), (f"theta({b}/n)", tbn)):
            if abs(val) < guard:
                raise PoleProximityError(name, val)
        den *= tb0 * tbn
    lhs = theta(n * np.asarray(z, dtype=complex), s)
    rhs = n * np.prod(theta_alpha_all(z, n, s), axis=-1) * E(-n * (n - 1) / 2 * np.asarray(z)) / den
    return np.abs(lhs - rhs)


def quasi_periodicity_residual_1d(f, n: int, c: complex, z, tau: complex):
    """Residual of ``f`` against the laws defining ``Theta_{n,c}``.

    ``max(|f(z+1) - f(z)|, |f(z+tau) - (-1)^n E(-(n z - c)) f(z)|)``
    """
    z = np.asarray(z, dtype=complex)
    fz = f(z)
    r1 = np.abs(f(z + 1) - fz)
    r2 = np.abs(f(z + tau) - (-1) ** n * E(-(n * z - c)) * fz)
    return np.maximum(r1, r2)
