"""Negative-regular continued fractions and their tridiagonal determinants.

A coprime pair ``1 <= k < n`` has a unique expansion

    n/k = n_1 - 1/(n_2 - 1/(... - 1/n_p)),   n_j >= 2,

and ``d(n_1, ..., n_p)``, the determinant of the tridiagonal matrix with
diagonal ``n_j`` and off-diagonal ``-1``, recovers ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence

from .errors import InternalCheckError, InvalidInputError

#: Largest ``n`` accepted by default.  Keeps every determinant far inside
#: machine integer range even though Python ints would not overflow.
N_MAX = 64


def det_d(terms: Sequence[int]) -> int:
    """Tridiagonal determinant ``d(terms)``, with ``d(()) = 1``.

    Uses the recursion ``d(n_1..n_q) = n_1 d(n_2..n_q) - d(n_3..n_q)``.

    Examples
    --------
    >>> det_d([3, 2]), det_d([3, 2, 2]), det_d([])
    (5, 7, 1)
    """
    a, b = 1, 0  # d of the current tail, d of the tail one shorter
    for m in reversed(terms):
        a, b = int(m) * a - b, a
    return a


@dataclass(frozen=True)
class CFrac:
    """The expansion ``(n_1, ..., n_p)`` of ``n/k``.

    Attributes
    ----------
    n, k : int
        Coprime, ``1 <= k < n``.
    terms : tuple of int
        Each entry at least 2.
    """

    n: int
    k: int
    terms: tuple[int, ...]

    def __post_init__(self):
        if gcd(self.n, self.k) != 1 or not 1 <= self.k < self.n:
            raise InvalidInputError(f"need coprime 1 <= k < n, got n={self.n}, k={self.k}")
        if any(t < 2 for t in self.terms):
            raise InvalidInputError(f"terms must be >= 2: {self.terms}")
        if det_d(self.terms) != self.n or det_d(self.terms[1:]) != self.k:
            raise InvalidInputError(f"{self.terms} is not the expansion of {self.n}/{self.k}")

    @property
    def p(self) -> int:
        return len(self.terms)

    def tail_det(self, j: int) -> int:
        """``d(n_{j+1}, ..., n_p)`` for 0-based ``j`` (so ``j = p-1`` gives 1)."""
        return det_d(self.terms[j + 1:])

    def head_det(self, j: int) -> int:
        """``d(n_1, ..., n_{j-1})`` for 1-based ``j``, i.e. ``terms[:j-1]``."""
        return det_d(self.terms[: j - 1])

    @property
    def kprime(self) -> int:
        """``k' = d(n_1, ..., n_{p-1})``; the inverse of ``k`` modulo ``n``."""
        return det_d(self.terms[:-1])


def _check_pair(n: int, k: int, n_max: int) -> None:
    if not (isinstance(n, int) and isinstance(k, int)):
        raise InvalidInputError("n and k must be integers")
    if n < 2 or n > n_max:
        raise InvalidInputError(f"n must lie in [2, {n_max}], got {n}")
    if not 1 <= k < n:
        raise InvalidInputError(f"k must satisfy 1 <= k < n, got k={k}")
    if gcd(n, k) != 1:
        raise InvalidInputError(f"n={n} and k={k} are not coprime")


def expand(n: int, k: int, n_max: int = N_MAX) -> CFrac:
    """Expand ``n/k`` into its negative-regular continued fraction.

    Greedy ceiling division: ``n_1 = ceil(n/k)`` and the remainder
    ``k/(n_1 k - n)`` is expanded in turn.

    Examples
    --------
    >>> expand(5, 2).terms
    (3, 2)
    >>> expand(7, 3).terms
    (3, 2, 2)
    """
    _check_pair(n, k, n_max)
    terms = []
    a, b = n, k
    while b:
        c = -(-a // b)
        terms.append(c)
        a, b = b, c * b - a
    return CFrac(n, k, tuple(terms))


def _partial_sums(terms):
    s = [0]
    for t in terms:
        s.append(s[-1] + t)
    return s


def block_shape(terms: Sequence[int]) -> tuple[int, ...]:
    """Predicted dual expansion built from blocks of twos.

    For ``p > 1`` the dual is ``(2^(n_1-2), 3, 2^(n_2-3), 3, ..., 3, 2^(n_p-2))``;
    a block ``2^(-1)`` between ``m_1`` and ``m_2`` collapses to the single entry
    ``m_1 + m_2 - 2``.  For ``p = 1`` it is ``n - 1`` twos.
    """
    p = len(terms)
    if p == 1:
        return (2,) * (terms[0] - 1)
    tokens: list = [2] * (terms[0] - 2)
    for t in terms[1:-1]:
        tokens.append(3)
        tokens.extend([2] * (t - 3) if t >= 3 else [None])
    tokens.append(3)
    tokens.extend([2] * (terms[-1] - 2))
    out: list[int] = []
    it = iter(tokens)
    for tok in it:
        if tok is None:
            out.append(out.pop() + next(it) - 2)
        else:
            out.append(tok)
    return tuple(out)


def dual_relations(c: CFrac, cd: CFrac) -> dict[str, bool]:
    """Evaluate the arithmetic relations between an expansion and its dual."""
    t, td = c.terms, cd.terms
    p, pd = len(t), len(td)
    s, sd = _partial_sums(t), _partial_sums(td)
    partial_ok = True
    for beta in range(p):
        for alpha in range(s[beta] - 2 * beta + 1, s[beta + 1] - 2 * beta - 1):
            if not 1 <= alpha <= pd or sd[alpha] != 2 * alpha + beta:
                partial_ok = False
    return {
        "length": pd == s[-1] - 2 * p + 1,
        "sum": sd[-1] == 2 * s[-1] - 3 * p + 1,
        "partial_sums": partial_ok,
        "shape": block_shape(t) == td,
    }


def dual(c: CFrac) -> CFrac:
    """Expansion of ``n/(n-k)``, with its relations to ``c`` asserted.

    Raises
    ------
    InternalCheckError
        If any of the length, sum, partial-sum or block-shape relations fails.
    """
    cd = expand(c.n, c.n - c.k, n_max=max(N_MAX, c.n))
    bad = [name for name, ok in dual_relations(c, cd).items() if not ok]
    if bad:
        raise InternalCheckError(f"dual relations failed for {c.terms}: {bad}")
    return cd


@dataclass(frozen=True)
class HomConstants:
    """Shift constants of the two homomorphisms.

    The spectral shifts ``nu`` and ``gamma`` are integer coefficients of the
    spectral parameter ``u``.  The dynamical shifts ``lam`` and ``mu_prime``
    are integer multiples of ``eta`` and are stored already multiplied.

    Attributes
    ----------
    mu : complex
        ``n * eta``.
    nu : tuple of int
        ``d(n_{j+1}, ..., n_p)``.  These also serve as the ``m_j`` of the
        master identity.
    lam : tuple of complex
        ``d(n_1, ..., n_{j-1}) * eta``, also the ``l_j`` of the master identity.
    mu_prime : tuple of complex
        ``d(n'_1, ..., n'_{j-1}) * eta`` for the dual expansion.
    gamma : tuple of int
        ``-d(n'_{j+1}, ..., n'_{p'})``.
    """

    eta: complex
    mu: complex
    nu: tuple[int, ...]
    lam: tuple[complex, ...]
    mu_prime: tuple[complex, ...]
    gamma: tuple[int, ...]


def hom_constants(c: CFrac, eta: complex) -> HomConstants:
    """Shift constants for ``c`` and its dual at ``eta``.

    Examples
    --------
    >>> h = hom_constants(expand(5, 2), 1.0)
    >>> h.nu, h.lam, h.mu
    ((2, 1), ((1+0j), (3+0j)), (5+0j))
    """
    eta = complex(eta)
    cd = dual(c)
    t, td = c.terms, cd.terms
    return HomConstants(
        eta=eta,
        mu=c.n * eta,
        nu=tuple(det_d(t[j + 1:]) for j in range(len(t))),
        lam=tuple(det_d(t[:j]) * eta for j in range(len(t))),
        mu_prime=tuple(det_d(td[:j]) * eta for j in range(len(td))),
        gamma=tuple(-det_d(td[j + 1:]) for j in range(len(td))),
    )
