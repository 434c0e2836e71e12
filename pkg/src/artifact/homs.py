"""Dynamical and polyspectral exchange algebras and the two homomorphisms.

The algebra ``X`` has generators ``e_A(u)`` labelled by index tuples
``A = (A_1, ..., A_p)`` and commuting dynamical variables ``y[a, j]``.  Moving
``e_A`` past ``y[b, j]`` shifts it by ``lam_j`` (``b != A_j``) or
``lam_j - mu`` (``b == A_j``); that action is realised here only through the
argument shifts of the structure functions.

Two homomorphisms out of the exchange algebra of the R-matrix are certified
by evaluating the coefficient ``psi`` of every ordered monomial after the
relations have been applied, and checking that it vanishes:

* ``Phi(x_a(u)) = sum_A w_a(y_A + nu u) e_A(n u)`` into ``X``,
* ``Psi(e(u, z)) = sum_a x_{1-a}(u) w'_a(z + gamma u)`` from ``Y``.

Coefficients always stand to the left of the generators.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .cfrac import CFrac, HomConstants, dual, hom_constants
from .duality import DualityPair
from .errors import InvalidInputError
from .numerics import POLE_GUARD, guard, rel_residual
from .rmatrix import RMatrixSpec, r_entries, relation8_prefactor, ybe_residual_tensors
from .theta1 import DegenerationMode, E, Lattice, ThetaSeries, theta, theta_alpha
from .thetap import WBasis


# ---------------------------------------------------------------- specs

@dataclass(frozen=True)
class XAlgebraSpec:
    """Parameters of the dynamical algebra ``X_p^{m_1..m_p}(mu; lam_1..lam_p)``."""

    cfrac: CFrac
    lattice: Lattice
    m: tuple[int, ...]
    mu: complex
    lam: tuple[complex, ...]
    series: ThetaSeries = None

    def __post_init__(self):
        p = self.cfrac.p
        object.__setattr__(self, "m", tuple(int(x) for x in self.m))
        object.__setattr__(self, "lam", tuple(complex(x) for x in self.lam))
        if len(self.m) != p or len(self.lam) != p:
            raise InvalidInputError(f"m and lam need length p={p}")
        if any(x < 1 for x in self.m):
            raise InvalidInputError("every m_j must be positive")
        if self.series is None:
            object.__setattr__(self, "series", ThetaSeries(self.lattice))

    @property
    def p(self) -> int:
        return self.cfrac.p

    @classmethod
    def from_cfrac(cls, cfrac: CFrac, lattice: Lattice, eta, m=None, series=None):
        """The target of ``Phi``: ``mu = n eta`` and ``lam`` from :func:`hom_constants`."""
        h = hom_constants(cfrac, eta)
        m = (2,) * cfrac.p if m is None else m
        return cls(cfrac, lattice, m, h.mu, h.lam, series)


@dataclass(frozen=True)
class YAlgebraSpec:
    """Parameters of the polyspectral algebra ``Y_{p'}(mu; mu_1..mu_{p'})``."""

    dual_cfrac: CFrac
    lattice: Lattice
    mu: complex
    mu_prime: tuple[complex, ...]
    series: ThetaSeries = None

    def __post_init__(self):
        object.__setattr__(self, "mu_prime", tuple(complex(x) for x in self.mu_prime))
        if len(self.mu_prime) != self.dual_cfrac.p:
            raise InvalidInputError(f"mu_prime needs length p'={self.dual_cfrac.p}")
        if self.series is None:
            object.__setattr__(self, "series", ThetaSeries(self.lattice))

    @property
    def p(self) -> int:
        return self.dual_cfrac.p

    @classmethod
    def from_cfrac(cls, cfrac: CFrac, lattice: Lattice, eta, series=None):
        """The source of ``Psi`` for ``n/k``: built on the expansion of ``n/(n-k)``."""
        h = hom_constants(cfrac, eta)
        return cls(dual(cfrac), lattice, h.mu, h.mu_prime, series)


@dataclass(frozen=True)
class SamplePoint:
    """Spectral parameters plus either a dynamical table or two vectors.

    For ``X``: ``y`` has shape ``(max m_j, p)`` and ``a_idx``, ``b_idx`` are
    the index tuples.  For ``Y``: ``u_vec``, ``v_vec`` are the auxiliary
    arguments of ``e(u, u_1, ...)`` and ``e(v, v_1, ...)``.
    """

    u: complex
    v: complex
    y: np.ndarray = None
    a_idx: tuple = ()
    b_idx: tuple = ()
    u_vec: np.ndarray = None
    v_vec: np.ndarray = None

    def y_of(self, idx) -> np.ndarray:
        return self.y[list(idx), np.arange(len(idx))]

    def with_indices(self, a_idx, b_idx) -> "SamplePoint":
        return SamplePoint(self.u, self.v, self.y, tuple(a_idx), tuple(b_idx), self.u_vec, self.v_vec)


# ------------------------------------------------------- index patterns

@dataclass(frozen=True)
class Pattern:
    """Equality pattern of two index tuples (positions are 1-based)."""

    equal: tuple[bool, ...]

    @property
    def p(self):
        return len(self.equal)

    @property
    def nu(self) -> int | None:
        """First position with ``A_j == B_j``, or None."""
        for j, e in enumerate(self.equal):
            if e:
                return j + 1
        return None

    @property
    def interior(self) -> tuple[int, int] | None:
        """First ``(nu, lam)`` with equal ends, differing strictly inside, ``lam >= nu + 2``."""
        eq = list(self.equal) + [True]
        for nu in range(1, self.p):
            if not eq[nu - 1]:
                continue
            lam = nu + 1
            while not eq[lam - 1]:
                lam += 1
            if lam >= nu + 2:
                return nu, lam
        return None

    @property
    def kind(self) -> str:
        if self.nu is None:
            return "general"
        return "interior" if self.interior is not None else "leading"


def classify_pattern(a_idx, b_idx) -> Pattern:
    if len(a_idx) != len(b_idx):
        raise InvalidInputError("index tuples differ in length")
    return Pattern(tuple(int(a) == int(b) for a, b in zip(a_idx, b_idx)))


def _swap(a_idx, b_idx, positions):
    """Exchange the entries of two tuples at the given 0-based positions."""
    a, b = list(a_idx), list(b_idx)
    for j in positions:
        a[j], b[j] = b_idx[j], a_idx[j]
    return tuple(a), tuple(b)


# --------------------------------------------------- X structure functions

@dataclass
class Relation:
    """``prefactor * e_A(first) e_B(second) = sum coef * e_C(v) e_D(u)``.

    ``order`` is ``"uv"`` when the left side is ``e_A(u) e_B(v)`` and
    ``"vu"`` when it is ``e_A(v) e_B(u)`` (the interior family).
    """

    family: str
    order: str
    prefactor: complex
    terms: list = field(default_factory=list)  # (coef, C, D)

    @property
    def coeffs(self) -> list[complex]:
        return [c for c, _, _ in self.terms]


def _chain(mu, d1, d2, s, tol=POLE_GUARD):
    return theta(mu, s) * theta(d1 + d2, s) / (guard(theta(d1, s), "theta(y_t)", tol)
                                               * guard(theta(d2, s), "theta(y_t+1)", tol))


def _last(mu, d, s, tol=POLE_GUARD):
    return theta(d + mu, s) / guard(theta(d, s), "theta(y_last)", tol)


def x_coeffs(spec: XAlgebraSpec, s: SamplePoint, family: str = "auto",
             interior_reading: str = "printed", tol: float = POLE_GUARD) -> Relation:
    """Right-hand side of the exchange relation for the pattern of ``s``.

    Parameters
    ----------
    family : {"auto", "interior"}
        ``auto`` returns the relation for ``e_A(u) e_B(v)`` (general
        position, or leading block equal).  ``interior`` returns the
        relation between two ``v u`` ordered monomials, which exists when
        an equal position is followed by a block of differences.
    interior_reading : {"printed", "corrected"}
        For the interior family with ``p = 2``, ``corrected`` replaces the
        coefficient ``theta(x + mu)/theta(x)`` by
        ``E(-mu) theta(x + mu)/theta(x - mu)``, the value forced by the
        homomorphism.
    tol : float
        Pole guard for the ``theta`` denominators.

    Raises
    ------
    InvalidInputError
        If the requested family does not match the index pattern.
    PoleProximityError
    """
    A, B = s.a_idx, s.b_idx
    pat = classify_pattern(A, B)
    p, mu, th = pat.p, spec.mu, spec.series
    for j, (a, b) in enumerate(zip(A, B)):
        if not (0 <= a < spec.m[j] and 0 <= b < spec.m[j]):
            raise InvalidInputError(f"index out of range at position {j + 1}")
    dy = s.y_of(A) - s.y_of(B)
    x = complex(s.v) - complex(s.u)

    if family == "interior":
        if pat.interior is None:
            raise InvalidInputError(f"pattern {pat.equal} has no interior equal block")
        nu, lam = pat.interior
        terms = []
        # positions nu+1..t (1-based) move between the two factors
        for t in range(nu + 1, lam - 1):
            C, D = _swap(A, B, range(nu, t))
            terms.append((complex(_chain(mu, dy[t - 1], dy[t], th, tol)), C, D))
        C, D = _swap(A, B, range(nu, lam - 1))
        d = dy[lam - 2]
        if interior_reading == "corrected":
            if p != 2:
                raise InvalidInputError("corrected interior coefficient is only established for p = 2")
            coef = E(-mu) * theta(d + mu, th) / guard(theta(d - mu, th), "theta(x-mu)")
        elif interior_reading == "printed":
            coef = _last(mu, d, th)
        else:
            raise InvalidInputError(f"unknown interior reading {interior_reading!r}")
        terms.append((complex(coef), C, D))
        return Relation("interior", "vu", 1.0 + 0j, terms)
    if family != "auto":
        raise InvalidInputError(f"unknown family {family!r}")

    nu = pat.nu
    if nu == 1:
        return Relation("leading", "uv", 1.0 + 0j, [(1.0 + 0j, A, B)])
    top = p if nu is None else nu - 1  # positions 1..top are all different
    pre = theta(x + mu, th) / guard(theta(x, th), "theta(v-u)")
    terms = [(complex(theta(mu, th) * theta(x + dy[0], th)
                      / (theta(x, th) * guard(theta(dy[0], th), "theta(y_1)", tol))), A, B)]
    for t in range(1, top):
        C, D = _swap(A, B, range(t))
        terms.append((complex(_chain(mu, dy[t - 1], dy[t], th, tol)), C, D))
    C, D = _swap(A, B, range(top))
    terms.append((complex(_last(mu, dy[top - 1], th, tol)), C, D))
    return Relation("general" if nu is None else "leading", "uv", complex(pre), terms)


def y_coeffs(spec: YAlgebraSpec, s: SamplePoint) -> Relation:
    """Coefficients of the defining relation of ``Y`` at ``(u, u_vec), (v, v_vec)``.

    The left side is ``theta(v-u+mu)/theta(v-u) e(u, u_vec) e(v, v_vec + mu')``.
    Terms are ``(coef, first, second)`` for
    ``e(v, first) e(u, second + mu')``.
    """
    uu, vv = np.asarray(s.u_vec, dtype=complex), np.asarray(s.v_vec, dtype=complex)
    p, mu, th = spec.p, spec.mu, spec.series
    if len(uu) != p or len(vv) != p:
        raise InvalidInputError(f"u_vec and v_vec need length p'={p}")
    x = complex(s.v) - complex(s.u)
    pre = theta(x + mu, th) / guard(theta(x, th), "theta(v-u)")
    terms = [(complex(theta(mu, th) * theta(x + uu[0] - vv[0], th)
                      / (theta(x, th) * guard(theta(uu[0] - vv[0], th), "theta(u_1-v_1)"))), uu, vv)]
    for t in range(1, p):
        first = np.concatenate([vv[:t], uu[t:]])
        second = np.concatenate([uu[:t], vv[t:]])
        terms.append((complex(_chain(mu, vv[t - 1] - uu[t - 1], uu[t] - vv[t], th)), first, second))
    terms.append((complex(_last(mu, vv[-1] - uu[-1], th)), vv, uu))
    return Relation("general", "uv", complex(pre), terms)


# ------------------------------------------------------- master identity

def _tail_shifts(c: CFrac, eta):
    h = hom_constants(c, eta)
    return np.array(h.nu, dtype=float), np.array(h.lam)


def _r_ratio(rt: np.ndarray, a: int, b: int, r: int) -> complex:
    """``theta_{b-a+r(k-1)}(v-u+eta) / (theta_{kr}(eta) theta_{b-a-r}(v-u))``."""
    n = rt.shape[0]
    return rt[a % n, b % n, (a + r) % n, (b - r) % n]


def identity2_sides(wb: WBasis, eta, u, v, y, z, alpha: int, beta: int,
                    series: ThetaSeries | None = None) -> tuple[complex, complex]:
    """Both sides of the master identity relating ``w`` and ``theta_a``.

    Left: the ``(p+1)``-term sum of theta-ratio weighted products
    ``w_alpha(. + m u) w_beta(. + m v + l)`` with the arguments ``y`` and
    ``z`` exchanged blockwise.  Right: ``prod theta(b/n) / n`` times the
    ``r``-sum of R-matrix ratios times ``w_{beta-r}(y + m v) w_{alpha+r}(z + m u + l)``.
    """
    c = wb.space.cfrac
    n, p = c.n, c.p
    s = ThetaSeries(wb.space.lattice) if series is None else series
    m, l = _tail_shifts(c, eta)
    y, z = np.asarray(y, dtype=complex), np.asarray(z, dtype=complex)
    x = n * (complex(v) - complex(u))
    d = y - z
    ne = n * complex(eta)
    lhs = (theta(x + d[0], s) / (guard(theta(x, s), "theta(nv-nu)") * guard(theta(d[0], s), "theta(y_1-z_1)"))
           * wb.w(alpha, y + m * u) * wb.w(beta, z + m * v + l))
    for t in range(1, p):
        a1 = np.concatenate([z[:t], y[t:]])
        b1 = np.concatenate([y[:t], z[t:]])
        lhs = lhs + (theta(-d[t - 1] + d[t], s) / (guard(theta(-d[t - 1], s), "theta(z_t-y_t)")
                                                   * guard(theta(d[t], s), "theta(y_t+1-z_t+1)"))
                     * wb.w(alpha, a1 + m * u) * wb.w(beta, b1 + m * v + l))
    lhs = lhs + (theta(-d[-1] + ne, s) / (guard(theta(-d[-1], s), "theta(z_p-y_p)") * guard(theta(ne, s), "theta(n eta)"))
                 * wb.w(alpha, z + m * u) * wb.w(beta, y + m * v + l))
    rt = r_entries(RMatrixSpec(n, c.k, wb.space.lattice, eta, s), u, v)
    rhs = sum(_r_ratio(rt, alpha, beta, r) * wb.w(beta - r, y + m * v) * wb.w(alpha + r, z + m * u + l)
              for r in range(n))
    rhs = rhs * np.prod([theta(b / n, s) for b in range(1, n)]) / n
    return complex(lhs), complex(rhs)


def identity2_residual(wb: WBasis, eta, u, v, y, z, alpha: int, beta: int,
                       series: ThetaSeries | None = None) -> float:
    """``rel_residual`` of the master identity at one point."""
    return float(rel_residual(*identity2_sides(wb, eta, u, v, y, z, alpha, beta, series)))


# ------------------------------------------------------- Phi certification

@dataclass
class PhiContext:
    """Everything needed to evaluate ``psi`` for ``Phi`` at a given ``eta``."""

    xspec: XAlgebraSpec
    rspec: RMatrixSpec
    wb: WBasis
    consts: HomConstants

    @classmethod
    def build(cls, cfrac: CFrac, lattice: Lattice, eta, wb: WBasis | None = None, m=None,
              series: ThetaSeries | None = None):
        from .thetap import MultiThetaSpace
        series = ThetaSeries(lattice) if series is None else series
        wb = WBasis(MultiThetaSpace(cfrac, lattice)) if wb is None else wb
        return cls(XAlgebraSpec.from_cfrac(cfrac, lattice, eta, m, series),
                   RMatrixSpec(cfrac.n, cfrac.k, lattice, eta, series), wb,
                   hom_constants(cfrac, eta))


def phi_psi(ctx: PhiContext, s: SamplePoint, alpha: int, beta: int, reading: str = "corrected",
            lam=None) -> tuple[complex, float]:
    """Coefficient of ``e_A(nv) e_B(nu)`` in the image of the R-matrix relation.

    Every ordered pair ``(A', B')`` obtained from ``(A, B)`` by exchanging
    entries contributes through its ``u v -> v u`` relation.  ``reading``
    selects ``corrected`` (integer ``nu_j`` and prefactor
    ``P theta(nv-nu) / theta(nv-nu+n eta)``) or ``printed`` (``nu_j eta`` and
    the reciprocal prefactor).  ``lam`` overrides the dynamical shifts.

    Returns
    -------
    (psi, scale)
        ``scale`` is the largest single term, at least 1.
    """
    xs, h = ctx.xspec, ctx.consts
    n = ctx.rspec.n
    A, B = s.a_idx, s.b_idx
    pat = classify_pattern(A, B)
    nu = np.array(h.nu, dtype=float)
    if reading == "printed":
        nu = nu * h.eta
    elif reading != "corrected":
        raise InvalidInputError(f"unknown reading {reading!r}")
    lam = np.array(xs.lam if lam is None else lam, dtype=complex)
    sh = lam - xs.mu * np.array(pat.equal, dtype=float)
    u, v = complex(s.u), complex(s.v)
    U, V = n * u, n * v
    P = relation8_prefactor(ctx.rspec, u, v)
    w = ctx.wb.w
    target = (tuple(A), tuple(B))
    cands = {_swap(A, B, pos) for r in range(xs.p + 1) for pos in itertools.combinations(range(xs.p), r)}
    lhs_terms = []
    for A1, B1 in sorted(cands):
        rel = x_coeffs(xs, SamplePoint(U, V, s.y, A1, B1))
        pre = rel.prefactor if reading == "corrected" else 1 / rel.prefactor
        for coef, C, D in rel.terms:
            if (C, D) == target:
                lhs_terms.append(P / pre * coef * complex(w(alpha, s.y_of(A1) + nu * u))
                                 * complex(w(beta, s.y_of(B1) + nu * v + sh)))
    rt = r_entries(ctx.rspec, u, v)
    yA, yB = s.y_of(A), s.y_of(B)
    rhs_terms = [_r_ratio(rt, alpha, beta, r) * complex(w(beta - r, yA + nu * v))
                 * complex(w(alpha + r, yB + nu * u + sh)) for r in range(n)]
    psi = sum(lhs_terms) - sum(rhs_terms)
    scale = max([1.0] + [abs(t) for t in lhs_terms + rhs_terms])
    return complex(psi), float(scale)


def phi_residual(ctx: PhiContext, s: SamplePoint, alpha: int, beta: int, reading: str = "corrected",
                 interior_reading: str = "printed", lam=None) -> float:
    """Normalised ``|psi|`` for ``Phi`` at one sample.

    For an interior pattern the individual ``psi`` need not vanish: the
    interior relation ``e_A(v) e_B(u) = C e_{A'}(v) e_{B'}(u)`` identifies two
    monomials, and the residual is that of ``C psi_{A,B} + psi_{A',B'} = 0``
    (``p = 2`` only).
    """
    pat = classify_pattern(s.a_idx, s.b_idx)
    if pat.kind != "interior":
        psi, scale = phi_psi(ctx, s, alpha, beta, reading, lam)
        return abs(psi) / scale
    if pat.p != 2:
        raise InvalidInputError("interior patterns are only certified for p = 2")
    n = ctx.rspec.n
    rel = x_coeffs(ctx.xspec, SamplePoint(n * s.u, n * s.v, s.y, s.a_idx, s.b_idx),
                   family="interior", interior_reading=interior_reading)
    (coef, C, D), = rel.terms
    p1, s1 = phi_psi(ctx, s, alpha, beta, reading, lam)
    p2, s2 = phi_psi(ctx, s.with_indices(C, D), alpha, beta, reading, lam)
    return abs(coef * p1 + p2) / max(abs(coef) * s1, s2)


def interior_ratio(ctx: PhiContext, s: SamplePoint, alpha: int = 0, beta: int = 1) -> tuple[complex, complex]:
    """Ratio ``-psi_{A',B'} / psi_{A,B}`` forced on the interior coefficient, and the corrected formula."""
    n = ctx.rspec.n
    rel = x_coeffs(ctx.xspec, SamplePoint(n * s.u, n * s.v, s.y, s.a_idx, s.b_idx),
                   family="interior", interior_reading="corrected")
    (coef, C, D), = rel.terms
    p1, _ = phi_psi(ctx, s, alpha, beta)
    p2, _ = phi_psi(ctx, s.with_indices(C, D), alpha, beta)
    return -p2 / p1, coef


def case_consistency(spec: XAlgebraSpec, s: SamplePoint, eps=(1e-3, 1e-4, 1e-5, 1e-6),
                     blowup: float = 100.0) -> dict:
    """Compare a leading-equal relation with the general-position one near the pattern.

    The variable ``y[B_nu, nu]`` is replaced by a fresh value
    ``y[A_nu, nu] + eps`` (a separate index, so the pattern is general), and
    the general coefficients are matched term by term to the degenerate
    ones through the monomial they multiply once the index is identified.
    Terms whose general coefficient grows by more than ``blowup`` along the
    sequence have no finite limit and are skipped.
    """
    pat = classify_pattern(s.a_idx, s.b_idx)
    if pat.kind != "leading" or pat.nu == 1:
        raise InvalidInputError("case consistency needs a leading-equal pattern with nu > 1")
    if any(pat.equal[pat.nu:]):
        raise InvalidInputError("positions after nu must all differ")
    j = pat.nu - 1
    a_j = s.a_idx[j]
    fresh = spec.m[j]
    spec_g = XAlgebraSpec(spec.cfrac, spec.lattice, tuple(mm + (i == j) for i, mm in enumerate(spec.m)),
                          spec.mu, spec.lam, spec.series)
    deg = x_coeffs(spec, s)
    B = list(s.b_idx)
    B[j] = fresh
    B = tuple(B)

    def ident(idx):
        return tuple(a_j if (i == j and x == fresh) else x for i, x in enumerate(idx))

    seq = []
    for e in eps:
        y = np.vstack([s.y, np.zeros((1, s.y.shape[1]), dtype=complex)])
        y[fresh, j] = s.y[a_j, j] + e
        rel = x_coeffs(spec_g, SamplePoint(s.u, s.v, y, s.a_idx, B), tol=0.0)
        merged = {"pre": rel.prefactor}
        for c, C, D in rel.terms:
            key = (ident(C), ident(D))
            merged[key] = merged.get(key, 0j) + c
        seq.append(merged)
    compared, skipped, worst = [], [], 0.0
    for coef, C, D in deg.terms:
        key = (C, D)
        vals = [sq.get(key) for sq in seq]
        if any(v is None for v in vals) or abs(vals[-1]) > blowup * max(1.0, abs(vals[0])):
            skipped.append(key)
            continue
        compared.append(key)
        worst = max(worst, abs(vals[-1] - coef) / max(1.0, abs(coef)))
    worst = max(worst, abs(seq[-1]["pre"] - deg.prefactor) / max(1.0, abs(deg.prefactor)))
    return {"compared": compared, "skipped": skipped, "max_deviation": worst}


# ------------------------------------------------------- Psi certification

@dataclass
class PsiContext:
    yspec: YAlgebraSpec
    rspec: RMatrixSpec
    wd: WBasis
    consts: HomConstants

    @classmethod
    def build(cls, cfrac: CFrac, lattice: Lattice, eta, wd: WBasis | None = None,
              series: ThetaSeries | None = None):
        from .thetap import MultiThetaSpace
        series = ThetaSeries(lattice) if series is None else series
        ys = YAlgebraSpec.from_cfrac(cfrac, lattice, eta, series)
        wd = WBasis(MultiThetaSpace(ys.dual_cfrac, lattice)) if wd is None else wd
        return cls(ys, RMatrixSpec(cfrac.n, cfrac.k, lattice, eta, series), wd, hom_constants(cfrac, eta))


def psi_psi(ctx: PsiContext, s: SamplePoint, g: int, d: int, reading: str = "corrected",
            gamma=None) -> tuple[complex, float]:
    """Coefficient of ``x_{1-g}(v) x_{1-d}(u)`` in the image of the ``Y`` relation, times ``P``.

    ``reading="printed"`` uses ``theta_{kr}(eta)`` in the ``r``-sum instead
    of ``theta_{-kr}(eta)``.
    """
    ys, h, rs = ctx.yspec, ctx.consts, ctx.rspec
    n, k, th = rs.n, rs.k, ys.series
    if reading not in ("corrected", "printed"):
        raise InvalidInputError(f"unknown reading {reading!r}")
    sgn = -1 if reading == "corrected" else 1
    gam = np.array(h.gamma if gamma is None else gamma, dtype=float)
    mup = np.array(ys.mu_prime)
    u, v = complex(s.u), complex(s.v)
    uu, vv = np.asarray(s.u_vec, dtype=complex), np.asarray(s.v_vec, dtype=complex)
    w = ctx.wd.w
    rel = y_coeffs(ys, SamplePoint(n * u, n * v, u_vec=uu, v_vec=vv))
    te = rs._theta_eta
    x = v - u
    rsum = []
    for r in range(n):
        num = theta_alpha(d - g - r * (k + 1), x + rs.eta, n, th)
        den = te[(sgn * k * r) % n] * guard(theta_alpha(d - g - r, x, n, th), "theta_a(v-u)")
        rsum.append(rel.prefactor * complex(w(d - r, uu + gam * u) * w(g + r, vv + mup + gam * v) * num / den))
    P = relation8_prefactor(rs, u, v)
    bracket = [P * coef * complex(w(g, C + gam * v) * w(d, D + mup + gam * u)) for coef, C, D in rel.terms]
    psi = sum(rsum) - sum(bracket)
    return complex(psi), float(max([1.0] + [abs(t) for t in rsum + bracket]))


def psi_residual(ctx: PsiContext, s: SamplePoint, g: int, d: int, reading: str = "corrected",
                 gamma=None) -> float:
    """Normalised ``|psi_{g,d}|`` for ``Psi`` at one sample."""
    psi, scale = psi_psi(ctx, s, g, d, reading, gamma)
    return abs(psi) / scale


# ----------------------------------------------------------- composition

def composition_sides(pair: DualityPair, eta, y_a: np.ndarray, u, z: np.ndarray,
                      c: complex | None = None) -> tuple[complex, complex]:
    """Coefficient of ``e_A(nu)`` in ``Phi(Psi(e(nu, z)))``, two ways.

    ``pair`` must be built for ``n/(n-k)`` so that its primal space is the
    one of ``Psi`` and its dual (built on ``n/k`` and root aligned) the one of
    ``Phi``.  (a) is ``sum_a w_{1-a}(y_A + nu u) w'_a(z + gamma u)`` summed
    directly; (b) is ``Delta(z + gamma u; y_A + nu u) / c``, taken as 0 when
    ``c == 0``.
    """
    n = pair.n
    c_phi = pair.dual_cfrac  # expansion of n/k
    h = hom_constants(c_phi, eta)
    Y = np.asarray(y_a, dtype=complex) + np.array(h.nu, dtype=float) * u
    Z = np.asarray(z, dtype=complex) + np.array(h.gamma, dtype=float) * u
    a = sum(complex(pair.dual.w(1 - al, Y) * pair.primal.w(al, Z)) for al in range(n))
    c = pair.c if c is None else c
    b = complex(pair.delta(Z, Y)) / c if c != 0 else 0j
    return a, b


def composition_check(pair: DualityPair, eta, y_a, u, z, c: complex | None = None) -> float:
    """``rel_residual`` between the two sides of :func:`composition_sides`."""
    return float(rel_residual(*composition_sides(pair, eta, y_a, u, z, c)))


# ---------------------------------------------------------- degenerations

def monomial_exponents(c: CFrac) -> list[tuple[int, ...]]:
    """Exponent tuples ``a`` with ``0 <= a_j < n_j``, in lexicographic order."""
    return list(itertools.product(*[range(t) for t in c.terms]))


def _kernel(mode: DegenerationMode):
    if mode is DegenerationMode.TRIGONOMETRIC:
        return (lambda x: 1 - E(x)), (lambda x: E(x))
    if mode is DegenerationMode.RATIONAL:
        return (lambda x: np.asarray(x, dtype=complex)), (lambda x: np.asarray(x, dtype=complex))
    raise InvalidInputError("degenerations are trigonometric or rational")


@dataclass
class DegenerateModel:
    """Master-identity left side with the degenerate kernel and monomial basis."""

    cfrac: CFrac
    eta: complex
    mode: DegenerationMode

    def __post_init__(self):
        self.mode = DegenerationMode(self.mode)
        self.th, self.tv = _kernel(self.mode)
        self.mons = np.array(monomial_exponents(self.cfrac))
        self.m, self.l = _tail_shifts(self.cfrac, self.eta)

    @property
    def dim(self) -> int:
        return len(self.mons)

    def basis(self, z) -> np.ndarray:
        """All monomials ``prod t_j^{a_j}`` at ``z`` of shape ``(..., p)``; last axis the monomial."""
        t = self.tv(np.asarray(z, dtype=complex))
        return np.prod(t[..., None, :] ** self.mons, axis=-1)

    def lhs(self, u, v, y, z) -> np.ndarray:
        """Left side for every pair of basis monomials, shape ``(D, D)``."""
        th, m, l = self.th, self.m, self.l
        n, p = self.cfrac.n, self.cfrac.p
        y, z = np.asarray(y, dtype=complex), np.asarray(z, dtype=complex)
        x = n * (v - u)
        d = y - z
        out = (th(x + d[0]) / (guard(th(x), "kernel(nv-nu)") * guard(th(d[0]), "kernel(y_1-z_1)"))
               * np.multiply.outer(self.basis(y + m * u), self.basis(z + m * v + l)))
        for t in range(1, p):
            a1 = np.concatenate([z[:t], y[t:]])
            b1 = np.concatenate([y[:t], z[t:]])
            out = out + (th(-d[t - 1] + d[t]) / (guard(th(-d[t - 1]), "kernel") * guard(th(d[t]), "kernel"))
                         * np.multiply.outer(self.basis(a1 + m * u), self.basis(b1 + m * v + l)))
        ne = n * self.eta
        out = out + (th(-d[-1] + ne) / (guard(th(-d[-1]), "kernel") * guard(th(ne), "kernel(n eta)"))
                     * np.multiply.outer(self.basis(z + m * u), self.basis(y + m * v + l)))
        return out

    def rhs_basis(self, u, v, y, z) -> np.ndarray:
        """``f_c(y + m v) f_d(z + m u + l)`` flattened over ``(c, d)``."""
        m, l = self.m, self.l
        return np.multiply.outer(self.basis(np.asarray(y) + m * v),
                                 self.basis(np.asarray(z) + m * u + l)).ravel()


def _draw_yz(rng, p, im=0.3):
    return (rng.uniform(-0.5, 0.5, p) + 1j * rng.uniform(-im, im, p),
            rng.uniform(-0.5, 0.5, p) + 1j * rng.uniform(-im, im, p))


def fit_degenerate_tensor(model: DegenerateModel, u, v, rng, fresh: int = 20) -> tuple[np.ndarray, float]:
    """Least-squares tensor ``M[a, b, c, d]`` in ``lhs_{ab} = sum M f_c(y + m v) f_d(z + m u + l)``.

    Returns the tensor and the worst relative misfit on ``fresh`` new samples.
    """
    from .sampling import guarded
    D, p = model.dim, model.cfrac.p

    def ok(yz):
        model.lhs(u, v, *yz)
        return True

    pts = guarded(rng, lambda g: _draw_yz(g, p), ok, 3 * D * D)
    Bm = np.array([model.rhs_basis(u, v, y, z) for y, z in pts])
    L = np.array([model.lhs(u, v, y, z).ravel() for y, z in pts])  # (S, D*D)
    coef, *_ = np.linalg.lstsq(Bm, L, rcond=None)  # (D*D [cd], D*D [ab])
    M = coef.T.reshape(D, D, D, D)
    test = guarded(rng, lambda g: _draw_yz(g, p), ok, fresh)
    Bf = np.array([model.rhs_basis(u, v, y, z) for y, z in test])
    Lf = np.array([model.lhs(u, v, y, z).ravel() for y, z in test])
    pred = Bf @ coef
    scale = np.maximum(np.abs(Lf).max(axis=0), 1e-300)
    return M, float((np.abs(pred - Lf) / scale).max())


def degenerate_r_tensor(M: np.ndarray) -> np.ndarray:
    """``R[a, b, d, c] = M[a, b, c, d]``, matching the index order of the elliptic tensor."""
    return M.transpose(0, 1, 3, 2)


def degenerate_check(cfrac: CFrac, eta, mode, u, v, w, seed=0, perturb: complex = 0j) -> dict:
    """Fit the degenerate tensors at ``(u,v), (u,w), (v,w)`` and test YBE.

    Returns the basis dimension, the worst misfit on fresh samples and the
    YBE residual of the fitted tensors.  ``perturb`` moves ``v`` in the first
    tensor only, so a nonzero value should break YBE.
    """
    from .sampling import rng_from
    rng = rng_from(seed)
    model = DegenerateModel(cfrac, complex(eta), mode)
    fits = [fit_degenerate_tensor(model, a, b, rng) for a, b in ((u, v + perturb), (u, w), (v, w))]
    Rs = [degenerate_r_tensor(M) for M, _ in fits]
    return {"dim": model.dim, "fit": max(f for _, f in fits), "ybe": ybe_residual_tensors(*Rs)}


__all__ = [
    "XAlgebraSpec", "YAlgebraSpec", "SamplePoint", "Pattern", "Relation", "classify_pattern",
    "x_coeffs", "y_coeffs", "identity2_sides", "identity2_residual", "PhiContext", "phi_psi",
    "phi_residual", "interior_ratio", "case_consistency", "PsiContext", "psi_psi", "psi_residual",
    "composition_sides", "composition_check", "monomial_exponents", "DegenerateModel",
    "fit_degenerate_tensor", "degenerate_r_tensor", "degenerate_check",
]
