import itertools

import numpy as np
import pytest

from artifact import homs
from artifact.cfrac import dual, expand, hom_constants
from artifact.duality import build_pair
from artifact.errors import InvalidInputError, PoleProximityError
from artifact.homs import (DegenerateModel, PhiContext, PsiContext, SamplePoint, XAlgebraSpec, YAlgebraSpec,
                           case_consistency, classify_pattern, composition_check, composition_sides,
                           degenerate_check, identity2_residual, interior_ratio, monomial_exponents,
                           phi_residual, psi_residual, x_coeffs, y_coeffs)
from artifact.theta1 import DegenerationMode, Lattice, ThetaSeries, theta

from conftest import wbasis

ETA = 0.17 + 0.11j
LAT = Lattice(1j)
S = ThetaSeries(LAT)
U, V = 0.031 + 0.012j, -0.047 + 0.021j


def ytable(rng, p, rows=2):
    return rng.uniform(-0.5, 0.5, (rows, p)) + 0.3j * rng.uniform(-1, 1, (rows, p))


def draw(rng, p):
    return rng.uniform(-0.5, 0.5, p) + 0.3j * rng.uniform(-1, 1, p)


# ------------------------------------------------------------ patterns

@pytest.mark.parametrize("A,B,kind,nu", [((0, 0), (1, 1), "general", None),
                                         ((0, 0), (0, 1), "interior", 1),
                                         ((0, 0), (1, 0), "leading", 2),
                                         ((0, 0, 0), (1, 1, 0), "leading", 3)])
def test_classify(A, B, kind, nu):
    pat = classify_pattern(A, B)
    assert pat.kind == kind
    assert pat.nu == nu


# ------------------------------------------------------------ X relations

def test_x_p1_two_terms(rng):
    spec = XAlgebraSpec.from_cfrac(expand(3, 1), LAT, ETA)
    y = ytable(rng, 1)
    rel = x_coeffs(spec, SamplePoint(U, V, y, (0,), (1,)))
    assert len(rel.terms) == 2
    assert [t[1:] for t in rel.terms] == [((0,), (1,)), ((1,), (0,))]
    x, mu = V - U, spec.mu
    d = y[0, 0] - y[1, 0]
    assert np.isclose(rel.terms[0][0], theta(mu, S) * theta(x + d, S) / (theta(x, S) * theta(d, S)))
    assert np.isclose(rel.terms[1][0], theta(d + mu, S) / theta(d, S))
    assert np.isclose(rel.prefactor, theta(x + mu, S) / theta(x, S))


def test_x_nu1_pure_exchange(rng):
    spec = XAlgebraSpec.from_cfrac(expand(5, 2), LAT, ETA)
    rel = x_coeffs(spec, SamplePoint(U, V, ytable(rng, 2), (0, 0), (0, 1)))
    assert rel.coeffs == [1]
    assert rel.prefactor == 1


def test_x_general_p2_three_terms(rng):
    spec = XAlgebraSpec.from_cfrac(expand(5, 2), LAT, ETA)
    rel = x_coeffs(spec, SamplePoint(U, V, ytable(rng, 2), (0, 0), (1, 1)))
    assert len(rel.terms) == 3
    assert [t[1:] for t in rel.terms] == [((0, 0), (1, 1)), ((1, 0), (0, 1)), ((1, 1), (0, 0))]


def test_x_index_out_of_range(rng):
    spec = XAlgebraSpec.from_cfrac(expand(5, 2), LAT, ETA)
    with pytest.raises(InvalidInputError):
        x_coeffs(spec, SamplePoint(U, V, ytable(rng, 2), (0, 2), (1, 1)))
    with pytest.raises(InvalidInputError):
        x_coeffs(spec, SamplePoint(U, V, ytable(rng, 2), (0, 0), (1, 1)), family="interior")


def test_x_pole_guard():
    spec = XAlgebraSpec.from_cfrac(expand(5, 2), LAT, ETA)
    y = np.array([[0.1, 0.2], [0.1, 0.3]], complex)
    with pytest.raises(PoleProximityError):
        x_coeffs(spec, SamplePoint(U, V, y, (0, 0), (1, 1)))


def test_spec_lengths():
    with pytest.raises(InvalidInputError):
        XAlgebraSpec(expand(5, 2), LAT, (2,), 0.1, (0.1, 0.2))
    with pytest.raises(InvalidInputError):
        YAlgebraSpec(expand(5, 3), LAT, 0.1, (0.1,))


# ------------------------------------------------------------ Y relations

def test_y_p1_coefficients(rng):
    spec = YAlgebraSpec.from_cfrac(expand(2, 1), LAT, ETA)
    uu, vv = draw(rng, 1), draw(rng, 1)
    rel = y_coeffs(spec, SamplePoint(U, V, u_vec=uu, v_vec=vv))
    x, mu = V - U, spec.mu
    assert len(rel.terms) == 2
    assert np.isclose(rel.terms[0][0], theta(mu, S) * theta(x + uu[0] - vv[0], S) / (theta(x, S) * theta(uu[0] - vv[0], S)))
    assert np.isclose(rel.terms[1][0], theta(vv[0] - uu[0] + mu, S) / theta(vv[0] - uu[0], S))


def test_y_mu_zero_commutes(rng):
    cd = dual(expand(5, 2))
    spec = YAlgebraSpec(cd, LAT, 0.0, (0.0,) * cd.p)
    rel = y_coeffs(spec, SamplePoint(U, V, u_vec=draw(rng, cd.p), v_vec=draw(rng, cd.p)))
    assert np.isclose(rel.prefactor, 1)
    assert abs(rel.coeffs[0]) < 1e-14
    assert np.isclose(rel.coeffs[-1], 1)


def test_y_five_two_three_terms(rng):
    spec = YAlgebraSpec.from_cfrac(expand(5, 2), LAT, ETA)
    assert spec.dual_cfrac.terms == (2, 3)
    rel = y_coeffs(spec, SamplePoint(U, V, u_vec=draw(rng, 2), v_vec=draw(rng, 2)))
    assert len(rel.terms) == 3


# ------------------------------------------------------------ identity (2)

@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (5, 2)])
def test_identity2_all_pairs(n, k, rng):
    wb = wbasis(n, k)
    p = wb.p
    y, z = draw(rng, p), draw(rng, p)
    worst = max(identity2_residual(wb, ETA, U, V, y, z, a, b) for a in range(n) for b in range(n))
    assert worst < 1e-8


def test_identity2_near_diagonal(rng):
    wb = wbasis(5, 2)
    z = draw(rng, 2)
    assert identity2_residual(wb, ETA, U, V, z + 0.1, z, 1, 3) < 1e-8
    with pytest.raises(PoleProximityError):
        identity2_residual(wb, ETA, U, V, z, z, 1, 3)


def test_identity2_wrong_eta_fails(rng):
    wb = wbasis(3, 2)
    y, z = draw(rng, 2), draw(rng, 2)
    lhs, _ = homs.identity2_sides(wb, ETA, U, V, y, z, 0, 1)
    _, rhs = homs.identity2_sides(wb, ETA + 0.01, U, V, y, z, 0, 1)
    assert abs(lhs - rhs) / max(1, abs(lhs)) > 1e-4


# ------------------------------------------------------------ Phi

_CTX = {}


def phi_ctx(n, k):
    if (n, k) not in _CTX:
        _CTX[n, k] = PhiContext.build(expand(n, k), LAT, ETA, wb=wbasis(n, k), series=S)
    return _CTX[n, k]


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (5, 2)])
def test_phi_general_position(n, k, rng):
    ctx = phi_ctx(n, k)
    p = ctx.xspec.p
    s = SamplePoint(U, V, ytable(rng, p), (0,) * p, (1,) * p)
    for a, b in itertools.product(range(n), repeat=2):
        assert phi_residual(ctx, s, a, b) < 1e-8


def test_phi_printed_prefactor_fails(rng):
    ctx = phi_ctx(5, 2)
    s = SamplePoint(U, V, ytable(rng, 2), (0, 0), (1, 1))
    assert phi_residual(ctx, s, 0, 1, reading="printed") > 1e-3


@pytest.mark.parametrize("A,B", [((0, 0), (0, 0)), ((0, 0), (1, 0))])
def test_phi_degenerate_patterns(A, B, rng):
    ctx = phi_ctx(5, 2)
    s = SamplePoint(U, V, ytable(rng, 2), A, B)
    assert max(phi_residual(ctx, s, a, b) for a in range(5) for b in range(5)) < 1e-8


def test_phi_interior_coefficient(rng):
    ctx = phi_ctx(5, 2)
    s = SamplePoint(U, V, ytable(rng, 2), (0, 0), (0, 1))
    assert phi_residual(ctx, s, 0, 1, interior_reading="corrected") < 1e-8
    assert phi_residual(ctx, s, 0, 1, interior_reading="printed") > 1e-3
    forced, coef = interior_ratio(ctx, s, 0, 1)
    assert np.isclose(forced, coef, rtol=1e-8)


def test_phi_perturbed_lambda_control(rng):
    ctx = phi_ctx(5, 2)
    s = SamplePoint(U, V, ytable(rng, 2), (0, 0), (1, 1))
    lam = np.array(ctx.xspec.lam)
    lam[0] += 0.01
    assert phi_residual(ctx, s, 0, 1, lam=lam) > 1e-4


def test_case_consistency_leading(rng):
    spec = XAlgebraSpec.from_cfrac(expand(5, 2), LAT, ETA)
    s = SamplePoint(5 * U, 5 * V, ytable(rng, 2), (0, 0), (1, 0))
    r = case_consistency(spec, s)
    assert r["compared"] and r["max_deviation"] < 1e-5
    # the last general coefficient has a simple pole in the merging variable
    assert r["skipped"]
    with pytest.raises(InvalidInputError):
        case_consistency(spec, s.with_indices((0, 0), (1, 1)))


# ------------------------------------------------------------ Psi

@pytest.mark.parametrize("n,k", [(2, 1), (3, 2), (5, 2)])
def test_psi_vanishes(n, k, rng):
    ctx = PsiContext.build(expand(n, k), LAT, ETA, wd=wbasis(n, n - k), series=S)
    p = ctx.yspec.p
    s = SamplePoint(U, V, u_vec=draw(rng, p), v_vec=draw(rng, p))
    for g, d in itertools.product(range(n), repeat=2):
        assert psi_residual(ctx, s, g, d) < 1e-8
    gam = list(ctx.consts.gamma)
    gam[0] = -gam[0]
    assert psi_residual(ctx, s, 0, 1, gamma=gam) > 1e-4


def test_psi_printed_index_fails_for_n_ge_3(rng):
    ctx = PsiContext.build(expand(3, 2), LAT, ETA, wd=wbasis(3, 1), series=S)
    s = SamplePoint(U, V, u_vec=draw(rng, 1), v_vec=draw(rng, 1))
    assert max(psi_residual(ctx, s, g, d, reading="printed") for g in range(3) for d in range(3)) > 1e-3


def test_psi_prefactor_needs_v_minus_u(rng, monkeypatch):
    """With the denominator theta(v - mu) in the Y prefactor the check fails."""
    ctx = PsiContext.build(expand(3, 2), LAT, ETA, wd=wbasis(3, 1), series=S)
    s = SamplePoint(U, V, u_vec=draw(rng, 1), v_vec=draw(rng, 1))
    orig = homs.y_coeffs

    def alt(spec, sp):
        rel = orig(spec, sp)
        x = sp.v - sp.u
        rel.prefactor = complex(theta(x + spec.mu, S) / theta(sp.v - spec.mu, S))
        return rel

    monkeypatch.setattr(homs, "y_coeffs", alt)
    assert psi_residual(ctx, s, 0, 1) > 1e-4


# ------------------------------------------------------------ composition

@pytest.mark.parametrize("n,k", [(2, 1), (5, 2)])
def test_composition(n, k, rng):
    pair = build_pair(expand(n, n - k), LAT, seed=1)
    h = hom_constants(expand(n, k), ETA)
    p, pd = len(h.nu), len(h.gamma)
    for _ in range(5):
        try:
            assert composition_check(pair, ETA, draw(rng, p), U, draw(rng, pd)) < 1e-8
        except PoleProximityError:
            continue
    y, z = draw(rng, p), draw(rng, pd)
    a, b = composition_sides(pair, ETA, y, U, z, c=0)
    assert b == 0
    assert np.isclose(composition_check(pair, ETA, y, U, z, c=0), abs(a) / max(1, abs(a)))


# ------------------------------------------------------------ degenerations

def test_monomial_basis_dimension():
    c = expand(5, 2)
    assert len(monomial_exponents(c)) == 3 * 2
    assert DegenerateModel(c, ETA, "rational").dim == 6


@pytest.mark.parametrize("mode", ["trigonometric", "rational"])
@pytest.mark.parametrize("n,k", [(2, 1), (3, 2), (5, 2)])
def test_degenerate_fit_and_ybe(n, k, mode):
    r = degenerate_check(expand(n, k), ETA, mode, 0.11 + 0.02j, -0.23 + 0.05j, 0.3 - 0.04j, seed=4)
    assert r["fit"] < 1e-8 and r["ybe"] < 1e-8
    bad = degenerate_check(expand(n, k), ETA, mode, 0.11 + 0.02j, -0.23 + 0.05j, 0.3 - 0.04j, seed=4,
                           perturb=0.05)
    assert bad["ybe"] > 1e-4


def test_degenerate_needs_degenerate_mode():
    with pytest.raises(InvalidInputError):
        DegenerateModel(expand(3, 1), ETA, DegenerationMode.ELLIPTIC)
