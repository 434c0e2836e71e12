import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.cfrac import expand
from artifact.errors import TruncationError
from artifact.theta1 import E, Lattice, ThetaSeries, quasi_periodicity_residual_1d
from artifact.thetap import (MultiThetaSpace, WBasis, enumerate_cosets, k1_agreement,
                             multiplier_residual, shift_vector, tridiagonal)

from conftest import PAIRS, TAUS, cpoints, wbasis


def law_residual(f, terms, tau, z):
    """1- and tau-shift laws written out directly, one coordinate at a time."""
    p = len(terms)
    fz = f(z)
    scale = np.maximum(1, np.abs(fz))
    worst = 0.0
    for j in range(p):
        e = np.eye(p)[j]
        left = z[:, j - 1] if j else 0
        right = z[:, j + 1] if j + 1 < p else 0
        extra = 0 if j == 0 else tau
        mult = (-1) ** terms[j] * np.exp(-2j * np.pi * (terms[j] * z[:, j] - left - right + extra))
        worst = max(worst, (np.abs(f(z + e) - fz) / scale).max(),
                    (np.abs(f(z + tau * e) - mult * fz) / np.maximum(scale, np.abs(mult * fz))).max())
    return worst


@pytest.mark.parametrize("n,k", PAIRS + ((7, 3),))
def test_coset_count_and_labels(n, k):
    terms = expand(n, k).terms
    reps = enumerate_cosets(terms)
    assert len(reps) == n
    r = shift_vector(terms)
    assert sorted(int(np.dot(a, r) % n) for a in reps) == list(range(n))
    assert round(abs(np.linalg.det(tridiagonal(terms)))) == n


def test_five_two_lattice():
    A = tridiagonal((3, 2))
    assert A.tolist() == [[3, -1], [-1, 2]]


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("n,k", PAIRS)
def test_tables_obey_recurrence_and_laws(n, k, tau, rng):
    sp = wbasis(n, k, tau).space
    z = cpoints(rng, (25, sp.p), tau)
    for i in range(n):
        assert sp.recurrence_residual(i) < 1e-12
        assert law_residual(lambda x: sp.evaluate(i, x), sp.terms, tau, z) < 1e-8


@pytest.mark.parametrize("n,k", PAIRS)
def test_reduction_matches_raw_series(n, k, rng):
    sp = wbasis(n, k).space
    z = cpoints(rng, (10, sp.p), 1j, im=0.8)
    t = sp.tables[0]
    raw = np.exp(2j * np.pi * (z @ t.index.T)) @ t.coeff
    np.testing.assert_allclose(sp.evaluate(0, z), raw, rtol=1e-8)


@pytest.mark.parametrize("n,k", PAIRS)
def test_linear_independence(n, k, rng):
    sp = wbasis(n, k).space
    z = cpoints(rng, (n, sp.p), 1j)
    M = np.stack([sp.evaluate(i, z) for i in range(n)], axis=-1)
    assert np.linalg.cond(M) < 1e8


@pytest.mark.parametrize("n,k", PAIRS)
def test_w_basis_operators(n, k, rng):
    wb = wbasis(n, k)
    z = cpoints(rng, (20, wb.p), 1j)
    W = wb.values(z)
    scale = np.maximum(1, np.abs(W))
    for a in range(n):
        eig = wb.T_shift(lambda x, a=a: wb.w(a, x))(z)
        assert (np.abs(eig - E(k * a / n) * W[:, a]) / scale[:, a]).max() < 1e-8
        cyc = wb.T_tau_shift(lambda x, a=a: wb.w(a, x))(z)
        assert (np.abs(cyc - W[:, (a + 1) % n]) / scale[:, (a + 1) % n]).max() < 1e-8
        lhs = wb.T_shift(wb.T_tau_shift(lambda x, a=a: wb.w(a, x)))(z)
        rhs = E(k / n) * wb.T_tau_shift(wb.T_shift(lambda x, a=a: wb.w(a, x)))(z)
        assert (np.abs(lhs - rhs) / np.maximum(1, np.abs(lhs))).max() < 1e-8
    np.testing.assert_allclose(wb.w(n + 1, z), W[:, 1])


def test_p1_space_is_order_n_theta(rng):
    wb = wbasis(3, 1)
    z = cpoints(rng, 20, 1j)
    for a in range(3):
        r = quasi_periodicity_residual_1d(lambda x: wb.w(a, x[:, None]), 3, 0.0, z, 1j)
        assert (r / np.maximum(1, np.abs(wb.w(a, z[:, None])))).max() < 1e-8


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_k1_agreement(n, tau, rng):
    wb = wbasis(n, 1, tau) if (n, 1) in PAIRS else WBasis(MultiThetaSpace(expand(n, 1), Lattice(tau)))
    z = cpoints(rng, 15, tau)
    r = k1_agreement(wb, (n - 1) / (2 * n), z)
    assert r["residual"] < 1e-8
    assert r["phase_mismatch"] < 1e-9
    printed = k1_agreement(wb, (n - 1) / 2, z)
    if n % 2:
        assert printed["residual"] < 1e-8
    else:
        # half-integer shift changes the twisted-shift phase by 1/2 mod 1/n
        assert printed["phase_mismatch"] > 0.1
        assert printed["residual"] > 1e-3


def test_k1_agreement_rejects_p_gt_1():
    with pytest.raises(ValueError):
        k1_agreement(wbasis(5, 2), 0.0, np.zeros(2))


def test_root_choice_multiplies_by_phase(rng):
    wb = wbasis(3, 2)
    z = cpoints(rng, (5, wb.p), 1j)
    w1 = wb.with_root(1)
    for a in range(3):
        ratio = w1.w(a, z) / wb.w(a, z)
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-9)
        assert np.isclose(ratio[0] / (w1.w(0, z[:1])[0] / wb.w(0, z[:1])[0]), E(a / 3))


def test_to_json_round_trip():
    wb = wbasis(3, 2)
    doc = json.loads(wb.to_json())
    assert doc["n"] == 3 and doc["k"] == 2 and doc["terms"] == [2, 2]
    assert len(doc["cosets"]) == 3
    assert {c["table"] for c in doc["coeffs"]} == {0, 1, 2}
    # rebuild w_0 at one point from the exported coefficients
    z = np.array([0.11 + 0.05j, -0.2 + 0.1j])
    val = sum((c["re"] + 1j * c["im"]) * np.exp(2j * np.pi * np.dot(c["index"], z))
              for c in doc["coeffs"] if c["table"] == 0)
    assert np.isclose(val, wb.w(0, z), rtol=1e-9)


def test_small_box_raises():
    with pytest.raises(TruncationError):
        MultiThetaSpace(expand(3, 1), Lattice(1j), box_radius=3)


def test_multiplier_residual_detects_wrong_function(rng):
    wb = wbasis(5, 2)
    z = cpoints(rng, (10, 2), 1j)
    good = multiplier_residual(lambda x: wb.w(0, x), (3, 2), 1j, z)
    bad = multiplier_residual(lambda x: wb.w(0, x) * E(0.3 * x[..., 0]), (3, 2), 1j, z)
    assert good.max() < 1e-8 and bad.min() > 1e-3


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_periodicity_property(x1, x2, y1, y2):
    wb = wbasis(5, 2)
    z = np.array([[x1 + y1 * 1j, x2 + y2 * 1j]])
    f = wb.w(2, z)
    for e in np.eye(2):
        g = wb.w(2, z + e)
        assert abs(g - f) <= 1e-9 * max(1, abs(f))
