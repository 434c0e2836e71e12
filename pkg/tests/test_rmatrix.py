import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.cfrac import expand
from artifact.errors import InvalidInputError, LimitNotConvergedError, PoleProximityError
from artifact.rmatrix import (RMatrixSpec, degenerate_eta_check, permutation_phase_tensor,
                              prefactor_closed_form, r_entries, relation8_prefactor, support_violation,
                              tau_multiplier, unitarity, ybe_residual, ybe_residual_tensors)
from artifact.theta1 import DegenerationMode, Lattice, ThetaSeries, theta_alpha

from conftest import PAIRS

ETA = 0.17 + 0.11j
U, V, W = 0.12 + 0.05j, -0.27 + 0.13j, 0.31 - 0.08j


def spec(n, k, tau=1j, eta=ETA):
    return RMatrixSpec(n, k, Lattice(tau), eta)


def loop_entries(n, k, s, eta, u, v):
    R = np.zeros((n,) * 4, complex)
    for a in range(n):
        for b in range(n):
            for d in range(n):
                for g in range(n):
                    if (a + b - g - d) % n:
                        continue
                    R[a, b, d, g] = (theta_alpha(b - a + (b - g) * (k - 1), v - u + eta, n, s)
                                     / (theta_alpha(k * (b - g), eta, n, s) * theta_alpha(b - d, v - u, n, s)))
    return R


@pytest.mark.parametrize("n,k", PAIRS)
def test_entries_match_loop(n, k):
    sp = spec(n, k)
    np.testing.assert_allclose(r_entries(sp, U, V), loop_entries(n, k, sp.series, ETA, U, V), rtol=1e-12)


def test_eight_vertex_support():
    R = r_entries(spec(2, 1), U, V)
    assert np.count_nonzero(R) == 8
    assert support_violation(R) == 0.0


@pytest.mark.parametrize("tau", [1j, 0.3 + 1.1j])
@pytest.mark.parametrize("n,k", PAIRS)
def test_ybe(n, k, tau):
    assert ybe_residual(spec(n, k, tau), U, V, W) < 1e-9


@pytest.mark.parametrize("n,k", PAIRS)
def test_unitarity_up_to_scalar(n, k):
    r = unitarity(spec(n, k), U, V)
    assert r["fitted"] < 1e-9
    assert r["symmetry"] < 1e-9
    assert r["vs_prefactors"] < 1e-9
    assert r["raw"] > 1e-3  # the scalar is not 1


@pytest.mark.parametrize("n,k", PAIRS)
def test_prefactor_closed_form(n, k):
    sp = spec(n, k)
    assert np.isclose(relation8_prefactor(sp, U, V), prefactor_closed_form(sp, U, V), rtol=1e-9)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 2)])
def test_tau_multiplier(n, k):
    r = tau_multiplier(spec(n, k), U, V, W)
    assert r["lhs_deviation"] < 1e-8 and r["rhs_deviation"] < 1e-8


def test_mixed_eta_breaks_ybe():
    a, b = spec(3, 1), spec(3, 1, eta=ETA + 0.01)
    res = ybe_residual_tensors(r_entries(b, U, V), r_entries(a, U, W), r_entries(a, V, W))
    assert res > 1e-3


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (5, 2)])
def test_eta_limit_nu_zero_is_printed_form(n, k):
    r = degenerate_eta_check(n, k, Lattice(1j), 1, 0, U, V)
    assert r["printed"] < 1e-5 and r["corrected"] < 1e-5


@pytest.mark.parametrize("mu,nu", [(0, 1), (1, 1)])
def test_eta_limit_nu_nonzero_carries_phase(mu, nu):
    r = degenerate_eta_check(3, 1, Lattice(1j), mu, nu, U, V)
    assert r["corrected"] < 1e-5
    assert r["printed"] > 1e-2


def test_eta_limit_convergence_guard():
    with pytest.raises(LimitNotConvergedError):
        degenerate_eta_check(3, 1, Lattice(1j), 1, 0, U, V, eps=(1e-1, 5e-2, 2e-2), conv_tol=1e-14)


def test_permutation_phase_tensor_is_permutation():
    T = permutation_phase_tensor(5, 2, 1, 1)
    assert np.allclose(np.abs(T).sum(axis=(2, 3)), 1)


def test_bad_specs():
    with pytest.raises(InvalidInputError):
        RMatrixSpec(4, 2, Lattice(1j), ETA)
    with pytest.raises(PoleProximityError):
        RMatrixSpec(3, 1, Lattice(1j), 0.0)
    with pytest.raises(InvalidInputError):
        RMatrixSpec(3, 1, Lattice(1j), ETA, mode=DegenerationMode.RATIONAL)
    with pytest.raises(PoleProximityError):
        r_entries(spec(3, 1), U, U)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.3, 0.3), st.floats(-0.5, 0.5), st.floats(-0.3, 0.3))
def test_support_property(x1, y1, x2, y2):
    u, v = x1 + 1j * y1, x2 + 1j * y2
    try:
        R = r_entries(spec(3, 2), u, v)
    except PoleProximityError:
        return
    assert support_violation(R) == 0.0
