from fractions import Fraction
from math import gcd

import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact.cfrac import CFrac, det_d, dual, dual_relations, expand, hom_constants, block_shape
from artifact.errors import InvalidInputError


def cf_value(terms):
    """Evaluate n_1 - 1/(n_2 - 1/(...)) exactly."""
    x = Fraction(terms[-1])
    for t in reversed(terms[:-1]):
        x = t - 1 / x
    return x


def det_dense(terms):
    p = len(terms)
    if p == 0:
        return 1
    M = np.diag(np.array(terms, float)) - np.eye(p, k=1) - np.eye(p, k=-1)
    return int(round(np.linalg.det(M)))


coprime = st.integers(2, 40).flatmap(
    lambda n: st.tuples(st.just(n), st.sampled_from([k for k in range(1, n) if gcd(n, k) == 1])))


@pytest.mark.parametrize("n,k,terms", [(5, 2, (3, 2)), (7, 3, (3, 2, 2)), (2, 1, (2,)),
                                       (4, 3, (2, 2, 2)), (5, 3, (2, 3))])
def test_known_expansions(n, k, terms):
    assert expand(n, k).terms == terms


def test_det_small_cases():
    assert det_d([]) == 1
    assert det_d([4]) == 4
    assert det_d([3, 2]) == 5
    assert det_d([2, 2, 2]) == 4


@given(st.lists(st.integers(2, 7), min_size=1, max_size=6))
def test_det_matches_dense_determinant(terms):
    assert det_d(terms) == det_dense(terms)


@given(coprime)
def test_expansion_value_and_round_trip(nk):
    n, k = nk
    c = expand(n, k)
    assert cf_value(c.terms) == Fraction(n, k)
    assert det_d(c.terms) == n and det_d(c.terms[1:]) == k
    assert all(t >= 2 for t in c.terms)


@given(coprime)
def test_dual_relations_hold(nk):
    c = expand(*nk)
    cd = dual(c)
    assert cd.n == c.n and cd.k == c.n - c.k
    assert all(dual_relations(c, cd).values())
    assert block_shape(c.terms) == cd.terms


@given(coprime)
def test_kprime_inverts_k(nk):
    c = expand(*nk)
    assert (c.k * c.kprime) % c.n == 1


def test_dual_is_involutive():
    c = expand(11, 4)
    assert dual(dual(c)).terms == c.terms


@pytest.mark.parametrize("n,k", [(4, 2), (6, 3), (5, 5), (5, 0), (1, 1), (65, 2)])
def test_invalid_pairs_rejected(n, k):
    with pytest.raises(InvalidInputError):
        expand(n, k)


def test_inconsistent_cfrac_rejected():
    with pytest.raises(InvalidInputError):
        CFrac(5, 2, (2, 3))
    with pytest.raises(InvalidInputError):
        CFrac(5, 2, (3, 1))


def test_hom_constants_example():
    h = hom_constants(expand(5, 2), 0.1)
    assert h.nu == (2, 1)
    np.testing.assert_allclose(h.lam, [0.1, 0.3])
    assert h.mu == pytest.approx(0.5)
    cd = dual(expand(5, 2))
    assert h.gamma == tuple(-det_d(cd.terms[j + 1:]) for j in range(cd.p))
    assert len(h.mu_prime) == cd.p
