import itertools
from fractions import Fraction as F
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qprob import qdist
from qprob.errors import DomainError, IdentityViolation
from qprob.qnum import Interval, bracket, q_binomial, shifted_pow, shifted_pow_infinite

HALF = F(1, 2)
probs = st.sampled_from([F(0), F(1, 5), F(1, 2), F(4, 5), F(1)])
sub_qs = st.sampled_from([F(1, 4), F(1, 2), F(3, 4)])
prob_qs = st.sampled_from([F(1, 4), F(1, 2), F(3, 4), F(1)])


def test_bernoulli_example():
    pmf = qdist.bernoulli_pmf(2, HALF, HALF)
    assert pmf.entries == {0: F(3, 8), 1: F(3, 8), 2: F(1, 4)}
    assert pmf.values == {0: 0, 1: 1, 2: F(3, 2)}
    assert pmf.exact and pmf.defect == 0


def test_bernoulli_moments_example():
    rep = qdist.bernoulli_moments(2, HALF, HALF)
    assert (rep.mean, rep.second_moment, rep.variance) == (F(3, 4), F(15, 16), F(3, 8))


def test_bernoulli_validation():
    with pytest.raises(DomainError):
        qdist.bernoulli_pmf(2, F(3, 2), HALF)
    with pytest.raises(DomainError):
        qdist.bernoulli_pmf(2, HALF, 2)
    # identity mode admits q > 1
    assert qdist.bernoulli_pmf(2, HALF, 2, mode=qdist.IDENTITY).total() == 1


@given(st.integers(0, 8), probs, prob_qs)
def test_bernoulli_against_path_sum(n, p, q):
    # probability of each 0/1 sequence: non-zero after z zeroes has chance q^z p
    ref = {k: F(0) for k in range(n + 1)}
    for seq in itertools.product((0, 1), repeat=n):
        w, z = F(1), 0
        for x in seq:
            w *= q**z * p if x else 1 - q**z * p
            z += not x
        ref[sum(seq)] += w
    assert qdist.bernoulli_pmf(n, p, q).entries == ref


def test_bernoulli_polynomial_form():
    polys = qdist.bernoulli_pmf_poly(3, HALF)
    pmf = qdist.bernoulli_pmf(3, F(1, 5), HALF)
    assert {k: f(F(1, 5)) for k, f in polys.items()} == pmf.entries


def test_bernoulli_infinite_limit():
    pmf = qdist.bernoulli_inf_pmf(HALF, HALF, 10, F(1, 10**12))
    total = pmf.total()
    assert 1 in total and total.width < F(1, 10**10)
    assert qdist.bernoulli_moments(0, HALF, HALF, infinite=True).mean == 1
    with pytest.raises(DomainError):
        qdist.bernoulli_inf_pmf(HALF, 1, 5, F(1, 10**6))


def test_tails_three_ways():
    for method in ("sum", "integral", "ratio"):
        assert qdist.bernoulli_zero_tail(2, HALF, HALF, 1, method=method) == F(5, 8)
    n, p, q = 5, F(1, 5), F(3, 4)
    for ell in range(n):
        direct = sum(qdist.bernoulli_pmf(n, p, q)[k] for k in range(ell + 1))
        assert qdist.bernoulli_nonzero_tail(n, p, q, ell) == direct
        assert qdist.bernoulli_nonzero_tail(n, p, q, ell, method="integral") == direct


def test_infinite_tail_two_ways_agree():
    for ell in range(4):
        a = qdist.bernoulli_nonzero_tail_infinite(F(4, 5), F(3, 4), ell, F(1, 10**12))
        b = qdist.bernoulli_nonzero_tail_infinite(F(4, 5), F(3, 4), ell, F(1, 10**12), method="integral")
        assert a.overlaps(b)
        assert max(a.width, b.width) <= F(1, 10**12)


@given(st.integers(0, 6), probs, st.sampled_from([F(1, 2), F(1), F(2)]), st.integers(1, 7))
def test_factorial_moments(n, p, q, r):
    assert qdist.factorial_moment(n, p, q, r) == qdist.factorial_moment_closed(n, p, q, r)


@given(st.integers(0, 6), st.sampled_from([F(1, 2), F(1), F(3)]), st.integers(0, 4), probs)
def test_raw_moment_poly_matches_pmf(n, q, r, p):
    pmf = qdist.bernoulli_pmf(n, p, q, mode=qdist.IDENTITY)
    assert qdist.raw_moment(n, q, r)(p) == pmf.expectation(lambda x: x**r)


def test_central_moments():
    n, q, p = 4, HALF, F(1, 5)
    poly = qdist.central_moment_poly(n, q, 2, 0)
    assert poly(p) == qdist.central_moment(n, p, q, 2, 0)
    assert qdist.central_moment(n, p, q, 1) == 0
    # symmetric form: E(xi^2 - [2] xi m + m^2) with m the mean
    rep = qdist.bernoulli_moments(n, p, q)
    m = rep.mean
    assert qdist.central_moment(n, p, q, 2, symmetric=True) == rep.second_moment - bracket(2, q) * m * m + m * m
    assert qdist.central_moment(n, p, q, 1, symmetric=True) == 0


def test_geometric_examples():
    pmf = qdist.geometric_pmf(HALF, HALF, 5, eps=F(1, 10**12))
    assert pmf[2] == F(1, 8)
    total = pmf.total()
    assert 1 in total
    # the defect carries at least the mass of the all-zero sequence
    assert pmf.defect.hi >= shifted_pow_infinite(HALF, HALF, F(1, 10**14)).lo
    rescaled = qdist.geometric_pmf(HALF, HALF, 5, rescaled=True, eps=F(1, 10**12))
    assert 1 in rescaled.total()


def test_negbinomial():
    pmf = qdist.negbinomial_pmf(2, HALF, HALF, 8, eps=F(1, 10**12))
    assert pmf[3] == F(3, 32)
    assert 1 in pmf.total()


def test_parties():
    assert qdist.parties_probabilities(1, 1, HALF, HALF) == (HALF, HALF)
    assert qdist.parties_probabilities(1, 2, HALF, HALF) == (F(5, 8), F(3, 8))
    assert qdist.parties_probabilities(1, 2, HALF, HALF, method="count") == (F(5, 8), F(3, 8))
    assert qdist.parties_probabilities(3, 4, F(1, 5), F(3, 4), method="count")[0] == p1_waiting(3, 4)


def p1_waiting(a, b):
    return qdist.parties_probabilities(a, b, F(1, 5), F(3, 4))[0]


def test_poisson_subunit():
    pmf = qdist.poisson_pmf(1, HALF, 3, F(1, 10**9))
    assert all(isinstance(v, Interval) for v in pmf.entries.values())
    assert 1 in pmf.total()
    rep = qdist.poisson_moments(1, HALF)
    assert (rep.mean, rep.variance) == (1, HALF)
    with pytest.raises(DomainError):
        qdist.Poisson(F(3), HALF).validate()


def test_poisson_superunit():
    pmf = qdist.poisson_pmf(F(1, 3), 2, 12, F(1, 10**12))
    assert 1 in pmf.total()
    with pytest.raises(DomainError):
        qdist.Poisson(F(3), 2).validate()


def test_superunit_limit_product():
    # lim (1 - lam/[n])^n equals prod_{j>=1} (1 - (q-1) lam q^-j), a base-1/q product
    for q, lam in ((F(2), F(1, 2)), (F(3), F(1, 5)), (F(5, 2), F(1))):
        lim = qdist.superunit_limit_product(lam, q, F(1, 10**15))
        oracle = shifted_pow_infinite(lam * (q - 1) / q, 1 / q, F(1, 10**15))
        assert lim.overlaps(oracle)
    # the normalizer agrees only at q = 2
    a = qdist.superunit_poisson_constant(F(1, 2), 2, F(1, 10**15))
    b = qdist.superunit_limit_product(F(1, 2), 2, F(1, 10**15))
    assert a.overlaps(b)
    a = qdist.superunit_poisson_constant(F(1, 5), 3, F(1, 10**15))
    b = qdist.superunit_limit_product(F(1, 5), 3, F(1, 10**15))
    assert not a.overlaps(b)


def test_pgf():
    assert qdist.bernoulli_pgf(2, HALF, HALF, 2) == F(17, 8)
    assert qdist.bernoulli_pgf(2, HALF, HALF, 2, method="closed") == F(17, 8)
    for n, z in itertools.product(range(7), (F(-1), F(0), F(1, 3), F(1), F(5, 2))):
        assert qdist.bernoulli_pgf(n, F(1, 5), F(3, 4), z) == qdist.bernoulli_pgf(n, F(1, 5), F(3, 4), z, method="closed")
    assert qdist.bernoulli_pgf(3, F(1, 5), F(3, 4), 0) == shifted_pow(1, F(-1, 5), 3, F(3, 4))


def test_hypergeom():
    assert qdist.hypergeom_pmf(1, 1, 1, HALF).entries == {0: F(1, 3), 1: F(2, 3)}
    assert qdist.hypergeom_pmf(2, 3, 5, HALF).entries.get(2) == 1
    with pytest.raises(DomainError):
        qdist.hypergeom_pmf(1, 1, 3, HALF)


@given(st.integers(0, 5), st.integers(0, 5), st.data())
def test_hypergeom_dual_symmetry(m, u, data):
    n = data.draw(st.integers(0, m + u))
    k = data.draw(st.integers(0, n))
    q = data.draw(st.sampled_from([F(1, 2), F(1), F(3)]))
    val = qdist.hypergeom_dual(m, u, n, q, k)
    assert val == qdist.hypergeom_pmf(u, m, n, q)[n - k]


def test_hypergeom_dual_example():
    assert qdist.hypergeom_dual(2, 1, 2, HALF, 1) == qdist.hypergeom_pmf(1, 2, 2, HALF)[1]


def test_contagious():
    assert qdist.contagious_pmf(1, 1, 1, 2, HALF).entries == {0: F(1, 7), 1: F(2, 7), 2: F(4, 7)}
    assert qdist.contagious_pmf(3, 2, -1, 4, HALF).entries == qdist.hypergeom_pmf(3, 2, 4, HALF).entries
    assert qdist.classical_contagious_pmf(1, 1, 1, 2) == {0: F(1, 3), 1: F(1, 3), 2: F(1, 3)}
    with pytest.raises(DomainError):
        qdist.Contagious(1, 1, -2, 2, HALF).validate()


def test_uniform():
    assert qdist.uniform_pmf(2, HALF).entries == {0: F(4, 7), 1: F(2, 7), 2: F(1, 7)}
    assert qdist.uniform_moments(2, HALF).mean == HALF
    rep = qdist.uniform_moments(0, HALF)
    assert (rep.mean, rep.second_moment, rep.variance) == (0, 0, 0)


@given(st.integers(1, 8), st.sampled_from([F(1, 4), F(1, 2), F(1), F(3)]))
def test_uniform_printed_second_moment_differs(M, q):
    printed = qdist.uniform_second_moment_printed(M, q)
    correct = qdist.MomentReport.from_pmf(qdist.uniform_pmf(M, q)).second_moment
    assert printed == bracket(M + 1, q) * correct


def test_range_examples():
    assert qdist.range_pmf(1, 2, HALF).entries == {0: F(5, 9), 1: F(4, 9)}
    assert qdist.range_pmf(3, 1, HALF)[0] == 1
    assert qdist.range_pmf_alt_n2(1, HALF).entries == {0: F(2, 3), 1: F(1, 3)}
    assert qdist.range_pmf_alt_n2(0, HALF).entries == {0: 1}


@given(st.integers(0, 6))
def test_range_classical_coincide(M):
    a = qdist.range_pmf(M, 2, 1).entries
    b = qdist.range_pmf_alt_n2(M, 1).entries
    assert {k: a.get(k, 0) for k in range(M + 1)} == {k: b.get(k, 0) for k in range(M + 1)}
    assert qdist.classical_range_pmf(M, 2) == {k: a.get(k, 0) for k in qdist.classical_range_pmf(M, 2)}


def test_moment_report_consistency():
    with pytest.raises(IdentityViolation):
        qdist.MomentReport(F(1), F(2), F(5))


def test_pmf_of_dispatch():
    assert qdist.pmf_of(qdist.Uniform(2, HALF)).entries == qdist.uniform_pmf(2, HALF).entries
    assert qdist.pmf_of(qdist.Bernoulli(2, HALF, HALF))[0] == F(3, 8)
    with pytest.raises(TypeError):
        qdist.pmf_of(object())


def test_classical_binomial_reference():
    for n, k in itertools.product(range(6), range(6)):
        assert q_binomial(n, k, 1) == comb(n, k)
