import itertools
from fractions import Fraction as F
from math import comb, factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qprob.errors import DomainError
from qprob.qnum import (
    X,
    Interval,
    PPoly,
    QBase,
    Regime,
    bracket,
    certified_series,
    euler_coefficients,
    euler_operator_coefficients,
    jackson_integral,
    q_binomial,
    q_derivative,
    q_difference_quotient,
    q_exponential,
    q_factorial,
    rational,
    shifted_pow,
    shifted_pow_infinite,
)

bases = st.sampled_from([F(1, 4), F(1, 2), F(2, 3), F(3, 4), F(1), F(3, 2), F(2), F(3)])
small_rats = st.fractions(min_value=-3, max_value=3, max_denominator=12)
polys = st.lists(small_rats, max_size=7).map(PPoly)


def brute_bracket(x, q):
    # direct sum 1 + q + ... + q^(x-1) for x >= 0
    return sum((q**i for i in range(x)), F(0))


def test_rational_parsing():
    assert rational("3/8") == F(3, 8)
    assert rational(0.5) == F(1, 2)
    assert rational("1e-9") == F(1, 10**9)
    assert rational(F(2, 3)) == F(2, 3)


def test_qbase_regimes():
    assert QBase(F(1, 2)).regime is Regime.SUB_UNIT
    assert QBase(1).regime is Regime.UNIT
    assert QBase(2).regime is Regime.SUPER_UNIT
    assert QBase(2).inverse().value == F(1, 2)
    with pytest.raises(DomainError):
        QBase(0)


def test_bracket_examples():
    assert bracket(3, F(1, 2)) == F(7, 4)
    assert q_factorial(3, F(1, 2)) == F(21, 8)
    assert q_binomial(4, 2, F(1, 2)) == F(35, 16)
    assert bracket(5, 1) == 5


@given(bases, st.integers(0, 12))
def test_bracket_matches_geometric_sum(q, x):
    assert bracket(x, q) == brute_bracket(x, q)


@given(bases, st.integers(-6, 10))
def test_bracket_negative_and_inverse_base(q, x):
    # [x]_(1/q) = q^(1-x) [x]_q and [-x] = -q^-x [x]
    assert bracket(x, 1 / q) == q ** (1 - x) * bracket(x, q)
    assert bracket(-x, q) == -(q ** (-x)) * bracket(x, q)


@given(bases, st.integers(0, 10), st.integers(0, 10))
def test_q_binomial_pascal_and_symmetry(q, n, k):
    assert q_binomial(n + 1, k, q) == q_binomial(n, k - 1, q) + q**k * q_binomial(n, k, q)
    if k <= n:
        assert q_binomial(n, k, q) == q_binomial(n, n - k, q)


@given(st.integers(0, 12), st.integers(-2, 14))
def test_q_binomial_classical(n, k):
    assert q_binomial(n, k, 1) == (comb(n, k) if k >= 0 else 0)


def test_q_binomial_zero_cases():
    assert q_binomial(3, 5, F(1, 2)) == 0
    assert q_binomial(3, -1, F(1, 2)) == 0


@given(bases, st.integers(0, 8), small_rats, small_rats)
def test_euler_expansion(q, m, x, y):
    rhs = sum((c * x ** (m - j) * y**j for j, c in enumerate(euler_coefficients(m, q))), F(0))
    assert shifted_pow(x, y, m, q) == rhs


@given(bases, st.integers(-4, 4), st.integers(-4, 4), st.sampled_from([F(1, 5), F(1, 2), F(4, 5)]))
def test_shifted_pow_splitting(q, a, b, x):
    try:
        lhs = shifted_pow(1, -x, a + b, q)
        rhs = shifted_pow(1, -x, a, q) * shifted_pow(1, -(q**a) * x, b, q)
    except DomainError:
        return
    assert lhs == rhs


def test_shifted_pow_examples_and_errors():
    assert shifted_pow(1, F(-1, 2), 2, F(1, 2)) == F(3, 8)
    with pytest.raises(DomainError):
        shifted_pow(1, F(-1, 2), -1, F(1, 2))
    poly = shifted_pow(1, -X, 2, F(1, 2))
    assert poly == PPoly([1, F(-3, 2), F(1, 2)])


def test_shifted_pow_infinite_nesting():
    coarse = shifted_pow_infinite(F(1, 2), F(1, 2), F(1, 10**12))
    fine = shifted_pow_infinite(F(1, 2), F(1, 2), F(1, 10**18))
    assert coarse.width <= F(1, 10**12)
    assert coarse.contains(fine)
    assert abs(float(coarse.mid) - 0.288788095086602) < 1e-12


@settings(max_examples=30)
@given(st.sampled_from([F(1, 4), F(1, 2), F(3, 4)]), st.fractions(-2, F(9, 10), max_denominator=10))
def test_shifted_pow_infinite_encloses_partial_products(q, p):
    enc = shifted_pow_infinite(p, q, F(1, 10**10))
    # the finite product converges to the enclosure
    far = shifted_pow(1, -p, 200, q)
    assert enc.lo - F(1, 10**9) <= far <= enc.hi + F(1, 10**9)


def test_shifted_pow_infinite_domain():
    with pytest.raises(DomainError):
        shifted_pow_infinite(F(1, 2), 2, F(1, 10**6))


@given(polys, bases)
def test_q_derivative_matches_difference_quotient(f, q):
    assert q_derivative(f, q) == q_difference_quotient(f, q)


@given(polys, bases, st.fractions(-2, 2, max_denominator=8))
def test_jackson_integral_inverts_derivative(f, q, a):
    # int_0^a D_q f = f(a) - f(0)
    assert jackson_integral(q_derivative(f, q), a, q) == f(a) - f(F(0))


def test_jackson_integral_example():
    assert jackson_integral(1 - F(1, 2) * X, F(1, 2), F(1, 2)) == F(5, 12)


def test_polynomial_arithmetic():
    f = PPoly([1, 2])
    g = PPoly([0, 0, 3])
    assert (f * g).coeffs == (0, 0, 3, 6)
    assert (f - f).degree == -1
    assert (2 + f)(F(1, 2)) == 4
    assert f.scale_arg(F(1, 2)) == PPoly([1, 1])


def test_euler_operator_coefficients():
    stirling_3 = [1, 3, 1]
    assert euler_operator_coefficients(3, 1) == stirling_3
    assert euler_operator_coefficients(2, F(1, 2)) == [1, F(1, 2)]


@given(st.integers(1, 6))
def test_euler_operator_classical_stirling(m):
    def stirling2(n, k):
        return sum((-1) ** (k - j) * comb(k, j) * j**n for j in range(k + 1)) // factorial(k)

    assert euler_operator_coefficients(m, 1) == [stirling2(m, k) for k in range(1, m + 1)]


def test_q_exponential():
    e = q_exponential(0, 1, F(1, 2), F(1, 10**10))
    assert abs(float(e.mid) - 3.4627466) < 1e-6
    prod = q_exponential(0, F(1, 3), F(1, 2), F(1, 10**14)) * q_exponential(1, F(-1, 3), F(1, 2), F(1, 10**14))
    assert 1 in prod
    with pytest.raises(DomainError):
        q_exponential(0, 2, F(1, 2), F(1, 10**6))


@given(st.lists(st.fractions(-5, 5, max_denominator=20), min_size=1, max_size=4),
       st.lists(st.fractions(-5, 5, max_denominator=20), min_size=1, max_size=4))
def test_interval_arithmetic_contains_point_results(a, b):
    ia = Interval(min(a), max(a))
    ib = Interval(min(b), max(b))
    for x, y in itertools.product(a, b):
        assert x + y in ia + ib
        assert x - y in ia - ib
        assert x * y in ia * ib
        if not ib.contains(0):
            assert x / y in ia / ib


def test_interval_helpers():
    i = Interval(F(1), F(2))
    assert i.width == 1 and i.mid == F(3, 2)
    assert i.gap(Interval(F(3), F(4))) == 1
    assert i.distance_bound(F(0)) == 2
    assert i.overlaps(F(2))
    out = Interval(F(1, 3), F(2, 3)).outward(F(1, 100))
    assert out.contains(Interval(F(1, 3), F(2, 3)))
    assert out.width <= F(1, 3) + F(1, 50)
    with pytest.raises(DomainError):
        Interval(1, 0)


def test_certified_series_geometric():
    # sum 2^-k = 2
    def terms():
        t = F(1)
        while True:
            yield t
            t /= 2

    enc = certified_series(terms(), lambda k: F(1, 2), F(1, 10**9))
    assert 2 in enc and enc.width <= F(1, 10**9)
