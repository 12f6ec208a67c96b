"""Directed-rounding enclosures and interval algebra."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gmpy2

from rotlab.errors import InputError
from rotlab.intervals import (IntervalSum, RatInterval, euler_gamma_interval,
                              harmonic_interval, iroot_floor, log_interval,
                              pow_interval, rational_pow_floor, round_down,
                              round_up)

rats = st.fractions(min_value=-8, max_value=8, max_denominator=256)


def test_rounding_brackets_value():
    x = Fraction(355, 113)
    lo, hi = round_down(x, 20), round_up(x, 20)
    assert lo <= x <= hi
    assert hi - lo <= Fraction(2, 1 << 20)
    assert round_down(Fraction(1, 2), 4) == Fraction(1, 2)


@settings(max_examples=100, deadline=None)
@given(rats, rats, rats, rats)
def test_interval_arithmetic_contains_pointwise(a, b, c, d):
    x = RatInterval.hull(a, b)
    y = RatInterval.hull(c, d)
    for u in (x.lo, x.hi, x.mid):
        for v in (y.lo, y.hi, y.mid):
            assert (x + y).contains(u + v)
            assert (x - y).contains(u - v)
            assert (x * y).contains(u * v)
            assert x.min_with(y).contains(min(u, v))
            assert x.max_with(y).contains(max(u, v))


def test_three_valued_comparisons():
    a = RatInterval(Fraction(1), Fraction(2))
    b = RatInterval(Fraction(3), Fraction(4))
    assert a.strictly_below(b) is True
    assert b.strictly_below(a) is False
    assert a.strictly_below(RatInterval(Fraction(3, 2), Fraction(5))) is None
    assert a.at_most(Fraction(1)) is None
    assert a.at_most(Fraction(2)) is True
    assert b.at_most(a) is False


def test_reciprocal_and_division():
    x = RatInterval(Fraction(1, 3), Fraction(1, 2))
    r = x.reciprocal()
    assert (r.lo, r.hi) == (Fraction(2), Fraction(3))
    with pytest.raises(InputError):
        RatInterval(Fraction(-1), Fraction(1)).reciprocal()
    y = RatInterval(Fraction(1), Fraction(2)) / x
    assert y.contains(Fraction(3))


def test_compress_widens_outward():
    x = RatInterval(Fraction(10 ** 40 + 1, 3 ** 90), Fraction(10 ** 40 + 2, 3 ** 90))
    c = x.compress(64)
    assert c.lo <= x.lo and x.hi <= c.hi
    assert c.lo.denominator <= 1 << 64


def test_interval_sum_width_growth():
    acc = IntervalSum(bits=64)
    for n in range(1, 5001):
        acc.add(Fraction(1, n * n * 3 ** 60))  # forces compression
    res = acc.result()
    assert res.width <= Fraction(2 * 5000, 1 << 64)


def test_log_interval_encloses_mpfr_reference():
    x = Fraction(10, 3)
    iv = log_interval(x, 128)
    assert iv.width < Fraction(1, 2 ** 100)
    with gmpy2.context(precision=300):
        ref = Fraction(*gmpy2.log(gmpy2.mpq(10, 3)).as_integer_ratio())
    assert iv.lo <= ref <= iv.hi
    with pytest.raises(InputError):
        log_interval(Fraction(0), 64)


def test_pow_interval_integer_and_rational():
    assert pow_interval(Fraction(3, 2), Fraction(2)).lo == Fraction(9, 4)
    iv = pow_interval(Fraction(2), Fraction(1, 2), 128)
    assert iv.lo * iv.lo <= 2 <= iv.hi * iv.hi
    neg = pow_interval(Fraction(4), Fraction(-1, 2), 128)
    assert neg.contains(Fraction(1, 2))
    wide = pow_interval(RatInterval(Fraction(2), Fraction(3)), Fraction(-1), 64)
    assert (wide.lo, wide.hi) == (Fraction(1, 3), Fraction(1, 2))


def test_harmonic_bracket_against_exact_sums():
    # the Euler-Maclaurin bracket must contain the exact sum well past the
    # exact-cache switch
    exact = sum(Fraction(1, n) for n in range(1, 2001))
    iv = harmonic_interval(2000, 128)
    assert iv.lo < exact < iv.hi
    assert iv.width < Fraction(1, 10 ** 12)
    assert harmonic_interval(0).lo == 0
    assert harmonic_interval(512).is_point()


def test_euler_gamma_digits():
    iv = euler_gamma_interval(128)
    known = Fraction(5772156649015328606, 10 ** 19)
    assert iv.lo < known + Fraction(1, 10 ** 18)
    assert iv.hi > known - Fraction(1, 10 ** 18)


def test_integer_roots():
    assert iroot_floor(10 ** 18, 3) == 10 ** 6
    assert iroot_floor(26, 3) == 2
    assert rational_pow_floor(Fraction(10), Fraction(3, 2)) == 31
    assert rational_pow_floor(Fraction(4), Fraction(1, 2)) == 2
    assert rational_pow_floor(Fraction(99, 10), Fraction(2)) == 98


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 10 ** 6), st.integers(1, 5), st.integers(1, 4))
def test_rational_pow_floor_bracket(num, tn, td):
    base = Fraction(num, 7)
    expo = Fraction(tn, td)
    u = rational_pow_floor(base, expo)
    # u <= base^expo < u+1, checked via cross powers
    assert u ** td <= base ** tn if u >= 0 else True
    assert Fraction(u) ** td * base.denominator ** tn <= base.numerator ** tn
    assert Fraction(u + 1) ** td * base.denominator ** tn > base.numerator ** tn
