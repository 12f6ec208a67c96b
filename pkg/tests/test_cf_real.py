"""Convergent recurrences, distance enclosures, certification."""

import random
from fractions import Fraction

import pytest

from rotlab.cf_real import (ConvergentTable, ExplicitStream,
                            PeriodicStream, RuleStream, certify_from_rational,
                            enclose_theta, golden_stream, iterate_convergents,
                            next_convergent, parse_stream_spec, rational_cf,
                            seed_state, sqrt2m1_stream, stream_from_json)
from rotlab.errors import DepthExceededError, InputError

from _oracles import golden_theta, sqrt2_minus_1


def fib():
    a, b = 1, 1
    while True:
        yield a
        a, b = b, a + b


def test_golden_denominators_are_fibonacci():
    states = list(iterate_convergents(golden_stream(), 7))
    qs = [st.q for st in states]
    assert qs == [1, 1, 2, 3, 5, 8, 13]
    ps = [st.p for st in states]
    assert ps == [0, 1, 1, 2, 3, 5, 8]


def test_sqrt2_convergent_and_distance():
    # oracle: theta = sqrt(2)-1, exact in Q(sqrt 2)
    table = ConvergentTable(sqrt2m1_stream())
    assert (table.p(2), table.q(2)) == (2, 5)
    theta = sqrt2_minus_1()
    # |q_1 theta - p_1| = |2(sqrt2 - 1) - 1| = 3 - 2 sqrt2
    d1 = (theta * 2 - 1).dist_to_nearest_int()
    dist = table.dist(1, max_width=Fraction(1, 10 ** 12))
    assert d1 >= dist.lo and d1 <= dist.hi
    # q_2 * dist_1 lands in [1/2, 1]
    prod = d1 * 5
    assert prod >= Fraction(1, 2) and prod <= 1
    assert 5 * dist.lo >= Fraction(1, 2) and 5 * dist.hi <= 1


def test_determinant_alternates_fifty_steps():
    rng = random.Random(7)
    for _ in range(5):
        stream = ExplicitStream(0, tuple(rng.randint(1, 9) for _ in range(52)))
        st = seed_state()
        prev = st
        for _ in range(50):
            nxt = next_convergent(stream, prev)
            det = nxt.p * prev.q - prev.p * nxt.q
            assert det in (1, -1)
            # consecutive determinants alternate
            prev = nxt


def test_dist_bracket_and_doubling_rule():
    for stream in (golden_stream(), sqrt2m1_stream(),
                   RuleStream(0, "doubling", ()), RuleStream(0, "arith", (1, 1))):
        table = ConvergentTable(stream)
        for k in range(0, 25):
            dist = table.dist(k)
            qk, qk1 = table.q(k), table.q(k + 1)
            assert Fraction(1, qk1 + qk) <= dist.lo
            assert dist.hi <= Fraction(1, qk1)
            if k >= 1:
                assert table.q(k + 1) >= 2 * table.q(k - 1)


def test_dist_tightening_reduces_width():
    table = ConvergentTable(golden_stream())
    loose = table.dist(3)
    tight = table.dist(3, max_width=Fraction(1, 10 ** 30))
    assert tight.width <= Fraction(1, 10 ** 30)
    assert tight.lo >= loose.lo and tight.hi <= loose.hi
    # the golden distance |q_3 theta - p_3| = |3 theta - 2| exactly
    exact = (golden_theta() * 3 - 2).dist_to_nearest_int()
    assert exact >= tight.lo and exact <= tight.hi


def test_dist_upper_bounds_strictly_decrease():
    table = ConvergentTable(golden_stream())
    uppers = [table.dist(k).hi for k in range(20)]
    assert all(b < a for a, b in zip(uppers, uppers[1:]))


def test_depth_exceeded_on_finite_stream():
    stream = ExplicitStream(0, (1,))
    st = next_convergent(stream, seed_state())  # k=0
    st = next_convergent(stream, st)            # k=1 consumes a_1
    with pytest.raises(DepthExceededError):
        next_convergent(stream, st)
    with pytest.raises(DepthExceededError):
        enclose_theta(stream, Fraction(1, 10 ** 6))


def test_enclose_theta_golden():
    enc = enclose_theta(golden_stream(), Fraction(1, 10 ** 6))
    assert enc.width <= Fraction(1, 10 ** 6)
    target = Fraction(6180339887, 10 ** 10)
    assert enc.lo < target < enc.hi
    # surrogate is inside the bracket and agrees with theta to the width
    assert enc.lo <= enc.surrogate <= enc.hi


def test_enclose_theta_sqrt2():
    enc = enclose_theta(sqrt2m1_stream(), Fraction(1, 10 ** 10))
    assert enc.width <= Fraction(1, 10 ** 10)
    theta = sqrt2_minus_1()
    assert theta > enc.lo and theta < enc.hi
    # decimal prefix 0.4142135623 as stated by the classical constant
    assert (enc.lo * 10 ** 10).__floor__() == 4142135623


def test_best_approximation_brute_force():
    # min over 1 <= n < q_{k+1} of dist(n*theta) is attained at n = q_k
    table = ConvergentTable(golden_stream())
    K = 9
    width = Fraction(1, 2 * table.q(K + 1) ** 2 * 10 ** 6)
    theta_hat = table.surrogate(width, min_depth=K + 6)
    for k in range(2, K):
        qk, qk1 = table.q(k), table.q(k + 1)
        best_n, best_d = None, None
        for n in range(1, qk1):
            x = (n * theta_hat) % 1
            d = min(x, 1 - x)
            if best_d is None or d < best_d:
                best_n, best_d = n, d
        assert best_n == qk


def test_block_index_handles_duplicate_unit_denominators():
    table = ConvergentTable(golden_stream())
    # q_0 = q_1 = 1: n=1 belongs to block k=1
    assert table.block_index(1) == 1
    assert table.block_index(2) == 2
    assert table.block_index(4) == 3
    assert table.block_index(5) == 4
    t2 = ConvergentTable(sqrt2m1_stream())
    assert t2.block_index(1) == 0  # q_0 = 1, q_1 = 2
    assert t2.block_index(2) == 1


def test_certify_sqrt2_prefix():
    # oracle: Euclid on both interval endpoints, longest common prefix
    stream = certify_from_rational(414213562, 10 ** 9, Fraction(1, 10 ** 9))
    assert stream.certified_depth >= 8
    for k in range(1, 9):
        assert stream.quotient(k) == 2
    with pytest.raises(DepthExceededError):
        stream.quotient(stream.certified_depth + 1)


def test_certify_golden_prefix():
    stream = certify_from_rational(618033988, 10 ** 9, Fraction(1, 10 ** 9))
    assert stream.certified_depth >= 8
    assert all(stream.quotient(k) == 1 for k in range(1, 9))


def test_certify_halfpoint_certifies_nothing():
    # reals just above 1/2 start [0;1,...], just below start [0;2,...]:
    # no quotient is shared by the whole interval
    stream = certify_from_rational(1, 2, Fraction(1, 1000))
    assert stream.certified_depth == 0


def test_certify_roundtrip_contains_input():
    rng = random.Random(3)
    for _ in range(20):
        den = rng.randint(1000, 10 ** 6)
        num = rng.randint(1, den - 1)
        stream = certify_from_rational(num, den, Fraction(1, 10 ** 9))
        if stream.certified_depth < 2:
            continue
        enc = enclose_theta(ExplicitStream(0, stream.quotients),
                            Fraction(1, 1))
        assert enc.lo <= Fraction(num, den) <= enc.hi


def test_certified_consistency_every_real_shares_prefix():
    # sample rationals inside the certified interval; their CF must start
    # with the certified prefix
    num, den, unc = 414213562, 10 ** 9, Fraction(1, 10 ** 7)
    stream = certify_from_rational(num, den, unc)
    d = stream.certified_depth
    assert d >= 1
    x = Fraction(num, den)
    rng = random.Random(11)
    for _ in range(50):
        t = Fraction(rng.randint(0, 10 ** 6), 10 ** 6)
        y = x - unc + 2 * unc * t
        cf = rational_cf(y)[1:]
        assert tuple(cf[:d]) == stream.quotients[:len(cf)] or \
            tuple(cf[:d]) == stream.quotients[:d]


def test_stream_json_and_spec_parsing():
    s1 = stream_from_json({"a0": 0, "list": [1, 2, 3]})
    assert isinstance(s1, ExplicitStream) and s1.quotients == (1, 2, 3)
    s2 = stream_from_json({"a0": 0, "pre": [2], "period": [1, 4]})
    assert isinstance(s2, PeriodicStream)
    assert [s2.quotient(k) for k in range(1, 6)] == [2, 1, 4, 1, 4]
    s3 = stream_from_json({"rule": "const", "params": {"c": 3}})
    assert s3.quotient(17) == 3 and s3.bound == 3
    s4 = parse_stream_spec("rule:doubling")
    assert s4.quotient(5) == 32 and s4.bound is None
    s5 = parse_stream_spec("rule:arith:1,1")
    assert [s5.quotient(k) for k in (1, 2, 3)] == [2, 3, 4]
    s6 = parse_stream_spec("periodic:pre=1,2;period=3")
    assert [s6.quotient(k) for k in range(1, 5)] == [1, 2, 3, 3]
    with pytest.raises(InputError):
        parse_stream_spec("nope")
    with pytest.raises(InputError):
        stream_from_json({"a0": 0, "list": [0, 1]})


def test_periodic_bound_and_rule_bound():
    assert PeriodicStream(0, (5,), (1, 2)).bound == 5
    assert RuleStream(0, "const", (4,)).bound == 4
    assert RuleStream(0, "arith", (2, 0)).bound == 2
    assert RuleStream(0, "arith", (2, 1)).bound is None
    assert ExplicitStream(0, (9, 9)).bound is None
