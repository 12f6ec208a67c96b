"""Approximation-sequence families: pointwise values, block sums, crossover."""

import random
from fractions import Fraction

import pytest

from rotlab.errors import InputError, PrecisionError
from rotlab.intervals import RatInterval
from rotlab.psi import (Khintchine, PhiConst, PhiLogPow, PhiPow, PhiTable,
                        Piecewise, PowerLaw, Table, crossover,
                        parse_fraction, parse_psi_spec, piecewise_from_json,
                        piecewise_to_json)

from _oracles import sqrt2_minus_1

import gmpy2


def test_power_law_exact_point():
    seq = PowerLaw(Fraction(1, 4), Fraction(1))
    v = seq.value(8)
    assert v.is_point() and v.lo == Fraction(1, 32)


def test_khintchine_logpow_value_matches_highprec_log():
    # oracle: 1/(2 (ln 2)^2) to 60 digits via mpfr at very high precision
    seq = Khintchine(PhiLogPow(Fraction(2)))
    v = seq.value(2, bits=256)
    assert v.width <= Fraction(1, 10 ** 12)
    with gmpy2.context(precision=400):
        truth = 1 / (2 * gmpy2.log(2) ** 2)
        assert v.lo <= Fraction(*truth.as_integer_ratio()) <= v.hi
    assert abs(v.mid - Fraction(10407, 10000)) < Fraction(1, 1000)


def test_block_sum_power_alpha1_exact_small():
    seq = PowerLaw(Fraction(1, 4), Fraction(1))
    s = seq.block_sum(2, 4)
    assert s.is_point() and s.lo == Fraction(13, 48)


def test_block_sum_constant():
    seq = PowerLaw(Fraction(3, 5), Fraction(0))
    s = seq.block_sum(7, 106)
    assert s.is_point() and s.lo == Fraction(3, 5) * 100


def test_block_sum_inverse_square_against_direct():
    seq = PowerLaw(Fraction(1), Fraction(2))
    a, b = 10, 10 ** 6
    enc = seq.block_sum(a, b)
    assert enc.width < seq.value(a).lo
    # oracle: direct summation at lower scale must land inside the bracket
    direct = sum(Fraction(1, n * n) for n in range(a, 2001))
    tail_hi = enc.hi - 0  # whole-range enclosure
    assert direct < tail_hi
    # the two-piece additivity: [10,2000] + [2001,b] vs [10,b]
    left = seq.block_sum(a, 2000)
    right = seq.block_sum(2001, b)
    combo = left + right
    assert combo.lo <= enc.hi and enc.lo <= combo.hi
    assert left.lo <= direct <= left.hi


def test_block_sum_harmonic_large_vs_exact_prefix():
    seq = PowerLaw(Fraction(1), Fraction(1))
    # exact harmonic cache vs Euler-Maclaurin bracket across the switch
    exact = seq.block_sum(1, 512)
    assert exact.is_point()
    em = seq.block_sum(1, 513)
    truth = exact.lo + Fraction(1, 513)
    assert em.lo <= truth <= em.hi
    big = seq.block_sum(10 ** 6, 10 ** 12)
    assert big.width < Fraction(1, 10 ** 15)


def test_khintchine_const_is_scaled_harmonic():
    seq = Khintchine(PhiConst(Fraction(4)))
    s = seq.block_sum(2, 4)
    assert s.is_point() and s.lo == Fraction(13, 48)


def test_khintchine_logpow_blocksum_brackets_termwise():
    seq = Khintchine(PhiLogPow(Fraction(2)))
    a, b = 70000, 170000  # above the termwise cap: integral bracket path
    enc = seq.block_sum(a, b)
    sampled = seq._termwise(a, a + 1000, bits=96)
    rest = seq.block_sum(a + 1001, b)
    assert enc.lo <= (sampled + rest).hi and (sampled + rest).lo <= enc.hi


def test_block_sum_additivity():
    # split sums agree with the whole within combined widths; exactly for
    # exact families
    exact_families = [
        PowerLaw(Fraction(1, 4), Fraction(1)),
        PowerLaw(Fraction(2), Fraction(0)),
        Piecewise((1, 6, 30), (Fraction(1, 2), Fraction(1, 3)),
                  tail="hold-last"),
        Table(tuple(Fraction(1, 1 + n // 4) for n in range(64)),
              tail="hold-last"),
    ]
    for seq in exact_families:
        whole = seq.block_sum(2, 40)
        split = seq.block_sum(2, 17) + seq.block_sum(18, 40)
        assert whole.is_point() and split.is_point()
        assert whole.lo == split.lo
    fuzzy = Khintchine(PhiLogPow(Fraction(2)))
    whole = fuzzy.block_sum(2, 400)
    split = fuzzy.block_sum(2, 99) + fuzzy.block_sum(100, 400)
    assert abs(whole.mid - split.mid) <= whole.width + split.width


def test_piecewise_eval_and_sums():
    seq = Piecewise((1, 5, 9), (Fraction(1, 2), Fraction(1, 3)))
    assert seq.value(1).lo == Fraction(1, 2)
    assert seq.value(4).lo == Fraction(1, 2)
    assert seq.value(5).lo == Fraction(1, 3)
    s = seq.block_sum(1, 8)
    assert s.is_point() and s.lo == 4 * Fraction(1, 2) + 4 * Fraction(1, 3)
    with pytest.raises(InputError):
        seq.value(9)
    held = Piecewise((1, 5, 9), (Fraction(1, 2), Fraction(1, 3)), tail="hold-last")
    assert held.value(100).lo == Fraction(1, 3)
    assert held.block_sum(9, 12).lo == 4 * Fraction(1, 3)


def test_table_tail_rules():
    seq = Table((Fraction(1), Fraction(1, 2), Fraction(1, 2)))
    assert seq.value(3).lo == Fraction(1, 2)
    with pytest.raises(InputError):
        seq.value(4)
    held = Table((Fraction(1), Fraction(1, 2)), tail="hold-last")
    assert held.value(100).lo == Fraction(1, 2)
    assert held.block_sum(1, 4).lo == Fraction(1) + 3 * Fraction(1, 2)
    with pytest.raises(InputError):
        Table((Fraction(1), Fraction(2)))  # increasing


def test_monotone_on_random_indices():
    rng = random.Random(5)
    families = [
        PowerLaw(Fraction(2, 3), Fraction(1)),
        PowerLaw(Fraction(1), Fraction(3, 2)),
        Khintchine(PhiConst(Fraction(2))),
        Khintchine(PhiPow(Fraction(1, 2))),
        Khintchine(PhiLogPow(Fraction(2))),
        Piecewise((1, 10, 100, 1000), (Fraction(3), Fraction(2), Fraction(1)),
                  tail="hold-last"),
    ]
    for seq in families:
        # spot monotonicity: upper(n+1) <= upper(n) fails only if psi rises
        for _ in range(200):
            n = rng.randint(1, 10 ** 4)
            v0, v1 = seq.value(n, 96), seq.value(n + 1, 96)
            assert v1.lo <= v0.hi
            # decidable non-increase at a coarser resolution
            assert v1.lo <= v0.hi + Fraction(1, 2 ** 64)


def test_khintchine_flag_n_psi_non_increasing():
    seq = Khintchine(PhiPow(Fraction(1, 2)))
    rng = random.Random(6)
    for _ in range(200):
        n = rng.randint(2, 10 ** 4)
        a = seq.value(n, 96) * n
        b = seq.value(n + 1, 96) * (n + 1)
        assert b.lo <= a.hi


def test_crossover_against_linear_scan():
    rng = random.Random(9)
    seq = PowerLaw(Fraction(1, 3), Fraction(1))
    for trial in range(30):
        lo = rng.randint(1, 500)
        hi = lo + (10 ** 4 if trial < 3 else rng.randint(0, 2000))
        thr = RatInterval.point(Fraction(rng.randint(1, 50), rng.randint(51, 5000)))
        got = crossover(seq, lo, hi, thr)
        want = hi + 1
        for n in range(lo, hi + 1):
            if seq.value(n).hi < thr.lo:
                want = n
                break
        assert got == want


def test_crossover_examples():
    # threshold 3 - 2 sqrt2 enclosed: oracle comparison 1/8 < 3-2sqrt2 done
    # in Q(sqrt 2): (3 - 1/8)^2 = 529/64 > 8 = (2 sqrt2)^2
    theta = sqrt2_minus_1()
    d = (theta * 2 - 1).dist_to_nearest_int()  # 3 - 2 sqrt 2
    assert QuadLT(Fraction(1, 8), d)
    thr = RatInterval(Fraction(17157, 10 ** 5), Fraction(17158, 10 ** 5))
    seq = PowerLaw(Fraction(1, 4), Fraction(1))
    assert crossover(seq, 2, 4, thr) == 2
    # psi == 1 and threshold <= 1: no crossover
    ones = PowerLaw(Fraction(1), Fraction(0))
    assert crossover(ones, 3, 9, RatInterval.point(Fraction(1))) == 10
    # threshold above psi(lo): immediate
    assert crossover(seq, 5, 9, RatInterval.point(Fraction(1))) == 5


def QuadLT(frac, surd):
    return (surd - frac).sign() > 0


def test_crossover_precision_error_names_index():
    seq = Khintchine(PhiLogPow(Fraction(2)))
    v = seq.value(77, 512)
    thr = RatInterval(v.lo, v.hi)  # overlapping by construction
    with pytest.raises(PrecisionError) as err:
        crossover(seq, 77, 77, thr, bits=64, max_bits=128)
    assert "77" in str(err.value)


def test_spec_parsing_roundtrip():
    seq = parse_psi_spec("power:c=1/4,alpha=1")
    assert isinstance(seq, PowerLaw) and seq.c == Fraction(1, 4)
    kh = parse_psi_spec("khintchine:phi=logpow:2")
    assert isinstance(kh, Khintchine) and isinstance(kh.phi, PhiLogPow)
    pw = piecewise_from_json({"breaks": [1, 4, 7], "values": ["1/2", "1/3"]})
    assert piecewise_to_json(pw) == {"breaks": [1, 4, 7],
                                     "values": ["1/2", "1/3"],
                                     "tail": "error"}
    assert parse_fraction("7") == 7
    with pytest.raises(InputError):
        parse_psi_spec("mystery:1")


def test_divergence_flags():
    assert PowerLaw(Fraction(1, 5), Fraction(1)).sum_diverges() is True
    assert PowerLaw(Fraction(1), Fraction(1, 2)).sum_diverges() is True
    assert PowerLaw(Fraction(1), Fraction(2)).sum_diverges() is False
    assert Khintchine(PhiConst(Fraction(2))).sum_diverges() is True
    assert Khintchine(PhiPow(Fraction(1))).sum_diverges() is False
    assert Khintchine(PhiLogPow(Fraction(1))).sum_diverges() is True
    assert Khintchine(PhiLogPow(Fraction(2))).sum_diverges() is False
    assert Table((Fraction(1),), tail="hold-last").sum_diverges() is True
    assert Table((Fraction(1),)).sum_diverges() is None


def test_tail_bounds():
    seq = PowerLaw(Fraction(1), Fraction(2))
    up = seq.tail_sum_upper(100)
    # sum_{n>=100} 1/n^2 is about 0.01005
    assert Fraction(1, 100) < up < Fraction(2, 100)
    assert PowerLaw(Fraction(1), Fraction(1)).tail_sum_upper(10) is None


def test_phi_table_validation():
    with pytest.raises(InputError):
        PhiTable((Fraction(2), Fraction(1)))
    pt = PhiTable((Fraction(1), Fraction(2)))
    assert pt.bounded_above == 2
    assert pt.value(50).lo == 2
