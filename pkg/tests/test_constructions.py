"""Witness search and exact validation of the defeating sequences."""

from fractions import Fraction

import pytest

from rotlab.cf_real import ConvergentTable, RuleStream, golden_stream
from rotlab.constructions import (TsengWitness, find_witness_sequence,
                                  validate_counterexample)
from rotlab.criterion import evaluate_criterion
from rotlab.errors import InputError, WitnessNotFoundError
from rotlab.psi import Piecewise


def doubling():
    return RuleStream(0, "doubling", ())


def test_doubling_witness_structure():
    # a_{k+1} = 2^(k+1): the distance condition at block l needs roughly
    # a_{k+1} >= 2 l^4, so the greedy indices are forced
    wit = find_witness_sequence(doubling(), Fraction(1), 5)
    table = ConvergentTable(doubling())
    assert wit.blocks == 5
    assert len(wit.v) == len(wit.u) == 6
    assert wit.v[0] == 1
    assert wit.k_indices == (0, 4, 7, 8, 10, 11)
    for ell in range(1, 7):
        v = wit.v[ell - 1]
        assert wit.u[ell - 1] == ell * ell * v  # tau = 1
    for a, b in zip(wit.v, wit.v[1:]):
        assert b >= 2 * a
    # exact check of the defining inequality via 1/q_{k+1}
    for ell, k in zip(range(1, 7), wit.k_indices):
        assert table.q(k + 1) * 1 >= 2 * ell ** 4 * table.q(k)


def test_golden_has_no_witness_beyond_first_block():
    # bounded quotients keep q_{k+1}/q_k below 2 l^4 for l >= 2 forever
    with pytest.raises(WitnessNotFoundError):
        find_witness_sequence(golden_stream(), Fraction(1), 2, max_depth=300)


def test_golden_first_block_needs_v2_and_fails():
    # the l=1 condition dist <= 1/(2 v) is satisfiable for golden (at
    # q_1 = 1 the distance is 1 - theta < 1/2), but any block needs v_2 as
    # well, and 2 l^4 = 32 exceeds the golden quotient growth forever
    with pytest.raises(WitnessNotFoundError):
        find_witness_sequence(golden_stream(), Fraction(1), 1, max_depth=300)


def test_witness_psi_is_piecewise_and_monotone():
    wit = find_witness_sequence(doubling(), Fraction(1), 5)
    assert isinstance(wit.psi, Piecewise)
    assert wit.psi.piece_value(wit.u[0]) == Fraction(1, 2 * 4 * wit.v[1])
    vals = wit.psi.values
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(InputError):
        wit.psi.piece_value(wit.u[-1])  # tail rule: error


def test_validation_passes_and_reports_constants():
    wit = find_witness_sequence(doubling(), Fraction(1), 5)
    val = validate_counterexample(wit, doubling())
    assert val.all_hold and val.psi_monotone
    assert len(val.rows) == 5
    # split_first is exactly 1/(2 (l+1)^2)
    for row in val.rows:
        assert row.split_first == Fraction(1, 2 * (row.ell + 1) ** 2)
        assert row.h_sum.hi <= row.h_bound
        assert row.psi_tau_sum.lo >= val.c_lower
    # uniform constant near 1/2 for tau = 1
    assert Fraction(1, 4) < val.c_lower < Fraction(1, 2)


def test_validated_sums_defeat_divergence_at_finite_stage():
    stream = doubling()
    wit = find_witness_sequence(stream, Fraction(1), 5)
    val = validate_counterexample(wit, stream)
    table = ConvergentTable(stream)
    K = 0
    while table.q(K + 2) <= wit.u[-1]:
        K += 1
    rep = evaluate_criterion(table, wit.psi, K)
    cap = sum(Fraction(1, (ell + 1) ** 2) for ell in range(1, 6))
    assert rep.partial_sums[-1].hi <= cap
    # tau-power mass grows linearly: sum over blocks >= c * L
    total = sum((row.psi_tau_sum.lo for row in val.rows), Fraction(0))
    assert total >= val.c_lower * 5


def test_witness_json_roundtrip():
    wit = find_witness_sequence(doubling(), Fraction(1), 3)
    obj = wit.to_json()
    assert set(obj) == {"tau", "v", "u", "psi_values"}
    back = TsengWitness.from_json(obj)
    assert back.v == wit.v and back.u == wit.u
    assert back.psi.values == wit.psi.values
    # the witness JSON feeds the piecewise loader directly
    from rotlab.psi import piecewise_from_json
    pw = piecewise_from_json(obj)
    assert pw.breaks == wit.psi.breaks and pw.values == wit.psi.values
    bad = dict(obj)
    bad["psi_values"] = ["1/2"] * len(obj["psi_values"])
    with pytest.raises(InputError):
        TsengWitness.from_json(bad)


def test_validation_rejects_foreign_witness():
    wit = find_witness_sequence(doubling(), Fraction(1), 3)
    with pytest.raises(InputError):
        validate_counterexample(wit, golden_stream())


def test_doubling_admits_no_tau_three_halves_witness():
    # q_{k+1}/q_k = 2^(k+1) grows far slower than sqrt(q_k) ~ 2^(k^2/4), so
    # for tau = 3/2 the distance condition eventually fails at every k
    with pytest.raises(WitnessNotFoundError):
        find_witness_sequence(doubling(), Fraction(3, 2), 2, max_depth=24)


def _tau32_stream(L):
    # quotients chosen adaptively so that q_{k+1} >= 2 l^5 q_k^(3/2) at the
    # block where the greedy search arrives (a >= 2 l^5 sqrt(q_k) suffices),
    # with an infinite all-twos tail for distance tightening
    from math import isqrt
    pre = [2]
    q_prev, q = 1, 2
    for ell in range(2, L + 3):
        a = 2 * ell ** 5 * (isqrt(q) + 1)
        pre.append(a)
        q_prev, q = q, a * q + q_prev
    from rotlab.cf_real import PeriodicStream
    return PeriodicStream(0, tuple(pre), (2,))


def test_tau_three_halves_witness():
    # rational non-integer tau exercises the exact integer-root paths
    stream = _tau32_stream(3)
    wit = find_witness_sequence(stream, Fraction(3, 2), 3, max_depth=64)
    for ell, (v, u) in enumerate(zip(wit.v, wit.u), start=1):
        # u = floor((l^2 v)^(3/2)) exactly
        base = ell * ell * v
        assert u ** 2 <= base ** 3 < (u + 1) ** 2
    val = validate_counterexample(wit, stream)
    assert val.all_hold
    assert val.c_lower > 0
