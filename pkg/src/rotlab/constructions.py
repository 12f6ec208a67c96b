"""Explicit approximation sequences that defeat the divergence criterion.

Given finite-stage evidence that theta admits denominators v with
dist(v * theta) <= 1 / (2 l^(2 tau + 2) v^tau), the classical construction
places a piecewise-constant psi with value 1/(2 (l+1)^2 v_{l+1}) on
[u_l, u_{l+1}), u_l = floor(l^(2 tau) v_l^tau).  The tau-th powers of psi
then sum to a constant per block (so sum psi^tau diverges) while the
criterion's truncated series gains at most 1/(l+1)^2 per block (so it
converges).  This module finds such witness subsequences among convergent
denominators and verifies every per-block inequality exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .cf_real import ConvergentTable, PartialQuotientStream
from .errors import (InputError, InternalInvariantError,
                     WitnessNotFoundError)
from .intervals import (DEFAULT_BITS, IntervalSum, RatInterval, as_fraction,
                        pow_interval, rational_pow_floor)
from .jsonfmt import frac_str, parse_frac
from .psi import Piecewise

TableLike = Union[ConvergentTable, PartialQuotientStream]


def _as_table(source: TableLike) -> ConvergentTable:
    if isinstance(source, ConvergentTable):
        return source
    return ConvergentTable(source)


@dataclass(frozen=True)
class TsengWitness:
    """Witness of L blocks: v and u have L+1 entries (block l needs
    v_{l+1}); psi is defined on [u_1, u_{L+1}) and errors past it."""

    tau: Fraction
    v: tuple
    u: tuple
    k_indices: tuple  # convergent indices the v were taken from ((-1,)*len when external)
    psi: Piecewise

    @property
    def blocks(self) -> int:
        return len(self.v) - 1

    def to_json(self) -> dict:
        return {"tau": frac_str(self.tau),
                "v": [str(x) for x in self.v],
                "u": [str(x) for x in self.u],
                "psi_values": [frac_str(w) for w in self.psi.values]}

    @classmethod
    def from_json(cls, obj: dict) -> "TsengWitness":
        tau = parse_frac(obj["tau"])
        v = tuple(int(x) for x in obj["v"])
        u = tuple(int(x) for x in obj["u"])
        psi = _assemble_psi(tau, v, u)
        given = [parse_frac(w) for w in obj.get("psi_values", [])]
        if given and tuple(given) != psi.values:
            raise InputError("psi_values inconsistent with (tau, v, u)")
        return cls(tau, v, u, (-1,) * len(v), psi)


def _condition_holds(dist_hi: Fraction, ell: int, v: int, tau: Fraction) -> bool:
    """dist_hi <= 1 / (2 ell^(2 tau + 2) v^tau), decided exactly via
    integer cross powers (valid for any rational tau)."""
    tn, td = tau.numerator, tau.denominator
    hn, hd = dist_hi.numerator, dist_hi.denominator
    lhs = (2 ** td) * (ell ** (2 * tn + 2 * td)) * (v ** tn) * (hn ** td)
    return lhs <= hd ** td


def _u_of(ell: int, v: int, tau: Fraction) -> int:
    # floor(ell^(2 tau) v^tau) = floor((ell^2 v)^tau)
    return rational_pow_floor(Fraction(ell * ell * v), tau)


def _assemble_psi(tau: Fraction, v: tuple, u: tuple) -> Piecewise:
    values = tuple(Fraction(1, 2 * (ell + 1) ** 2 * v[ell])
                   for ell in range(1, len(v)))
    return Piecewise(u, values, tail="error")


def find_witness_sequence(source: TableLike, tau: Fraction, L: int,
                          max_depth: int = 2048) -> TsengWitness:
    """Greedy search over convergent denominators: for each l pick the
    first unused k whose distance upper bound meets the condition, also
    enforcing v_{l+1} >= 2 v_l.  Failing within max_depth raises
    WitnessNotFoundError (consistent with theta not admitting a witness at
    all: best approximations minimize the distance at given size, so the
    search space is not the bottleneck)."""
    tau = as_fraction(tau)
    if tau < 1:
        raise InputError("tau must be >= 1")
    if L < 1:
        raise InputError("need at least one block")
    table = _as_table(source)
    vs: list = []
    ks: list = []
    k = 0
    for ell in range(1, L + 2):
        while True:
            if k > max_depth:
                raise WitnessNotFoundError(
                    f"no v_{ell} with the required distance bound among "
                    f"convergents up to depth {max_depth}")
            if not table.available(k + 1):
                raise WitnessNotFoundError(
                    f"stream ends at depth {k}; no v_{ell} found")
            q = table.q(k)
            if vs and q < 2 * vs[-1]:
                k += 1
                continue
            dist_hi = table.dist(
                k, max_width=Fraction(1, table.q(k + 1) << 40)).hi
            if _condition_holds(dist_hi, ell, q, tau):
                vs.append(q)
                ks.append(k)
                k += 1
                break
            k += 1
    v = tuple(vs)
    u = tuple(_u_of(ell, v[ell - 1], tau) for ell in range(1, L + 2))
    if any(b <= a for a, b in zip(u, u[1:])):
        raise InternalInvariantError(f"u not strictly increasing: {u}")
    return TsengWitness(tau, v, u, tuple(ks), _assemble_psi(tau, v, u))


# ---------------------------------------------------------------------------
# Validation


@dataclass
class WitnessBlockRow:
    ell: int
    psi_tau_sum: RatInterval     # sum of psi(n)^tau over the block
    h_sum: RatInterval           # sum of min(psi(n), dist) over the block
    split_first: Fraction        # v_{l+1} psi(u_l), exactly 1/(2(l+1)^2)
    split_second_hi: Fraction    # u_{l+1} * upper(dist at v_{l+1})
    h_bound: Fraction            # 1/(l+1)^2
    holds: bool

    def to_json(self) -> dict:
        return {"ell": self.ell,
                "psi_tau_sum": [frac_str(self.psi_tau_sum.lo),
                                frac_str(self.psi_tau_sum.hi)],
                "h_sum": [frac_str(self.h_sum.lo), frac_str(self.h_sum.hi)],
                "split_first": frac_str(self.split_first),
                "split_second_hi": frac_str(self.split_second_hi),
                "h_bound": frac_str(self.h_bound),
                "holds": self.holds}


@dataclass
class WitnessValidation:
    rows: list
    c_lower: Fraction       # uniform lower bound on the psi^tau block sums
    psi_monotone: bool
    all_hold: bool

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows],
                "c_lower": frac_str(self.c_lower),
                "psi_monotone": self.psi_monotone,
                "all_hold": self.all_hold}


def _h_sum_over(table: ConvergentTable, witness: TsengWitness, lo: int,
                hi: int, bits: int) -> RatInterval:
    """Exact-width enclosure of sum_{n=lo}^{hi} min(psi(n), dist_{k(n)}),
    split into maximal segments of constant (psi piece, convergent block)."""
    acc = IntervalSum(bits)
    n = lo
    while n <= hi:
        k = table.block_index(n)
        seg_end = min(hi, table.q(k + 1) - 1)
        i = 0
        while i < len(witness.u) and witness.u[i] <= n:
            i += 1
        if i < len(witness.u):
            seg_end = min(seg_end, witness.u[i] - 1)
        count = seg_end - n + 1
        dist = table.dist(k, max_width=Fraction(1, count << bits))
        psi_val = witness.psi.piece_value(n)
        acc.add(dist.min_with(RatInterval.point(psi_val)) * count)
        n = seg_end + 1
    return acc.result()


def validate_counterexample(witness: TsengWitness, source: TableLike,
                            bits: int = DEFAULT_BITS) -> WitnessValidation:
    """Exact per-block verification of the defining displays.

    For each block l: sum psi^tau >= c (constant per block reported), and
    the h-sum is at most v_{l+1} psi(u_l) + u_{l+1} dist(v_{l+1} theta)
    <= 1/(l+1)^2, split at v_{l+1}.  A violated display is an
    InternalInvariantError: the construction guarantees these whenever the
    distance condition holds, so failure means a bug, not mathematics."""
    table = _as_table(source)
    tau, v, u = witness.tau, witness.v, witness.u
    # re-check the defining distance condition for each stored l
    k_of_v = {}
    for i, vl in enumerate(v, start=1):
        k = _find_denominator_index(table, vl)
        if k is None:
            raise InputError(f"witness v_{i} = {vl} is not a convergent "
                             f"denominator of this stream")
        k_of_v[i] = k
        dist_hi = table.dist(k, max_width=Fraction(1, table.q(k + 1) << 40)).hi
        if not _condition_holds(dist_hi, i, vl, tau):
            raise InputError(
                f"witness v_{i} = {vl} fails its distance condition")
    rows = []
    c_lower: Optional[Fraction] = None
    all_hold = True
    for ell in range(1, witness.blocks + 1):
        u_l, u_l1 = u[ell - 1], u[ell]
        v_l1 = v[ell]
        w = witness.psi.values[ell - 1]
        count = u_l1 - u_l
        psi_tau = pow_interval(w, tau, bits) * count
        h_bound = Fraction(1, (ell + 1) ** 2)
        split_first = v_l1 * witness.psi.piece_value(u_l)
        if split_first != Fraction(1, 2 * (ell + 1) ** 2):
            raise InternalInvariantError(
                f"block {ell}: v_(l+1) psi(u_l) = {split_first} != "
                f"1/(2 (l+1)^2)")
        kv = k_of_v[ell + 1]
        dist_v = table.dist(kv, max_width=Fraction(1, u_l1 << bits))
        split_second_hi = u_l1 * dist_v.hi
        # second split term is itself at most 1/(2 (l+1)^2):
        # u_{l+1} <= (l+1)^(2 tau) v_{l+1}^tau exactly (floor definition),
        # and the distance condition bounds dist by the reciprocal scale
        second_ok = split_second_hi <= Fraction(1, 2 * (ell + 1) ** 2)
        h_sum = _h_sum_over(table, witness, u_l, u_l1 - 1, bits)
        # the split inequality itself, then the final bound
        mid = min(max(v_l1, u_l), u_l1)
        part1 = _h_sum_over(table, witness, u_l, mid - 1, bits) \
            if mid > u_l else RatInterval.point(Fraction(0))
        part2 = _h_sum_over(table, witness, mid, u_l1 - 1, bits) \
            if mid < u_l1 else RatInterval.point(Fraction(0))
        split_ok = part1.hi <= split_first and part2.hi <= u_l1 * dist_v.lo
        final_ok = h_sum.hi <= h_bound
        holds = bool(second_ok and split_ok and final_ok)
        if not holds:
            raise InternalInvariantError(
                f"block {ell}: display violated (second_ok={second_ok}, "
                f"split_ok={split_ok}, final_ok={final_ok})")
        rows.append(WitnessBlockRow(ell, psi_tau, h_sum, split_first,
                                    split_second_hi, h_bound, holds))
        c_lower = psi_tau.lo if c_lower is None else min(c_lower, psi_tau.lo)
        all_hold = all_hold and holds
    mono = all(w2 <= w1 for w1, w2 in
               zip(witness.psi.values, witness.psi.values[1:]))
    if not mono:
        raise InternalInvariantError("witness psi not non-increasing")
    return WitnessValidation(rows, c_lower, mono, all_hold)


def _find_denominator_index(table: ConvergentTable, v: int) -> Optional[int]:
    k = 0
    while True:
        q = table.q(k)
        if q > v:
            return None
        if q == v:
            if v == 1 and k == 0 and table.q(1) == 1:
                return 1  # q_0 = q_1 = 1: the later index carries dist(theta)
            return k
        k += 1


def witness_to_json_file(witness: TsengWitness, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(witness.to_json(), fh, sort_keys=True, indent=2)
        fh.write("\n")
