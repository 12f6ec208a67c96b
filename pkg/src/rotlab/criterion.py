"""The block-sum divergence criterion and its specializations.

The central series sums, over convergent blocks [q_k, q_{k+1}), the
truncated terms min(psi(n), dist_k) with dist_k = |q_k theta - p_k| (the
nearest-integer distance for every k whose block is non-empty; see
cf_real).  Whether the full series diverges decides whether
the rotation orbit hits the shrinking targets B(n*theta, psi(n)) around
almost every point infinitely often; only finite partial sums are
computable, so this module separates partial-sum evidence from the two
analytically backed divergence certificates and one convergence
certificate.

Certificate rules:
  (a) diverges-certified: the stream proves a_k <= A for all k (constant or
      periodic sources) and the psi family proves sum psi(n) = infinity;
      for such badly-approximable rotations divergence of sum psi is
      already sufficient.
  (b) diverges-certified: psi(n) = 1/(n phi(n)) with phi bounded above;
      such targets always capture almost every point.
  (c) converges-certified: the psi family proves a finite analytic tail
      bound, which dominates the remaining blocks termwise.
Everything else is reported as inconclusive trend data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .cf_real import ConvergentTable, PartialQuotientStream
from .errors import InputError, PrecisionError
from .intervals import (DEFAULT_BITS, RatInterval, as_fraction, log_interval,
                        pow_interval)
from .jsonfmt import frac_str, interval_json
from .psi import ApproxSeq, Khintchine, PhiSeq, crossover

MAX_BITS = 4096

TableLike = Union[ConvergentTable, PartialQuotientStream]


def _as_table(source: TableLike) -> ConvergentTable:
    if isinstance(source, ConvergentTable):
        return source
    return ConvergentTable(source)


# ---------------------------------------------------------------------------
# Single block


@dataclass(frozen=True)
class BlockTerm:
    """One block of the criterion series.

    value encloses sum_{n=q_k}^{q_{k+1}-1} min(psi(n), dist_k), computed as
    (q_star - q_k) * dist_k plus the psi block sum from the crossover index
    q_star (the first n in the block where psi drops below dist_k).
    """

    k: int
    q_k: int
    q_k1: int
    dist: RatInterval
    q_star: int
    value: RatInterval

    def to_json(self) -> dict:
        return {"k": self.k, "qk": str(self.q_k), "qk1": str(self.q_k1),
                "dist": interval_json(self.dist), "qstar": self.q_star,
                "value": interval_json(self.value)}


def block_term(source: TableLike, seq: ApproxSeq, k: int,
               bits: int = DEFAULT_BITS) -> BlockTerm:
    """Evaluate one block, refining the distance enclosure and psi precision
    until the crossover comparison is decided."""
    table = _as_table(source)
    table.ensure(k + 1)
    q_k, q_k1 = table.q(k), table.q(k + 1)
    length = q_k1 - q_k
    if length == 0:
        # only happens while q_0 = q_1 = 1
        return BlockTerm(k, q_k, q_k1, table.dist(k), q_k,
                         RatInterval.point(Fraction(0)))
    b = bits
    while True:
        dist = table.dist(k, max_width=Fraction(1, length << b))
        try:
            q_star = crossover(seq, q_k, q_k1 - 1, dist, bits=b,
                               max_bits=2 * b)
            break
        except PrecisionError:
            if b >= MAX_BITS:
                raise
            b *= 2
    value = dist * (q_star - q_k)
    if q_star <= q_k1 - 1:
        value = value + seq.block_sum(q_star, q_k1 - 1, b)
    return BlockTerm(k, q_k, q_k1, dist, q_star, value)


def block_term_bruteforce(source: TableLike, seq: ApproxSeq, k: int,
                          bits: int = DEFAULT_BITS,
                          cap: int = 10 ** 4) -> RatInterval:
    """Independent oracle: termwise sum of min(psi(n), dist_k) over the
    block.  Only for block lengths up to cap."""
    table = _as_table(source)
    q_k, q_k1 = table.q(k), table.q(k + 1)
    if q_k1 - q_k > cap:
        raise InputError(f"block {k} has length {q_k1 - q_k} > cap {cap}")
    dist = table.dist(k, max_width=Fraction(1, max(q_k1 - q_k, 1) << bits))
    total = RatInterval.point(Fraction(0))
    for n in range(q_k, q_k1):
        total = total + seq.value(n, bits).min_with(dist)
    return total


# ---------------------------------------------------------------------------
# Whole-series reports


@dataclass
class CriterionReport:
    kind: str
    K_max: int
    blocks: list
    partial_sums: list
    certificate: str
    reason: str

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "K_max": self.K_max,
            "blocks": [b.to_json() for b in self.blocks],
            "partial_sums": [interval_json(s) for s in self.partial_sums],
            "certificate": self.certificate,
            "reason": self.reason,
        }

    def csv_rows(self) -> list:
        head = ["k", "qk", "qk1", "dist_lo", "dist_hi", "qstar",
                "value_lo", "value_hi"]
        rows = [head]
        for b in self.blocks:
            rows.append([b.k, b.q_k, b.q_k1, frac_str(b.dist.lo),
                         frac_str(b.dist.hi), b.q_star,
                         frac_str(b.value.lo), frac_str(b.value.hi)])
        return rows


def _certificate(table: ConvergentTable, seq: ApproxSeq, K_max: int,
                 partial: RatInterval, bits: int) -> tuple[str, str]:
    bound = table.stream.bound
    if bound is not None and seq.sum_diverges() is True:
        return ("diverges-certified",
                f"partial quotients bounded by {bound} "
                f"({table.stream.describe()}) and the family "
                f"{seq.describe()} has divergent full sum; for "
                f"badly-approximable rotations that already forces the "
                f"criterion series to diverge")
    if isinstance(seq, Khintchine):
        cap = seq.phi.bounded_above
        if cap is not None:
            return ("diverges-certified",
                    f"Khintchine sequence with phi bounded above by {cap}; "
                    f"bounded phi keeps every block term of order 1/phi and "
                    f"the series diverges for every irrational rotation")
    tail = seq.tail_sum_upper(table.q(K_max + 1), bits)
    if tail is not None:
        total_hi = partial.hi + tail
        return ("converges-certified",
                f"blocks past K={K_max} are dominated termwise by "
                f"sum_(n>={table.q(K_max + 1)}) psi(n) <= {float(tail):.6g}; "
                f"series total <= {float(total_hi):.6g}")
    return ("inconclusive",
            f"no analytic certificate for ({table.stream.describe()}, "
            f"{seq.describe()}); partial sum after K={K_max} is "
            f"[{float(partial.lo):.6g}, {float(partial.hi):.6g}]")


def evaluate_criterion(source: TableLike, seq: ApproxSeq, K_max: int,
                       bits: int = DEFAULT_BITS) -> CriterionReport:
    """Partial sums S_0..S_K of the block series plus a certificate."""
    if K_max < 0:
        raise InputError("K_max must be >= 0")
    table = _as_table(source)
    blocks = []
    partials = []
    running = RatInterval.point(Fraction(0))
    for k in range(K_max + 1):
        bt = block_term(table, seq, k, bits)
        blocks.append(bt)
        running = (running + bt.value).compress(4 * bits)
        partials.append(running)
    cert, reason = _certificate(table, seq, K_max, running, bits)
    return CriterionReport("criterion", K_max, blocks, partials, cert, reason)


# ---------------------------------------------------------------------------
# Khintchine-form series: Log(min(phi(q_k), q_{k+1}/q_k)) / phi(q_k)


@dataclass(frozen=True)
class LogTerm:
    k: int
    q_k: int
    q_k1: int
    term: RatInterval

    def to_json(self) -> dict:
        return {"k": self.k, "qk": str(self.q_k), "qk1": str(self.q_k1),
                "term": interval_json(self.term)}


def _log_ratio_term(table: ConvergentTable, phi: PhiSeq, k: int,
                    bits: int) -> RatInterval:
    """Log(min(phi(q_k), q_{k+1}/q_k)) with Log x = max(log x, 0)."""
    q_k, q_k1 = table.q(k), table.q(k + 1)
    ratio = Fraction(q_k1, q_k)
    mn = phi.value(q_k, bits).min_with(RatInterval.point(ratio))
    if mn.hi <= 1:
        return RatInterval.point(Fraction(0))
    if mn.lo <= 0:
        # phi(1) may be 0 for the log-power family; the clamp keeps the
        # lower endpoint at Log(<=1) = 0
        return RatInterval(Fraction(0), log_interval(mn.hi, bits).hi)
    return log_interval(mn, bits).clamp_min(0)


def khintchine_series(source: TableLike, phi: PhiSeq, K_max: int,
                      bits: int = DEFAULT_BITS) -> CriterionReport:
    """Partial sums of Log(min(phi(q_k), q_{k+1}/q_k)) / phi(q_k)."""
    table = _as_table(source)
    blocks = []
    partials = []
    running = RatInterval.point(Fraction(0))
    for k in range(K_max + 1):
        num = _log_ratio_term(table, phi, k, bits)
        if num.hi == 0:
            term = RatInterval.point(Fraction(0))
        else:
            ph = phi.value(table.q(k), bits)
            if ph.lo <= 0:
                raise PrecisionError(
                    f"phi(q_{k}) not positively resolved at {bits} bits")
            term = num / ph
        blocks.append(LogTerm(k, table.q(k), table.q(k + 1), term))
        running = (running + term).compress(4 * bits)
        partials.append(running)
    cap = phi.bounded_above
    if cap is not None:
        cert, reason = ("diverges-certified",
                        f"phi bounded above by {cap}, so infinitely many "
                        f"solutions exist for every target; the log-form "
                        f"series with the clamped Log is a lower-order proxy")
    else:
        cert, reason = ("inconclusive",
                        f"partial sum after K={K_max} is "
                        f"[{float(running.lo):.6g}, {float(running.hi):.6g}]")
    return CriterionReport("khintchine", K_max, blocks, partials, cert, reason)


# ---------------------------------------------------------------------------
# Two-sided comparison between the block series and the log-form series


@dataclass(frozen=True)
class SandwichRow:
    k: int
    lower: RatInterval
    block: RatInterval
    upper: RatInterval
    lower_holds: bool
    upper_holds: bool

    def to_json(self) -> dict:
        return {"k": self.k, "lower": interval_json(self.lower),
                "block": interval_json(self.block),
                "upper": interval_json(self.upper),
                "lower_holds": self.lower_holds,
                "upper_holds": self.upper_holds}


@dataclass
class SandwichReport:
    k0: int
    rows: list
    all_hold: bool
    phi: str
    stream: str

    def to_json(self) -> dict:
        return {"k0": self.k0, "rows": [r.to_json() for r in self.rows],
                "all_hold": self.all_hold, "phi": self.phi,
                "stream": self.stream}


def _decide_le(a: RatInterval, b: RatInterval) -> Optional[bool]:
    # certainly a <= b / certainly not / undecided
    if a.hi <= b.lo:
        return True
    if a.lo > b.hi:
        return False
    return None


def find_k0(table: ConvergentTable, phi: PhiSeq, bits: int = DEFAULT_BITS,
            search_cap: int = 512) -> int:
    """First k with psi(q_k - 1) < dist_{k-1} decidably and phi(q_k) >= 16
    (the regime where the two-sided comparison below applies)."""
    seq = Khintchine(phi)
    for k in range(1, search_cap + 1):
        q_k = table.q(k)
        if q_k < 2:
            continue
        phi_ok = phi.value(q_k, bits).at_most(RatInterval.point(Fraction(16)))
        if phi_ok is not False:  # phi(q_k) < 16 or undecided
            continue
        dist_prev = table.dist(k - 1, max_width=Fraction(1, 1 << (2 * bits)))
        below = seq.value(q_k - 1, bits).strictly_below(dist_prev)
        if below is True:
            return k
        if below is None:
            raise PrecisionError(
                f"psi(q_{k}-1) vs dist_{k - 1} undecided at {bits} bits")
    raise PrecisionError(f"k0 not found within k <= {search_cap}")


def khintchine_equivalence_check(source: TableLike, phi: PhiSeq,
                                 count: int = 20,
                                 bits: int = DEFAULT_BITS) -> SandwichReport:
    """Check, for count blocks past k0, that the block term lies between
    Log(min(phi(q_k), q_{k+1}/q_k)) / (2 phi(q_{k+1})) and three times the
    same log term over phi(q_k).  Violations indicate implementation bugs,
    not a failure of the mathematics."""
    table = _as_table(source)
    if not phi.tends_to_infinity:
        raise InputError(
            f"hypothesis not met: phi family {phi.describe()} is bounded")
    seq = Khintchine(phi)
    k0 = find_k0(table, phi, bits)
    rows = []
    all_hold = True
    for k in range(k0 + 1, k0 + count + 1):
        b = bits
        while True:
            num = _log_ratio_term(table, phi, k, b)
            lower = num / (phi.value(table.q(k + 1), b) * 2)
            upper = (num / phi.value(table.q(k), b)) * 3
            mid = block_term(table, seq, k, b).value
            lo_ok = _decide_le(lower, mid)
            hi_ok = _decide_le(mid, upper)
            if lo_ok is not None and hi_ok is not None:
                break
            if b >= MAX_BITS:
                raise PrecisionError(
                    f"sandwich comparison undecided at k={k}, {b} bits")
            b *= 2
        rows.append(SandwichRow(k, lower, mid, upper, lo_ok, hi_ok))
        all_hold = all_hold and lo_ok and hi_ok
    return SandwichReport(k0, rows, all_hold, phi.describe(),
                          table.stream.describe())


# ---------------------------------------------------------------------------
# Lower-bound profile: c_K = min_{k<=K} q_k^tau * dist_k


@dataclass
class OmegaProfile:
    tau: Fraction
    rows: list  # (k, q_k, term interval, running min interval)
    floor: RatInterval
    evidence: str

    def to_json(self) -> dict:
        return {
            "tau": frac_str(self.tau),
            "rows": [{"k": k, "qk": str(qk), "term": interval_json(t),
                      "cmin": interval_json(c)} for k, qk, t, c in self.rows],
            "floor": interval_json(self.floor),
            "evidence": self.evidence,
        }


def omega_tau_profile(source: TableLike, tau: Fraction, K_max: int,
                      bits: int = DEFAULT_BITS) -> OmegaProfile:
    """Finite-stage profile of inf_n n^tau * dist(n theta), restricted to
    convergent denominators (valid because n^tau * dist(n theta) over a
    block is minimized at its left edge q_k).

    A positive stable floor is evidence that dist(n theta) >= c/n^tau can
    hold for some c > 0; decay towards zero is evidence against.  Neither
    is a verdict: only finitely many k are inspected.
    """
    tau = as_fraction(tau)
    if tau < 1:
        raise InputError("tau must be >= 1")
    table = _as_table(source)
    rows = []
    run: Optional[RatInterval] = None
    for k in range(K_max + 1):
        q_k = table.q(k)
        dist = table.dist(k, max_width=Fraction(1, table.q(k + 1) << 40))
        term = pow_interval(Fraction(q_k), tau, bits) * dist
        run = term if run is None else run.min_with(term)
        rows.append((k, q_k, term, run))
    evidence = ("floor positive and stable at finite stage (membership "
                "evidence, not a verdict)" if run.lo > 0 else
                "floor reached zero enclosure")
    return OmegaProfile(tau, rows, run, evidence)


# ---------------------------------------------------------------------------
# Eventually-periodic-free sufficient condition with witness (t_i, delta)


@dataclass(frozen=True)
class DecayPow:
    """phi(n) = c / n**beta with integer beta, exact rational values.

    Admissibility asks n*phi(n) non-increasing and 0 < n^2 phi(n) <= 1.
    """

    c: Fraction
    beta: int

    def __post_init__(self):
        object.__setattr__(self, "c", as_fraction(self.c))
        if self.c <= 0:
            raise InputError("decay coefficient must be positive")

    def value(self, n: int) -> Fraction:
        return self.c / Fraction(n) ** self.beta

    def describe(self) -> str:
        return f"decay:{self.c}/n^{self.beta}"


@dataclass(frozen=True)
class DeltaRule:
    """delta(n) = m*n + c (non-decreasing, unbounded for m >= 1)."""

    m: int = 1
    c: int = 0

    def __post_init__(self):
        if self.m < 1 or self.c < 0:
            raise InputError("delta needs slope >= 1 and offset >= 0")

    def value(self, n: int) -> int:
        return self.m * n + self.c

    def describe(self) -> str:
        return f"delta:{self.m}n+{self.c}"


def _tower_terms(base: int, ratio: int, count: int) -> list:
    return [base ** (ratio ** i) for i in range(1, count + 1)]


@dataclass
class KurzweilConditionReport:
    validated_to: int
    side_conditions: list  # (i, t_i, needed, ok)
    terms: list            # (i, t_i, M_i, term interval)
    partial_sums: list
    all_side_ok: bool

    def to_json(self) -> dict:
        return {
            "validated_to": self.validated_to,
            "side_conditions": [{"i": i, "t": str(t), "needed": frac_str(need),
                                 "ok": ok}
                                for i, t, need, ok in self.side_conditions],
            "terms": [{"i": i, "t": str(t), "M": str(m),
                       "term": interval_json(tm)}
                      for i, t, m, tm in self.terms],
            "partial_sums": [interval_json(s) for s in self.partial_sums],
            "all_side_ok": self.all_side_ok,
        }


def kurzweil_condition_eval(seq: ApproxSeq, phi: DecayPow, delta: DeltaRule,
                            t_seq: Sequence[int], i_max: Optional[int] = None,
                            bits: int = DEFAULT_BITS,
                            validate_to: int = 1024) -> KurzweilConditionReport:
    """Evaluate the witness series sum_i t_i psi(floor(1/(t_i phi(t_i
    delta(t_i))))) together with its side condition t_{i+1} >= 1/(t_i
    phi(t_i delta(t_i))).

    phi admissibility ((P1) n phi(n) non-increasing, (P2) 0 < n^2 phi(n)
    <= 1) is validated exactly on n = 1..validate_to and raises InputError
    naming the first offending n.
    """
    for n in range(1, validate_to + 1):
        v = phi.value(n)
        if not 0 < n * n * v <= 1:
            raise InputError(
                f"(P2) violated at n={n}: n^2 phi(n) = {n * n * v}")
        if n * v < (n + 1) * phi.value(n + 1):
            raise InputError(
                f"(P1) violated at n={n}: n phi(n) increases")
    t = list(t_seq)
    if i_max is not None:
        t = t[:i_max]
    if any(b <= a for a, b in zip(t, t[1:])):
        raise InputError("t_i must be strictly increasing")
    side = []
    terms = []
    partials = []
    running = RatInterval.point(Fraction(0))
    all_ok = True
    for i, ti in enumerate(t, start=1):
        x = Fraction(1) / (ti * phi.value(ti * delta.value(ti)))
        if i <= len(t) - 1:
            ok = Fraction(t[i]) >= x
            side.append((i, ti, x, ok))
            all_ok = all_ok and ok
        M = x.numerator // x.denominator
        term = seq.value(M, bits) * ti
        terms.append((i, ti, M, term))
        running = (running + term).compress(4 * bits)
        partials.append(running)
    return KurzweilConditionReport(validate_to, side, terms, partials, all_ok)
