"""Positive non-increasing approximation sequences with analytic block sums.

Block sums over [q_k, q_{k+1}) have exponentially growing lengths, so each
family must supply them analytically (or exactly, for piecewise/table
data); termwise summation is used only below a length cap, accumulating
through IntervalSum so widths stay below 2**-bits per term.

Only the families below are accepted; arbitrary user callables are not,
because their block sums could not be bounded rigorously.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import InputError, PrecisionError
from .intervals import (_HARMONIC_EXACT_MAX as _HARMONIC_EXACT_LIMIT,
                        DEFAULT_BITS, IntervalSum, RatInterval, as_fraction,
                        harmonic_interval, log_interval, pow_interval)

TERMWISE_CAP = 65536  # block lengths up to this are summed term by term


def parse_fraction(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# phi families (non-decreasing; used inside Khintchine sequences)


class PhiSeq:
    """Positive non-decreasing sequence phi(n)."""

    def value(self, n: int, bits: int = DEFAULT_BITS) -> RatInterval:
        raise NotImplementedError

    @property
    def tends_to_infinity(self) -> bool:
        raise NotImplementedError

    @property
    def bounded_above(self) -> Optional[Fraction]:
        """A proven upper bound valid for all n, or None."""
        return None

    def describe(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class PhiConst(PhiSeq):
    c: Fraction

    def __post_init__(self):
        if self.c <= 0:
            raise InputError("phi must be positive")

    def value(self, n, bits=DEFAULT_BITS):
        return RatInterval.point(self.c)

    @property
    def tends_to_infinity(self):
        return False

    @property
    def bounded_above(self):
        return self.c

    def describe(self):
        return f"const:{self.c}"


@dataclass(frozen=True)
class PhiPow(PhiSeq):
    beta: Fraction

    def __post_init__(self):
        if self.beta <= 0:
            raise InputError("power exponent must be positive")

    def value(self, n, bits=DEFAULT_BITS):
        return pow_interval(Fraction(n), self.beta, bits)

    @property
    def tends_to_infinity(self):
        return True

    def describe(self):
        return f"pow:{self.beta}"


@dataclass(frozen=True)
class PhiLogPow(PhiSeq):
    """(ln n)**beta; zero at n = 1, so Khintchine sequences built on it
    hold their n = 2 value at n = 1."""

    beta: Fraction

    def __post_init__(self):
        if self.beta <= 0:
            raise InputError("log-power exponent must be positive")

    def value(self, n, bits=DEFAULT_BITS):
        if n == 1:
            return RatInterval.point(0)
        ln = log_interval(n, bits)
        return pow_interval(ln, self.beta, bits)

    @property
    def tends_to_infinity(self):
        return True

    def describe(self):
        return f"logpow:{self.beta}"


@dataclass(frozen=True)
class PhiTable(PhiSeq):
    values: tuple
    hold_last: bool = True

    def __post_init__(self):
        vals = tuple(as_fraction(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals or any(v <= 0 for v in vals):
            raise InputError("phi table must be non-empty and positive")
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise InputError("phi table must be non-decreasing")

    def value(self, n, bits=DEFAULT_BITS):
        if n <= len(self.values):
            return RatInterval.point(self.values[n - 1])
        if self.hold_last:
            return RatInterval.point(self.values[-1])
        raise InputError(f"phi table has {len(self.values)} entries, n={n}")

    @property
    def tends_to_infinity(self):
        return False

    @property
    def bounded_above(self):
        return self.values[-1] if self.hold_last else None

    def describe(self):
        return f"table[{len(self.values)}]"


# ---------------------------------------------------------------------------
# psi families


class ApproxSeq:
    """Positive non-increasing sequence psi(n), n >= 1."""

    def value(self, n: int, bits: int = DEFAULT_BITS) -> RatInterval:
        raise NotImplementedError

    def block_sum(self, a: int, b: int, bits: int = DEFAULT_BITS) -> RatInterval:
        """Enclosure of sum_{n=a}^{b} psi(n); must hold 1 <= a <= b."""
        raise NotImplementedError

    @property
    def is_exact(self) -> bool:
        """True when value() always returns zero-width rationals."""
        return False

    def sum_diverges(self) -> Optional[bool]:
        """Analytic verdict on sum psi(n) = infinity, or None if no family
        rule applies."""
        return None

    def tail_sum_upper(self, n_from: int,
                       bits: int = DEFAULT_BITS) -> Optional[Fraction]:
        """Upper bound for sum_{n >= n_from} psi(n) when the family proves
        convergence; None otherwise."""
        return None

    def describe(self) -> str:
        return type(self).__name__

    # shared helpers

    def _termwise(self, a: int, b: int, bits: int) -> RatInterval:
        acc = IntervalSum(bits)
        for n in range(a, b + 1):
            acc.add(self.value(n, bits))
        return acc.result()

    def _check_range(self, a: int, b: int) -> None:
        if not 1 <= a <= b:
            raise InputError(f"bad block range [{a}, {b}]")


@dataclass(frozen=True)
class PowerLaw(ApproxSeq):
    """psi(n) = c / n**alpha with c > 0, alpha >= 0."""

    c: Fraction
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", as_fraction(self.c))
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if self.c <= 0 or self.alpha < 0:
            raise InputError("power law needs c > 0 and alpha >= 0")

    @property
    def is_exact(self):
        return self.alpha.denominator == 1

    def value(self, n, bits=DEFAULT_BITS):
        if self.alpha.denominator == 1:
            return RatInterval.point(self.c / Fraction(n) ** self.alpha.numerator)
        return pow_interval(Fraction(n), -self.alpha, bits) * self.c

    def block_sum(self, a, b, bits=DEFAULT_BITS):
        self._check_range(a, b)
        if self.alpha == 0:
            return RatInterval.point(self.c * (b - a + 1))
        if self.alpha == 1:
            # harmonic differences are exact for small b but carry the
            # Euler-Maclaurin bracket width ~1/(120 b^4) beyond the exact
            # cache; short blocks sum termwise to keep widths at 2**-bits
            if b - a + 1 <= TERMWISE_CAP and b > _HARMONIC_EXACT_LIMIT:
                return self._termwise(a, b, bits)
            hb = harmonic_interval(b, bits)
            ha = harmonic_interval(a - 1, bits)
            return (hb - ha) * self.c
        if b - a + 1 <= TERMWISE_CAP:
            return self._termwise(a, b, bits)
        # integral bracket for a decreasing positive integrand:
        # int_a^{b+1} <= sum <= psi(a) + int_a^b
        lo = self._integral(a, b + 1, bits)
        hi = self._integral(a, b, bits) + self.value(a, bits)
        return RatInterval(lo.lo, hi.hi)

    def _integral(self, x0: int, x1: int, bits: int) -> RatInterval:
        # int c x^-alpha dx = c (x0^{1-alpha} - x1^{1-alpha}) / (alpha-1), alpha != 1
        e = 1 - self.alpha
        t0 = pow_interval(Fraction(x0), e, bits)
        t1 = pow_interval(Fraction(x1), e, bits)
        return (t0 - t1) * (self.c / (self.alpha - 1))

    def sum_diverges(self):
        return self.alpha <= 1

    def tail_sum_upper(self, n_from, bits=DEFAULT_BITS):
        if self.alpha <= 1:
            return None
        # sum_{n>=m} c n^-alpha <= psi(m) + int_m^inf = psi(m) + c m^{1-alpha}/(alpha-1)
        head = self.value(n_from, bits).hi
        inf_part = (pow_interval(Fraction(n_from), 1 - self.alpha, bits)
                    * (self.c / (self.alpha - 1))).hi
        return head + inf_part

    def describe(self):
        return f"power:c={self.c},alpha={self.alpha}"


@dataclass(frozen=True)
class Khintchine(ApproxSeq):
    """psi(n) = 1 / (n * phi(n)) with phi non-decreasing, so n*psi(n) is
    non-increasing.  When phi vanishes at n = 1 (log-power family) the
    n = 2 value is held there."""

    phi: PhiSeq

    def _start(self) -> int:
        return 2 if isinstance(self.phi, PhiLogPow) else 1

    @property
    def is_exact(self):
        return isinstance(self.phi, (PhiConst, PhiTable))

    def value(self, n, bits=DEFAULT_BITS):
        n_eff = max(n, self._start())
        ph = self.phi.value(n_eff, bits)
        return (ph * n_eff).reciprocal()

    def block_sum(self, a, b, bits=DEFAULT_BITS):
        self._check_range(a, b)
        if isinstance(self.phi, PhiConst):
            if b - a + 1 <= TERMWISE_CAP and b > _HARMONIC_EXACT_LIMIT:
                return self._termwise(a, b, bits)
            hb = harmonic_interval(b, bits)
            ha = harmonic_interval(a - 1, bits)
            return (hb - ha) * (Fraction(1) / self.phi.c)
        if b - a + 1 <= TERMWISE_CAP:
            return self._termwise(a, b, bits)
        s = self._start()
        if a < s:
            head = self.value(a, bits) * (s - a)
            return head + self.block_sum(s, b, bits)
        lo = self._integral(a, b + 1, bits)
        hi = self._integral(a, b, bits) + self.value(a, bits)
        return RatInterval(lo.lo, hi.hi)

    def _integral(self, x0: int, x1: int, bits: int) -> RatInterval:
        """int_{x0}^{x1} dx / (x phi(x)) in closed form per phi family."""
        if isinstance(self.phi, PhiPow):
            beta = self.phi.beta
            t0 = pow_interval(Fraction(x0), -beta, bits)
            t1 = pow_interval(Fraction(x1), -beta, bits)
            return (t0 - t1) / beta
        if isinstance(self.phi, PhiLogPow):
            beta = self.phi.beta
            l0 = log_interval(x0, bits)
            l1 = log_interval(x1, bits)
            if beta == 1:
                # int dx/(x ln x) = ln ln x
                return log_interval(l1, bits) - log_interval(l0, bits)
            e = 1 - beta
            t0 = pow_interval(l0, e, bits)
            t1 = pow_interval(l1, e, bits)
            return (t0 - t1) / (beta - 1)
        raise PrecisionError(
            f"no analytic block sum for phi family {self.phi.describe()}; "
            f"block too long for termwise summation")

    def sum_diverges(self):
        # sum 1/(n phi(n)): const phi diverges; n^beta converges; (ln n)^beta
        # diverges iff beta <= 1 (integral test on the closed forms above).
        if isinstance(self.phi, PhiConst):
            return True
        if isinstance(self.phi, PhiTable):
            return True if self.phi.hold_last else None
        if isinstance(self.phi, PhiPow):
            return False
        if isinstance(self.phi, PhiLogPow):
            return self.phi.beta <= 1
        return None

    def tail_sum_upper(self, n_from, bits=DEFAULT_BITS):
        if isinstance(self.phi, PhiPow):
            # sum_{n>=m} n^{-1-beta} <= psi(m) + m^{-beta}/beta
            head = self.value(n_from, bits).hi
            inf_part = (pow_interval(Fraction(n_from), -self.phi.beta, bits)
                        / self.phi.beta).hi
            return head + inf_part
        return None

    def describe(self):
        return f"khintchine:phi={self.phi.describe()}"


@dataclass(frozen=True)
class Piecewise(ApproxSeq):
    """Piecewise-constant psi: value values[i] on [breaks[i], breaks[i+1]),
    clamped left of breaks[0]; past the last break the tail rule applies
    ("error" by default, "hold-last" to extend)."""

    breaks: tuple
    values: tuple
    tail: str = "error"

    def __post_init__(self):
        breaks = tuple(int(u) for u in self.breaks)
        values = tuple(as_fraction(w) for w in self.values)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "values", values)
        if len(breaks) != len(values) + 1:
            raise InputError("need len(breaks) == len(values) + 1")
        if any(v <= 0 for v in values):
            raise InputError("psi values must be positive")
        if any(b <= a for a, b in zip(breaks, breaks[1:])):
            raise InputError("breakpoints must be strictly increasing")
        if any(w2 > w1 for w1, w2 in zip(values, values[1:])):
            raise InputError("piecewise psi must be non-increasing")
        if self.tail not in ("error", "hold-last"):
            raise InputError("tail must be 'error' or 'hold-last'")

    @property
    def is_exact(self):
        return True

    @property
    def domain_end(self) -> Optional[int]:
        """First n past the defined range (None when hold-last extends)."""
        return None if self.tail == "hold-last" else self.breaks[-1]

    def piece_value(self, n: int) -> Fraction:
        if n < self.breaks[0]:
            return self.values[0]
        if n >= self.breaks[-1]:
            if self.tail == "hold-last":
                return self.values[-1]
            raise InputError(
                f"piecewise psi undefined at n={n} (ends at {self.breaks[-1]})")
        i = bisect.bisect_right(self.breaks, n) - 1
        return self.values[i]

    def value(self, n, bits=DEFAULT_BITS):
        return RatInterval.point(self.piece_value(n))

    def segment_starts(self) -> tuple:
        return self.breaks

    def block_sum(self, a, b, bits=DEFAULT_BITS):
        self._check_range(a, b)
        total = Fraction(0)
        n = a
        while n <= b:
            v = self.piece_value(n)
            end = b + 1
            i = bisect.bisect_right(self.breaks, n)
            if i < len(self.breaks):
                end = min(end, self.breaks[i])
            total += v * (end - n)
            n = end
        return RatInterval.point(total)

    def sum_diverges(self):
        return True if self.tail == "hold-last" else None

    def describe(self):
        return f"piecewise[{len(self.values)} pieces]"


@dataclass(frozen=True)
class Table(ApproxSeq):
    """Explicit table psi(1), psi(2), ..., tail rule 'error' (default, so a
    finite table is never silently treated as an infinite sequence) or
    'hold-last'."""

    values: tuple
    tail: str = "error"

    def __post_init__(self):
        vals = tuple(as_fraction(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals or any(v <= 0 for v in vals):
            raise InputError("table must be non-empty and positive")
        if any(b > a for a, b in zip(vals, vals[1:])):
            raise InputError("table psi must be non-increasing")
        if self.tail not in ("error", "hold-last"):
            raise InputError("tail must be 'error' or 'hold-last'")

    @property
    def is_exact(self):
        return True

    def point_value(self, n: int) -> Fraction:
        if n <= len(self.values):
            return self.values[n - 1]
        if self.tail == "hold-last":
            return self.values[-1]
        raise InputError(f"table has {len(self.values)} entries, n={n}")

    def value(self, n, bits=DEFAULT_BITS):
        return RatInterval.point(self.point_value(n))

    def block_sum(self, a, b, bits=DEFAULT_BITS):
        self._check_range(a, b)
        total = Fraction(0)
        for n in range(a, min(b, len(self.values)) + 1):
            total += self.values[n - 1]
        if b > len(self.values):
            if self.tail != "hold-last":
                raise InputError(
                    f"table has {len(self.values)} entries, block ends at {b}")
            total += self.values[-1] * (b - len(self.values))
        return RatInterval.point(total)

    def sum_diverges(self):
        return True if self.tail == "hold-last" else None

    def describe(self):
        return f"table[{len(self.values)}]"


# ---------------------------------------------------------------------------
# crossover search


def crossover(seq: ApproxSeq, lo: int, hi: int, threshold: RatInterval,
              bits: int = DEFAULT_BITS, max_bits: int = 4096) -> int:
    """Smallest n in [lo, hi] with psi(n) < threshold, or hi + 1 if none.

    psi is non-increasing, so the predicate is monotone and binary search
    applies.  An undecided comparison is retried at doubled precision up to
    max_bits, then raises PrecisionError naming the index.
    """
    if lo > hi:
        return lo

    def below(n: int) -> bool:
        b = bits
        while True:
            verdict = seq.value(n, b).strictly_below(threshold)
            if verdict is not None:
                return verdict
            if b >= max_bits:
                raise PrecisionError(
                    f"psi({n}) vs threshold undecided at {b} bits")
            b *= 2

    if not below(hi):
        return hi + 1
    if below(lo):
        return lo
    a, b = lo, hi  # below(a) False, below(b) True
    while b - a > 1:
        mid = (a + b) // 2
        if below(mid):
            b = mid
        else:
            a = mid
    return b


# ---------------------------------------------------------------------------
# spec-string and JSON parsing


def parse_psi_spec(spec: str) -> ApproxSeq:
    """Mini-language: "power:c=1/4,alpha=1",
    "khintchine:phi=const:2|pow:1/2|logpow:2", "piecewise:@file.json",
    "table:@file.json"."""
    kind, _, rest = spec.partition(":")
    if kind == "power":
        kv = dict(item.split("=") for item in rest.split(","))
        return PowerLaw(parse_fraction(kv["c"]), parse_fraction(kv["alpha"]))
    if kind == "khintchine":
        if not rest.startswith("phi="):
            raise InputError("khintchine spec needs phi=...")
        return Khintchine(parse_phi_spec(rest[4:]))
    if kind == "piecewise":
        return piecewise_from_json(_load_at(rest))
    if kind == "table":
        obj = _load_at(rest)
        return Table(tuple(parse_fraction(v) for v in obj["values"]),
                     obj.get("tail", "error"))
    raise InputError(f"cannot parse psi spec {spec!r}")


def parse_phi_spec(spec: str) -> PhiSeq:
    kind, _, rest = spec.partition(":")
    if kind == "const":
        return PhiConst(parse_fraction(rest))
    if kind == "pow":
        return PhiPow(parse_fraction(rest))
    if kind == "logpow":
        return PhiLogPow(parse_fraction(rest))
    raise InputError(f"cannot parse phi spec {spec!r}")


def _load_at(ref: str) -> dict:
    if not ref.startswith("@"):
        raise InputError(f"expected @file.json, got {ref!r}")
    with open(ref[1:], "r", encoding="utf-8") as fh:
        return json.load(fh)


def piecewise_from_json(obj: dict) -> Piecewise:
    """Accepts {"breaks", "values"} and the witness form {"u",
    "psi_values"} (the block starts double as breakpoints)."""
    if "u" in obj and "psi_values" in obj:
        return Piecewise(tuple(int(u) for u in obj["u"]),
                         tuple(parse_fraction(w) for w in obj["psi_values"]),
                         obj.get("tail", "error"))
    return Piecewise(tuple(int(u) for u in obj["breaks"]),
                     tuple(parse_fraction(w) for w in obj["values"]),
                     obj.get("tail", "error"))


def piecewise_to_json(seq: Piecewise) -> dict:
    return {"breaks": list(seq.breaks),
            "values": [format_fraction(w) for w in seq.values],
            "tail": seq.tail}
