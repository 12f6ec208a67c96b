"""Rational interval arithmetic with directed rounding for transcendentals.

Every rigorous quantity in this package is a closed interval [lo, hi] with
Fraction endpoints; exact values are zero-width intervals.  Logarithms,
rational powers and harmonic numbers are enclosed using MPFR directed
rounding (gmpy2), so the returned intervals are true enclosures.

Comparisons are three-valued: certainly true, certainly false, or None
(undecided at the current width).  Callers refine and retry, then raise
PrecisionError; nothing in this module silently coerces an undecided
comparison.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import gmpy2

from .errors import InputError

Ratlike = Union[int, Fraction]

#: Default working precision for transcendental enclosures, in bits.
DEFAULT_BITS = int(os.environ.get("ROTLAB_PRECISION_BITS", "128"))


def as_fraction(x: Ratlike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise InputError(f"expected int or Fraction, got {type(x).__name__}")


def round_down(x: Fraction, bits: int) -> Fraction:
    """Largest multiple of 2**-bits that is <= x."""
    return Fraction((x.numerator << bits) // x.denominator, 1 << bits)


def round_up(x: Fraction, bits: int) -> Fraction:
    return Fraction(-((-x.numerator << bits) // x.denominator), 1 << bits)


@dataclass(frozen=True)
class RatInterval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if not (isinstance(self.lo, Fraction) and isinstance(self.hi, Fraction)):
            object.__setattr__(self, "lo", as_fraction(self.lo))
            object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.lo > self.hi:
            raise InputError(f"empty interval: lo={self.lo} > hi={self.hi}")

    @classmethod
    def point(cls, x: Ratlike) -> "RatInterval":
        x = as_fraction(x)
        return cls(x, x)

    @classmethod
    def hull(cls, a: Ratlike, b: Ratlike) -> "RatInterval":
        a, b = as_fraction(a), as_fraction(b)
        return cls(min(a, b), max(a, b))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def __add__(self, other):
        if isinstance(other, RatInterval):
            return RatInterval(self.lo + other.lo, self.hi + other.hi)
        other = as_fraction(other)
        return RatInterval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self):
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        if isinstance(other, RatInterval):
            return RatInterval(self.lo - other.hi, self.hi - other.lo)
        other = as_fraction(other)
        return RatInterval(self.lo - other, self.hi - other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RatInterval):
            prods = (self.lo * other.lo, self.lo * other.hi,
                     self.hi * other.lo, self.hi * other.hi)
            return RatInterval(min(prods), max(prods))
        other = as_fraction(other)
        if other >= 0:
            return RatInterval(self.lo * other, self.hi * other)
        return RatInterval(self.hi * other, self.lo * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RatInterval):
            return self * other.reciprocal()
        other = as_fraction(other)
        if other == 0:
            raise ZeroDivisionError
        return self * (Fraction(1) / other)

    def reciprocal(self) -> "RatInterval":
        if self.lo <= 0 <= self.hi:
            raise InputError("reciprocal of an interval containing 0")
        return RatInterval(1 / self.hi, 1 / self.lo)

    def min_with(self, other: "RatInterval") -> "RatInterval":
        """Pointwise min: encloses min(x, y) for x in self, y in other."""
        return RatInterval(min(self.lo, other.lo), min(self.hi, other.hi))

    def max_with(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(max(self.lo, other.lo), max(self.hi, other.hi))

    def clamp_min(self, floor: Ratlike) -> "RatInterval":
        floor = as_fraction(floor)
        return RatInterval(max(self.lo, floor), max(self.hi, floor))

    def intersect(self, other: "RatInterval") -> "RatInterval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise InputError("intersecting disjoint intervals")
        return RatInterval(lo, hi)

    def compress(self, bits: int) -> "RatInterval":
        """Outward-round endpoints onto the 2**-bits grid (keeps small exact
        endpoints untouched)."""
        lo, hi = self.lo, self.hi
        if lo.denominator.bit_length() > bits + 16:
            lo = round_down(lo, bits)
        if hi.denominator.bit_length() > bits + 16:
            hi = round_up(hi, bits)
        return RatInterval(lo, hi)

    def contains(self, x: Ratlike) -> bool:
        x = as_fraction(x)
        return self.lo <= x <= self.hi

    def is_subset(self, other: "RatInterval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    # Three-valued order predicates ("certainly" semantics).

    def strictly_below(self, other: "RatInterval | Ratlike"):
        """True if x < y for all x in self, y in other; False if x >= y
        always; None when undecided."""
        if not isinstance(other, RatInterval):
            other = RatInterval.point(other)
        if self.hi < other.lo:
            return True
        if self.lo >= other.hi:
            return False
        return None

    def at_most(self, other: "RatInterval | Ratlike"):
        """Three-valued x <= y."""
        if not isinstance(other, RatInterval):
            other = RatInterval.point(other)
        if self.hi <= other.lo:
            return True
        if self.lo > other.hi:
            return False
        return None

    def __str__(self):
        if self.is_point():
            return f"[{self.lo}]"
        return f"[{self.lo}, {self.hi}]"


ZERO = RatInterval.point(0)
ONE = RatInterval.point(1)


class IntervalSum:
    """Accumulates many interval terms, compressing endpoints so that
    denominators stay bounded.  Adds at most 2**-bits of width per term;
    sums of a few thousand small exact terms stay exact."""

    def __init__(self, bits: int = DEFAULT_BITS):
        self.bits = bits
        self.lo = Fraction(0)
        self.hi = Fraction(0)

    def add(self, term: "RatInterval | Ratlike") -> None:
        if isinstance(term, RatInterval):
            self.lo += term.lo
            self.hi += term.hi
        else:
            term = as_fraction(term)
            self.lo += term
            self.hi += term
        if self.lo.denominator.bit_length() > self.bits + 16:
            self.lo = round_down(self.lo, self.bits)
        if self.hi.denominator.bit_length() > self.bits + 16:
            self.hi = round_up(self.hi, self.bits)

    def result(self) -> RatInterval:
        return RatInterval(self.lo, self.hi)


# ---------------------------------------------------------------------------
# Directed-rounding enclosures via MPFR.

def _mpq(x: Fraction):
    return gmpy2.mpq(x.numerator, x.denominator)


def _mpfr_to_fraction(x) -> Fraction:
    return Fraction(*x.as_integer_ratio())


def log_interval(x: "RatInterval | Ratlike", bits: int = DEFAULT_BITS) -> RatInterval:
    """Rigorous enclosure of ln(x) for x > 0."""
    if not isinstance(x, RatInterval):
        x = RatInterval.point(x)
    if x.lo <= 0:
        raise InputError("log_interval needs a positive argument")
    with gmpy2.context(precision=bits, round=gmpy2.RoundDown):
        lo = gmpy2.log(_mpq(x.lo))
    with gmpy2.context(precision=bits, round=gmpy2.RoundUp):
        hi = gmpy2.log(_mpq(x.hi))
    return RatInterval(_mpfr_to_fraction(lo), _mpfr_to_fraction(hi))


def pow_interval(base: "RatInterval | Ratlike", expo: Ratlike,
                 bits: int = DEFAULT_BITS) -> RatInterval:
    """Rigorous enclosure of base**expo for base > 0 and rational expo."""
    expo = as_fraction(expo)
    if not isinstance(base, RatInterval):
        base = RatInterval.point(base)
    if base.lo <= 0:
        raise InputError("pow_interval needs a positive base")
    if expo.denominator == 1:
        e = expo.numerator
        return RatInterval(min(base.lo ** e, base.hi ** e),
                           max(base.lo ** e, base.hi ** e))
    # x**e is monotone increasing for e > 0, decreasing for e < 0
    a, b = (base.lo, base.hi) if expo > 0 else (base.hi, base.lo)
    with gmpy2.context(precision=bits, round=gmpy2.RoundDown):
        lo = _mpq(a) ** _mpq(expo)
    with gmpy2.context(precision=bits, round=gmpy2.RoundUp):
        hi = _mpq(b) ** _mpq(expo)
    return RatInterval(_mpfr_to_fraction(lo), _mpfr_to_fraction(hi))


_euler_cache: dict[int, RatInterval] = {}


def euler_gamma_interval(bits: int = DEFAULT_BITS) -> RatInterval:
    if bits not in _euler_cache:
        with gmpy2.context(precision=bits, round=gmpy2.RoundDown):
            lo = gmpy2.const_euler()
        with gmpy2.context(precision=bits, round=gmpy2.RoundUp):
            hi = gmpy2.const_euler()
        _euler_cache[bits] = RatInterval(_mpfr_to_fraction(lo),
                                         _mpfr_to_fraction(hi))
    return _euler_cache[bits]


_HARMONIC_EXACT_MAX = 512
_harmonic_exact: list[Fraction] = [Fraction(0)]


def harmonic_interval(n: int, bits: int = DEFAULT_BITS) -> RatInterval:
    """Enclosure of H_n = 1 + 1/2 + ... + 1/n (exact for small n).

    For large n uses the Euler-Maclaurin bracket
        ln n + gamma + 1/(2n) - 1/(12 n^2)  <  H_n
        H_n  <  ln n + gamma + 1/(2n) - 1/(12 n^2) + 1/(120 n^4),
    whose validity is the alternating-tail property of the asymptotic
    series (unit-tested against exact sums).
    """
    if n < 0:
        raise InputError("harmonic_interval needs n >= 0")
    if n <= _HARMONIC_EXACT_MAX:
        while len(_harmonic_exact) <= n:
            m = len(_harmonic_exact)
            _harmonic_exact.append(_harmonic_exact[-1] + Fraction(1, m))
        return RatInterval.point(_harmonic_exact[n])
    base = log_interval(n, bits) + euler_gamma_interval(bits) \
        + Fraction(1, 2 * n) - Fraction(1, 12 * n * n)
    return RatInterval(base.lo, base.hi + Fraction(1, 120 * n ** 4))


def iroot_floor(x: int, r: int) -> int:
    """floor(x ** (1/r)) for integers x >= 0, r >= 1."""
    if x < 0 or r < 1:
        raise InputError("iroot_floor needs x >= 0, r >= 1")
    root, _ = gmpy2.iroot(x, r)
    return int(root)


def rational_pow_floor(base: Fraction, expo: Fraction) -> int:
    """floor(base ** expo) computed exactly (base > 0, expo >= 0)."""
    if base <= 0 or expo < 0:
        raise InputError("rational_pow_floor needs base > 0, expo >= 0")
    tn, td = expo.numerator, expo.denominator
    # floor((num/den)^(tn/td)) = floor((num^tn / den^tn)^(1/td)): binary-search
    # the integer td-th root of the rational power.
    num = base.numerator ** tn
    den = base.denominator ** tn
    guess = iroot_floor(num // den, td)
    # candidates near the truncated root; exact check via cross powers
    while (guess + 1) ** td * den <= num:
        guess += 1
    while guess ** td * den > num:
        guess -= 1
    return guess
