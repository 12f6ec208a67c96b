"""Independent oracles shared by the test suite.

QuadSurd does exact arithmetic and comparisons in Q(sqrt(d)), so values
like 3 - 2*sqrt(2) can be compared against rationals with no rounding.
These oracles deliberately avoid every code path they are used to check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class QuadSurd:
    """a + b*sqrt(d) with rational a, b and a fixed squarefree d > 0."""

    a: Fraction
    b: Fraction
    d: int

    @classmethod
    def of(cls, a, b, d) -> "QuadSurd":
        return cls(Fraction(a), Fraction(b), d)

    def __add__(self, other):
        if isinstance(other, QuadSurd):
            assert self.d == other.d
            return QuadSurd(self.a + other.a, self.b + other.b, self.d)
        return QuadSurd(self.a + Fraction(other), self.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadSurd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-other if isinstance(other, QuadSurd)
                       else QuadSurd(-Fraction(other), Fraction(0), self.d))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QuadSurd):
            assert self.d == other.d
            return QuadSurd(self.a * other.a + self.d * self.b * other.b,
                            self.a * other.b + self.b * other.a, self.d)
        other = Fraction(other)
        return QuadSurd(self.a * other, self.b * other, self.d)

    __rmul__ = __mul__

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(d)."""
        if self.b == 0:
            return (self.a > 0) - (self.a < 0)
        if self.a == 0:
            return (self.b > 0) - (self.b < 0)
        # compare a vs -b*sqrt(d) by squaring with sign bookkeeping
        lhs_pos = self.a > 0
        rhs_pos = -self.b > 0
        if lhs_pos and not rhs_pos:
            return 1
        if rhs_pos and not lhs_pos:
            return -1
        lhs_sq = self.a * self.a
        rhs_sq = self.b * self.b * self.d
        if lhs_sq == rhs_sq:
            return 0
        bigger_abs_lhs = lhs_sq > rhs_sq
        if lhs_pos:  # both positive
            return 1 if bigger_abs_lhs else -1
        return -1 if bigger_abs_lhs else 1

    def __lt__(self, other):
        return (self - _coerce(other, self.d)).sign() < 0

    def __le__(self, other):
        return (self - _coerce(other, self.d)).sign() <= 0

    def __gt__(self, other):
        return (self - _coerce(other, self.d)).sign() > 0

    def __ge__(self, other):
        return (self - _coerce(other, self.d)).sign() >= 0

    def frac_part(self) -> "QuadSurd":
        """Fractional part, located by exact floor search."""
        lo, hi = -10 ** 9, 10 ** 9
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if (self - mid).sign() >= 0:
                lo = mid
            else:
                hi = mid
        return self - lo

    def dist_to_nearest_int(self) -> "QuadSurd":
        f = self.frac_part()
        half = (f - Fraction(1, 2)).sign()
        if half <= 0:
            return f
        return (-f) + 1


def _coerce(x, d):
    if isinstance(x, QuadSurd):
        return x
    return QuadSurd(Fraction(x), Fraction(0), d)


def sqrt2() -> QuadSurd:
    return QuadSurd.of(0, 1, 2)


def sqrt5() -> QuadSurd:
    return QuadSurd.of(0, 1, 5)


def golden_theta() -> QuadSurd:
    """(sqrt(5) - 1)/2, the number with all-ones partial quotients."""
    return QuadSurd.of(Fraction(-1, 2), Fraction(1, 2), 5)


def sqrt2_minus_1() -> QuadSurd:
    return QuadSurd.of(-1, 1, 2)
