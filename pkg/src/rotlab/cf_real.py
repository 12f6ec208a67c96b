"""Continued-fraction convergents of a fixed irrational theta.

theta is canonically a partial-quotient stream; nothing here represents it
as a float.  Convergents p_k/q_k follow the standard recurrences with the
seed q_{-1} = 0, q_0 = 1, and a_0 is the integer part (0 throughout this
package, where theta lives in (0, 1)).

The distance dist_k, i.e. the nearest-integer distance of q_k * theta, is
carried as a rational interval.  It is obtained by evaluating the linear
form |q_k t - p_k| at the endpoints of a convergent bracket around theta
and can be tightened on demand by consuming more quotients.  For finite
streams the terminal bracket is the convergent/mediant cylinder hull, so
enclosures stay sound when the stream runs dry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DepthExceededError, InputError, PrecisionError
from .intervals import RatInterval, as_fraction


# ---------------------------------------------------------------------------
# Partial-quotient streams


class PartialQuotientStream:
    """Supplies a_0 and the partial quotients a_k (k >= 1).

    depth is the number of available quotients past a_0 (None = unbounded).
    bound is a proven upper bound for a_k over ALL k >= 1, or None; only
    sources that determine the whole tail (periodic, constant rules) can
    return one.
    """

    a0: int = 0

    def quotient(self, k: int) -> int:
        raise NotImplementedError

    @property
    def depth(self) -> Optional[int]:
        return None

    @property
    def bound(self) -> Optional[int]:
        return None

    def describe(self) -> str:
        return type(self).__name__

    def _check_index(self, k: int) -> None:
        if k < 1:
            raise InputError(f"partial quotients are indexed from 1, got {k}")
        d = self.depth
        if d is not None and k > d:
            raise DepthExceededError(
                f"stream {self.describe()} has depth {d}, quotient a_{k} requested")


@dataclass(frozen=True)
class ExplicitStream(PartialQuotientStream):
    """Finite, explicitly listed quotients."""

    a0: int = 0
    quotients: tuple = ()

    def __post_init__(self):
        if any(a < 1 for a in self.quotients):
            raise InputError("partial quotients must be >= 1")

    def quotient(self, k: int) -> int:
        self._check_index(k)
        return self.quotients[k - 1]

    @property
    def depth(self) -> Optional[int]:
        return len(self.quotients)

    def describe(self) -> str:
        return f"explicit[{len(self.quotients)}]"


@dataclass(frozen=True)
class PeriodicStream(PartialQuotientStream):
    """Pre-period followed by an infinitely repeated period (quadratic
    irrationals enter through this form)."""

    a0: int = 0
    pre: tuple = ()
    period: tuple = ()

    def __post_init__(self):
        if not self.period:
            raise InputError("period must be non-empty")
        if any(a < 1 for a in self.pre + self.period):
            raise InputError("partial quotients must be >= 1")

    def quotient(self, k: int) -> int:
        self._check_index(k)
        i = k - 1
        if i < len(self.pre):
            return self.pre[i]
        return self.period[(i - len(self.pre)) % len(self.period)]

    @property
    def bound(self) -> Optional[int]:
        return max(self.pre + self.period)

    def describe(self) -> str:
        return f"periodic(pre={list(self.pre)}, period={list(self.period)})"


@dataclass(frozen=True)
class RuleStream(PartialQuotientStream):
    """Quotients from a named closed-form rule.

    Built-in rules: "const:c" (a_k = c), "doubling" (a_k = 2**k),
    "arith:c,d" (a_k = c + d*k).
    """

    a0: int = 0
    kind: str = "const"
    params: tuple = ()

    def quotient(self, k: int) -> int:
        self._check_index(k)
        if self.kind == "const":
            return self.params[0]
        if self.kind == "doubling":
            return 2 ** k
        if self.kind == "arith":
            c, d = self.params
            return c + d * k
        raise InputError(f"unknown rule {self.kind!r}")

    @property
    def bound(self) -> Optional[int]:
        if self.kind == "const":
            return self.params[0]
        if self.kind == "arith" and self.params[1] == 0:
            return self.params[0]
        return None

    def describe(self) -> str:
        return f"rule:{self.kind}{list(self.params)}"


@dataclass(frozen=True)
class CertifiedStream(PartialQuotientStream):
    """Prefix of quotients certified from an uncertain rational input.

    Only quotients provably shared by every real in the input interval are
    exposed; asking deeper raises DepthExceededError.
    """

    a0: int = 0
    quotients: tuple = ()
    origin: tuple = ()  # (num, den, uncertainty) it was certified from

    def quotient(self, k: int) -> int:
        self._check_index(k)
        return self.quotients[k - 1]

    @property
    def depth(self) -> Optional[int]:
        return len(self.quotients)

    @property
    def certified_depth(self) -> int:
        return len(self.quotients)

    def describe(self) -> str:
        return f"certified[{len(self.quotients)}] from {self.origin}"


def golden_stream() -> PeriodicStream:
    """[0; 1, 1, 1, ...], the golden mean minus one."""
    return PeriodicStream(0, (), (1,))


def sqrt2m1_stream() -> PeriodicStream:
    """[0; 2, 2, 2, ...] = sqrt(2) - 1."""
    return PeriodicStream(0, (), (2,))


# ---------------------------------------------------------------------------
# Stream (de)serialization


def stream_from_json(obj: dict) -> PartialQuotientStream:
    a0 = int(obj.get("a0", 0))
    if "list" in obj:
        return ExplicitStream(a0, tuple(int(a) for a in obj["list"]))
    if "period" in obj or "pre" in obj:
        return PeriodicStream(a0, tuple(int(a) for a in obj.get("pre", ())),
                              tuple(int(a) for a in obj.get("period", ())))
    if "rule" in obj:
        name = obj["rule"]
        params = obj.get("params")
        if params is None:
            return _rule_from_spec(name, a0)
        if name == "const":
            return RuleStream(a0, "const", (int(params["c"]),))
        if name == "doubling":
            return RuleStream(a0, "doubling", ())
        if name == "arith":
            return RuleStream(a0, "arith", (int(params["c"]), int(params["d"])))
        raise InputError(f"unknown rule {name!r}")
    raise InputError("stream JSON needs one of: list, pre/period, rule")


def _rule_from_spec(name: str, a0: int = 0) -> RuleStream:
    if name == "doubling":
        return RuleStream(a0, "doubling", ())
    if name.startswith("const:"):
        return RuleStream(a0, "const", (int(name[6:]),))
    if name.startswith("arith:"):
        c, d = (int(t) for t in name[6:].split(","))
        return RuleStream(a0, "arith", (c, d))
    raise InputError(f"unknown rule spec {name!r}")


def parse_stream_spec(spec: str) -> PartialQuotientStream:
    """CLI-facing theta specs: "rule:const:1", "rule:doubling",
    "rule:arith:1,1", "list:1,2,3", "periodic:pre=1,2;period=3",
    "file:path.json"."""
    if spec.startswith("rule:"):
        return _rule_from_spec(spec[5:])
    if spec.startswith("list:"):
        return ExplicitStream(0, tuple(int(t) for t in spec[5:].split(",") if t))
    if spec.startswith("periodic:"):
        pre: tuple = ()
        period: tuple = ()
        for part in spec[9:].split(";"):
            key, _, val = part.partition("=")
            vals = tuple(int(t) for t in val.split(",") if t)
            if key == "pre":
                pre = vals
            elif key == "period":
                period = vals
            else:
                raise InputError(f"bad periodic spec part {part!r}")
        return PeriodicStream(0, pre, period)
    if spec.startswith("file:"):
        with open(spec[5:], "r", encoding="utf-8") as fh:
            return stream_from_json(json.load(fh))
    raise InputError(f"cannot parse theta spec {spec!r}")


# ---------------------------------------------------------------------------
# Convergents


@dataclass(frozen=True)
class ConvergentState:
    """One step of the convergent recurrence.

    dist is an enclosure of the nearest-integer distance of q_k * theta,
    present once a_{k+1} is known (None at the end of a finite stream).
    """

    k: int
    p: int
    q: int
    p_prev: int
    q_prev: int
    a_next: Optional[int] = None
    dist: Optional[RatInterval] = None


@dataclass(frozen=True)
class RealEnclosure:
    """Bracket lo < theta < hi together with the rational surrogate used by
    the exact set computations (a deep convergent, so the surrogate shares
    the relevant continued-fraction structure)."""

    lo: Fraction
    hi: Fraction
    surrogate: Fraction
    depth: int  # index of the surrogate convergent

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


class ConvergentTable:
    """Lazily extended convergents of one stream, with distance enclosures.

    Internal arrays are offset by one so that index 0 holds the seed
    (p_{-1}, q_{-1}) = (1, 0).
    """

    def __init__(self, stream: PartialQuotientStream):
        self.stream = stream
        self._p = [1]
        self._q = [0]
        self._a = [None]  # a_k at slot k+1; a_0 at slot 1
        self._exhausted = False
        self._dist_cache: dict[int, tuple[RatInterval, int]] = {}

    # -- extension ---------------------------------------------------------

    def _extend_once(self) -> bool:
        k = len(self._p) - 1  # next convergent index to produce
        try:
            a = self.stream.a0 if k == 0 else self.stream.quotient(k)
        except DepthExceededError:
            self._exhausted = True
            return False
        self._p.append(a * self._p[-1] + (self._p[-2] if len(self._p) >= 2 else 0))
        self._q.append(a * self._q[-1] + (self._q[-2] if len(self._q) >= 2 else 1))
        self._a.append(a)
        return True

    def ensure(self, k: int) -> None:
        """Make convergents up to index k available (k >= -1)."""
        while len(self._p) - 2 < k:
            if not self._extend_once():
                raise DepthExceededError(
                    f"stream {self.stream.describe()} exhausted at depth "
                    f"{len(self._p) - 2}, convergent {k} requested")

    def available(self, k: int) -> bool:
        try:
            self.ensure(k)
            return True
        except DepthExceededError:
            return False

    def p(self, k: int) -> int:
        self.ensure(k)
        return self._p[k + 1]

    def q(self, k: int) -> int:
        self.ensure(k)
        return self._q[k + 1]

    def a(self, k: int) -> int:
        self.ensure(k)
        return self._a[k + 1]

    def convergent(self, k: int) -> Fraction:
        return Fraction(self.p(k), self.q(k))

    # -- distance enclosures -------------------------------------------------

    def _dist_at(self, k: int, num: int, den: int) -> Fraction:
        # |q_k * t - p_k| evaluated at the rational t = num/den
        return Fraction(abs(self._q[k + 1] * num - self._p[k + 1] * den), den)

    def _bracket(self, m: int) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """theta bracket (as two rational endpoints, each given as num/den)
        at refinement level m: convergents m and m+1 when a_{m+1} exists,
        else convergent m and the terminal mediant."""
        self.ensure(m)
        if self.available(m + 1):
            return (self._p[m + 1], self._q[m + 1], self._p[m + 2], self._q[m + 2])
        # cylinder hull endpoint: mediant of convergents m and m-1
        return (self._p[m + 1], self._q[m + 1],
                self._p[m + 1] + self._p[m], self._q[m + 1] + self._q[m])

    def dist(self, k: int, max_width: Optional[Fraction] = None,
             deepen: int = 512) -> RatInterval:
        """Enclosure of the nearest-integer distance of q_k * theta.

        Needs a_{k+1}; tightens by walking further down the stream until the
        width target is met, the stream ends (DepthExceededError if the
        target is then unreachable), or the deepening cap trips
        (PrecisionError).
        """
        if k < 0:
            raise InputError("dist is defined for k >= 0")
        self.ensure(k)
        if not self.available(k + 1):
            raise DepthExceededError(
                f"a_{k + 1} unavailable: distance enclosure for k={k} needs it")
        cached = self._dist_cache.get(k)
        if cached is None:
            # base bracket from a_{k+1} alone: [1/(q_{k+1}+q_k), 1/q_{k+1}]
            qk, qk1 = self._q[k + 1], self._q[k + 2]
            cur = RatInterval(Fraction(1, qk1 + qk), Fraction(1, qk1))
            m = k + 1
        else:
            cur, m = cached
        while max_width is not None and cur.width > max_width:
            if m - (k + 1) >= deepen:
                raise PrecisionError(
                    f"distance for k={k} still wider than {max_width} after "
                    f"{deepen} extra quotients")
            if not self.available(m + 1):
                # terminal mediant bracket is the best this stream can do
                n1, d1, n2, d2 = self._bracket(m)
                cur = RatInterval.hull(self._dist_at(k, n1, d1),
                                       self._dist_at(k, n2, d2)).intersect(cur)
                self._dist_cache[k] = (cur, m)
                if cur.width > max_width:
                    raise DepthExceededError(
                        f"stream ends before distance width {max_width} "
                        f"reachable for k={k}")
                return cur
            m += 1
            n1, d1, n2, d2 = self._bracket(m)
            cur = RatInterval.hull(self._dist_at(k, n1, d1),
                                   self._dist_at(k, n2, d2)).intersect(cur)
        self._dist_cache[k] = (cur, m)
        return cur

    def state(self, k: int) -> ConvergentState:
        self.ensure(k)
        a_next = self.a(k + 1) if self.available(k + 1) else None
        dist = self.dist(k) if a_next is not None else None
        return ConvergentState(k=k, p=self._p[k + 1], q=self._q[k + 1],
                               p_prev=self._p[k], q_prev=self._q[k],
                               a_next=a_next, dist=dist)

    # -- enclosures of theta itself ----------------------------------------

    def theta_enclosure(self, target_width: Fraction,
                        min_depth: int = 1) -> RealEnclosure:
        """Convergent bracket of width <= target_width (consecutive
        convergents straddle theta; width is 1/(q_k q_{k+1}))."""
        target_width = as_fraction(target_width)
        if target_width <= 0:
            raise InputError("target width must be positive")
        m = max(1, min_depth)
        while True:
            self.ensure(m + 1)
            w = Fraction(1, self._q[m + 1] * self._q[m + 2])
            if w <= target_width:
                break
            m += 1
        lo = Fraction(self._p[m + 1], self._q[m + 1])
        hi = Fraction(self._p[m + 2], self._q[m + 2])
        if lo > hi:
            lo, hi = hi, lo
        return RealEnclosure(lo=lo, hi=hi,
                             surrogate=Fraction(self._p[m + 2], self._q[m + 2]),
                             depth=m + 1)

    def surrogate(self, max_width: Fraction, min_depth: int = 1) -> Fraction:
        """Deep convergent standing in for theta in exact set sweeps."""
        return self.theta_enclosure(max_width, min_depth).surrogate

    # -- block lookup --------------------------------------------------------

    def block_index(self, n: int) -> int:
        """The k with q_k <= n < q_{k+1} (the largest such k when small
        denominators repeat, which only happens while q_0 = q_1 = 1)."""
        if n < 1:
            raise InputError("block lookup needs n >= 1")
        k = 0
        while True:
            self.ensure(k + 1)
            if self._q[k + 2] > n:
                if self._q[k + 1] <= n:
                    return k
                k += 1  # unreachable for valid tables; keep the walk total
            else:
                k += 1

    def coverage_index(self, n_hi: int) -> int:
        """Smallest K with q_{K+1} > n_hi, i.e. blocks 0..K cover [1, n_hi]."""
        return self.block_index(n_hi)


# ---------------------------------------------------------------------------
# Functional API


def seed_state() -> ConvergentState:
    return ConvergentState(k=-1, p=1, q=0, p_prev=0, q_prev=1)


def next_convergent(stream: PartialQuotientStream,
                    state: ConvergentState) -> ConvergentState:
    """Advance the recurrence by one step.

    The distance enclosure of the produced state is the base bracket from
    the following quotient; use ConvergentTable.dist for tightened
    enclosures.
    """
    k1 = state.k + 1
    try:
        a = stream.a0 if k1 == 0 else stream.quotient(k1)
    except DepthExceededError:
        raise DepthExceededError(
            f"stream {stream.describe()} has no quotient a_{k1}")
    p1 = a * state.p + state.p_prev
    q1 = a * state.q + state.q_prev
    a_next: Optional[int] = None
    dist: Optional[RatInterval] = None
    try:
        a_next = stream.quotient(k1 + 1)
    except DepthExceededError:
        a_next = None
    if a_next is not None and q1 >= 1:
        q2 = a_next * q1 + state.q
        dist = RatInterval(Fraction(1, q2 + q1), Fraction(1, q2))
    return ConvergentState(k=k1, p=p1, q=q1, p_prev=state.p, q_prev=state.q,
                           a_next=a_next, dist=dist)


def iterate_convergents(stream: PartialQuotientStream, count: int):
    """Yield the first `count` states (k = 0 .. count-1)."""
    st = seed_state()
    for _ in range(count):
        st = next_convergent(stream, st)
        yield st


def enclose_theta(stream: PartialQuotientStream,
                  target_width: Fraction) -> RealEnclosure:
    return ConvergentTable(stream).theta_enclosure(as_fraction(target_width))


# ---------------------------------------------------------------------------
# Certification from an uncertain rational


def rational_cf(x: Fraction) -> list[int]:
    """Canonical (floor-algorithm) continued fraction of a rational in
    [0, 1): returns [a0, a1, ...]."""
    if not 0 <= x < 1:
        raise InputError("rational_cf expects x in [0, 1)")
    out = [0]
    num, den = x.numerator, x.denominator
    # invert-and-floor loop on the fractional part
    while num != 0:
        a, r = divmod(den, num)
        out.append(a)
        den, num = num, r
    return out


def _cylinder_hull(prefix: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Hull of all reals whose CF starts [0; prefix...]: the interval
    between the prefix convergent and its mediant with the previous one."""
    p_prev, q_prev, p, q = 1, 0, 0, 1  # (p_{-1}, q_{-1}), (p_0, q_0) for a0=0
    for a in prefix:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
    end1 = Fraction(p, q)
    end2 = Fraction(p + p_prev, q + q_prev)
    return (min(end1, end2), max(end1, end2))


def certify_from_rational(num: int, den: int,
                          uncertainty: Fraction) -> CertifiedStream:
    """Stream of the partial quotients shared by every real in
    [num/den - uncertainty, num/den + uncertainty] (clamped to [0, 1)).

    Certification is conservative: a quotient is exposed only when the
    whole input interval lies strictly inside the open cylinder of that
    prefix.  An interval too wide to certify anything yields depth 0.
    """
    uncertainty = as_fraction(uncertainty)
    if den <= 0 or uncertainty <= 0:
        raise InputError("need den > 0 and uncertainty > 0")
    x = Fraction(num, den)
    if not 0 <= x < 1:
        raise InputError("need 0 <= num/den < 1")
    lo = max(x - uncertainty, Fraction(0))
    hi = min(x + uncertainty, Fraction(1))
    cf_lo = rational_cf(lo)[1:]
    cf_hi = rational_cf(hi)[1:] if hi < 1 else []
    d = 0
    while d < len(cf_lo) and d < len(cf_hi) and cf_lo[d] == cf_hi[d]:
        d += 1
    while d > 0:
        c_lo, c_hi = _cylinder_hull(cf_lo[:d])
        if c_lo < lo and hi < c_hi:
            break
        d -= 1
    return CertifiedStream(0, tuple(cf_lo[:d]), origin=(num, den, uncertainty))
