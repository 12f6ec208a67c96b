"""Exact arc-union computations on the circle R/Z.

theta enters every set construction through a rational surrogate, a deep
convergent p_m/q_m of the same stream.  A convergent shares the orbit
combinatorics that the constructions rely on (best-approximation and
separation properties hold exactly for it), so all measures, disjointness
checks and inequalities below are computed in exact rational arithmetic;
the only approximation is the reported surrogate budget |theta - p_m/q_m|,
which is kept far below every compared quantity.

Arcs are half-open [lo, hi).  The constructions use open balls; the two
differ by finitely many points, so every measure and every containment
computed here is identical.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .cf_real import ConvergentTable
from .errors import InputError, InternalInvariantError
from .intervals import as_fraction
from .jsonfmt import frac_str
from .psi import ApproxSeq

DEFAULT_ARC_CAP = 10 ** 5
SURROGATE_BITS = 192  # default enclosure width 2**-192 behind each surrogate


# ---------------------------------------------------------------------------
# Arc unions


@dataclass(frozen=True)
class ArcUnion:
    """Sorted, pairwise-disjoint, merged half-open arcs inside [0, 1)."""

    arcs: tuple

    @classmethod
    def empty(cls) -> "ArcUnion":
        return cls(())

    @classmethod
    def full(cls) -> "ArcUnion":
        return cls(((Fraction(0), Fraction(1)),))

    @classmethod
    def from_raw(cls, raw: Iterable[tuple]) -> "ArcUnion":
        """Normalize arbitrary (lo, hi) pairs: reduced mod 1, wrap-around
        split at 0, overlaps merged.  An arc of length >= 1 is the full
        circle."""
        pieces = []
        for lo, hi in raw:
            lo, hi = as_fraction(lo), as_fraction(hi)
            length = hi - lo
            if length <= 0:
                continue
            if length >= 1:
                return cls.full()
            lo = lo - lo.__floor__()
            hi = lo + length
            if hi <= 1:
                pieces.append((lo, hi))
            else:
                pieces.append((lo, Fraction(1)))
                pieces.append((Fraction(0), hi - 1))
        if not pieces:
            return cls.empty()
        pieces.sort()
        merged = [pieces[0]]
        for lo, hi in pieces[1:]:
            if lo <= merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        if len(merged) == 1 and merged[0] == (Fraction(0), Fraction(1)):
            return cls.full()
        return cls(tuple(merged))

    @classmethod
    def from_balls(cls, centers: Sequence[Fraction],
                   radii: Sequence[Fraction]) -> "ArcUnion":
        return cls.from_raw((c - r, c + r) for c, r in zip(centers, radii))

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.arcs), Fraction(0))

    def union(self, other: "ArcUnion") -> "ArcUnion":
        return ArcUnion.from_raw(list(self.arcs) + list(other.arcs))

    def intersection(self, other: "ArcUnion") -> "ArcUnion":
        out = []
        i = j = 0
        a, b = self.arcs, other.arcs
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return ArcUnion(tuple(out))

    def complement(self) -> "ArcUnion":
        out = []
        cursor = Fraction(0)
        for lo, hi in self.arcs:
            if cursor < lo:
                out.append((cursor, lo))
            cursor = hi
        if cursor < 1:
            out.append((cursor, Fraction(1)))
        return ArcUnion(tuple(out))

    def rotate(self, by: Fraction) -> "ArcUnion":
        return ArcUnion.from_raw((lo + by, hi + by) for lo, hi in self.arcs)

    def contains_point(self, x: Fraction) -> bool:
        x = x - x.__floor__()
        i = bisect.bisect_right([lo for lo, _ in self.arcs], x) - 1
        return i >= 0 and self.arcs[i][0] <= x < self.arcs[i][1]

    def is_subset_of(self, other: "ArcUnion") -> bool:
        return self.intersection(other).measure == self.measure

    def csv_rows(self) -> list:
        rows = [["lo_num", "lo_den", "hi_num", "hi_den"]]
        for lo, hi in self.arcs:
            rows.append([lo.numerator, lo.denominator,
                         hi.numerator, hi.denominator])
        return rows

    def to_json(self) -> dict:
        return {"arcs": [[frac_str(lo), frac_str(hi)] for lo, hi in self.arcs],
                "measure": frac_str(self.measure)}


def measure_intersection(u1: ArcUnion, u2: ArcUnion) -> Fraction:
    return u1.intersection(u2).measure


# ---------------------------------------------------------------------------
# Surrogate-based exact geometry


def frac_part(x: Fraction) -> Fraction:
    return x - x.__floor__()


def dist_to_int(x: Fraction) -> Fraction:
    f = frac_part(x)
    return min(f, 1 - f)


class SurrogateGeometry:
    """Caches the rational surrogate of theta and the exact distances
    d_hat(k) = dist(q_k * theta_hat) used consistently for radii and
    disjointness checks."""

    def __init__(self, table: ConvergentTable, min_depth: int,
                 bits: int = SURROGATE_BITS):
        self.table = table
        enc = table.theta_enclosure(Fraction(1, 1 << bits),
                                    min_depth=min_depth)
        self.theta_hat = enc.surrogate
        self.budget_width = enc.width
        self.depth = enc.depth
        self._dhat: dict[int, Fraction] = {}

    def d_hat(self, k: int) -> Fraction:
        # |q_k theta_hat - p_k|: the continued-fraction distance (equals the
        # nearest-integer distance for every k >= 1; at k = 0 it is the
        # quantity the block identities use)
        if k not in self._dhat:
            if k + 2 > self.depth:
                raise InputError(
                    f"surrogate depth {self.depth} too shallow for d_hat({k})")
            self._dhat[k] = abs(self.table.q(k) * self.theta_hat
                                - self.table.p(k))
        return self._dhat[k]

    def orbit_point(self, n: int) -> Fraction:
        return frac_part(n * self.theta_hat)

    def h(self, seq: ApproxSeq, n: int) -> Fraction:
        """h(n) = min(psi(n), d_hat(block of n)), exact."""
        v = seq.value(n)
        if not v.is_point():
            raise InputError("exact set constructions need rational-valued psi")
        return min(v.lo, self.d_hat(self.table.block_index(n)))


def _require_exact(seq: ApproxSeq) -> None:
    if not seq.is_exact:
        raise InputError(
            f"psi family {seq.describe()} is not rational-valued; arc sweeps "
            f"need exact radii")


# ---------------------------------------------------------------------------
# Block ball unions (the shrinking-target set of one convergent block)


@dataclass
class BlockUnion:
    """Union over q_k <= n < q_{k+1} of B(n theta, psi(n)), with the
    analytic measure bound 2 q_k psi(q_k) + sum_{n=2 q_k}^{q_{k+1}-1}
    min(2 psi(n), d_hat_k)."""

    k: int
    q_k: int
    q_k1: int
    union: ArcUnion
    ball_count: int
    bound: Fraction
    bound_holds: bool
    surrogate: Fraction
    budget: Fraction

    def to_json(self) -> dict:
        return {"k": self.k, "qk": str(self.q_k), "qk1": str(self.q_k1),
                "measure": frac_str(self.union.measure),
                "ball_count": self.ball_count,
                "bound": frac_str(self.bound),
                "bound_holds": self.bound_holds,
                "budget": frac_str(self.budget)}


def build_block_union(table: ConvergentTable, seq: ApproxSeq, k: int,
                      cap: int = DEFAULT_ARC_CAP,
                      geom: Optional[SurrogateGeometry] = None) -> BlockUnion:
    _require_exact(seq)
    table.ensure(k + 2)
    q_k, q_k1 = table.q(k), table.q(k + 1)
    if q_k1 - q_k > cap:
        raise InputError(f"block length {q_k1 - q_k} exceeds arc cap {cap}")
    geom = geom or SurrogateGeometry(table, min_depth=k + 4)
    centers, radii = [], []
    for n in range(q_k, q_k1):
        centers.append(geom.orbit_point(n))
        radii.append(seq.value(n).lo)
    union = ArcUnion.from_balls(centers, radii)
    d_hat = geom.d_hat(k)
    bound = 2 * q_k * seq.value(q_k).lo
    for n in range(2 * q_k, q_k1):
        bound += min(2 * seq.value(n).lo, d_hat)
    bound = min(bound, Fraction(1))
    return BlockUnion(k, q_k, q_k1, union, q_k1 - q_k, bound,
                      union.measure <= bound, geom.theta_hat,
                      geom.budget_width * q_k1)


# ---------------------------------------------------------------------------
# Calibrated disjoint families


@dataclass
class DisjointBallFamily:
    """For each 0 <= i < a_{k+1}, balls centered at the orbit points with
    q_{k+1}-(i+1)q_k < n <= q_{k+1}-i q_k, all with radius
    h(q_{k+1}-i q_k)/2.  Consecutive orbit points up to q_{k+1} are at
    least d_hat(k) apart and every diameter is at most d_hat(k), so the
    balls are pairwise disjoint; this is checked exactly."""

    k: int
    a_next: int
    q_k: int
    q_k1: int
    balls: list          # (center, radius, n, i)
    subunions: list      # ArcUnion per i
    union: ArcUnion
    measure: Fraction    # sum of diameters == union measure
    radii: list          # radius per i
    surrogate: Fraction
    budget: Fraction

    def to_json(self) -> dict:
        return {"k": self.k, "a_next": self.a_next, "qk": str(self.q_k),
                "qk1": str(self.q_k1), "ball_count": len(self.balls),
                "measure": frac_str(self.measure),
                "radii": [frac_str(r) for r in self.radii],
                "budget": frac_str(self.budget)}


def build_disjoint_family(table: ConvergentTable, seq: ApproxSeq, k: int,
                          cap: int = DEFAULT_ARC_CAP,
                          geom: Optional[SurrogateGeometry] = None,
                          ) -> DisjointBallFamily:
    _require_exact(seq)
    table.ensure(k + 2)
    q_k, q_k1 = table.q(k), table.q(k + 1)
    a_next = table.a(k + 1)
    if q_k1 > cap:
        raise InputError(f"q_(k+1) = {q_k1} exceeds arc cap {cap}")
    geom = geom or SurrogateGeometry(table, min_depth=k + 4)
    balls = []
    subunions = []
    radii = []
    for i in range(a_next):
        m = q_k1 - i * q_k
        radius = geom.h(seq, m) / 2
        radii.append(radius)
        group_centers = []
        for n in range(q_k1 - (i + 1) * q_k + 1, q_k1 - i * q_k + 1):
            c = geom.orbit_point(n)
            balls.append((c, radius, n, i))
            group_centers.append(c)
        subunions.append(ArcUnion.from_balls(group_centers,
                                             [radius] * len(group_centers)))
    _assert_disjoint(balls)
    union = ArcUnion.from_raw((c - r, c + r) for c, r, _, _ in balls)
    total = sum((2 * r for _, r, _, _ in balls), Fraction(0))
    if union.measure != total:
        raise InternalInvariantError(
            f"family at k={k}: union measure {union.measure} != sum of "
            f"diameters {total}")
    return DisjointBallFamily(k, a_next, q_k, q_k1, balls, subunions, union,
                              total, radii, geom.theta_hat,
                              geom.budget_width * q_k1)


def _assert_disjoint(balls: list) -> None:
    if len(balls) <= 1:
        return
    pts = sorted((frac_part(c), r) for c, r, _, _ in balls)
    for (c1, r1), (c2, r2) in zip(pts, pts[1:]):
        if c2 - c1 < r1 + r2:
            raise InternalInvariantError(
                f"balls at {c1} and {c2} overlap (radii {r1}, {r2})")
    (c_first, r_first), (c_last, r_last) = pts[0], pts[-1]
    if (c_first + 1) - c_last < r_last + r_first:
        raise InternalInvariantError("wrap-around balls overlap")


def orbit_separation_check(table: ConvergentTable, k: int,
                           geom: Optional[SurrogateGeometry] = None) -> bool:
    """Any two of {n theta_hat : 1 <= n <= q_{k+1}} are >= d_hat(k) apart."""
    table.ensure(k + 2)
    geom = geom or SurrogateGeometry(table, min_depth=k + 4)
    d = geom.d_hat(k)
    pts = sorted(geom.orbit_point(n) for n in range(1, table.q(k + 1) + 1))
    gaps_ok = all(b - a >= d for a, b in zip(pts, pts[1:]))
    wrap_ok = (pts[0] + 1) - pts[-1] >= d
    return gaps_ok and wrap_ok


def family_containment_check(fam: DisjointBallFamily, table: ConvergentTable,
                             seq: ApproxSeq,
                             geom: Optional[SurrogateGeometry] = None) -> bool:
    """The calibrated family is covered by the plain psi-balls over
    q_{k-1} < n <= q_{k+1}."""
    geom = geom or SurrogateGeometry(table, min_depth=fam.k + 4)
    q_prev = table.q(fam.k - 1) if fam.k >= 1 else 0
    centers, radii = [], []
    for n in range(q_prev + 1, fam.q_k1 + 1):
        centers.append(geom.orbit_point(n))
        radii.append(seq.value(n).lo)
    cover = ArcUnion.from_balls(centers, radii)
    return fam.union.is_subset_of(cover)


# ---------------------------------------------------------------------------
# Orbit hit counting


def sorted_orbit_residues(theta_hat: Fraction, count: int) -> tuple:
    """Residues n*p mod q for n = 0..count-1 (theta_hat = p/q), sorted.
    Dividing by q gives the orbit points; integer residues keep the
    counting exact and fast."""
    p, q = theta_hat.numerator, theta_hat.denominator
    res = sorted((n * p) % q for n in range(count))
    return tuple(res), q


def denjoy_koksma_count(theta_hat: Fraction, q_k: int, arc_lo: Fraction,
                        arc_hi: Fraction,
                        orbit: Optional[tuple] = None) -> dict:
    """Count visits of {0, theta, ..., (q_k - 1) theta} to the half-open arc
    [arc_lo, arc_hi) and compare with the variation bound q_k * |arc| + 2."""
    arc = ArcUnion.from_raw([(arc_lo, arc_hi)])
    if orbit is None:
        orbit = sorted_orbit_residues(theta_hat, q_k)
    residues, q = orbit
    count = 0
    for lo, hi in arc.arcs:
        # residue r is in [lo, hi) iff lo*q <= r < hi*q
        lo_i = -((-lo.numerator * q) // lo.denominator)  # ceil(lo*q)
        hi_i = -((-hi.numerator * q) // hi.denominator)  # ceil(hi*q)
        count += bisect.bisect_left(residues, hi_i) - \
            bisect.bisect_left(residues, lo_i)
    bound = q_k * arc.measure + 2
    return {"count": count, "measure": arc.measure, "bound": bound,
            "holds": Fraction(count) <= bound}


# ---------------------------------------------------------------------------
# Pairwise overlap (quasi-independence) bounds


@dataclass
class OverlapReport:
    k: int
    ell: int
    mu_k: Fraction
    mu_l: Fraction
    mu_kl: Fraction
    intermediate_holds: bool  # mu_kl <= mu_k mu_l + 3 q_{l+1}/q_k mu_k
    final_holds: bool         # mu_kl <= mu_k mu_l + 6 mu_k / 2^((k-l)/2)

    def to_json(self) -> dict:
        return {"k": self.k, "ell": self.ell,
                "mu_k": frac_str(self.mu_k), "mu_l": frac_str(self.mu_l),
                "mu_kl": frac_str(self.mu_kl),
                "intermediate_holds": self.intermediate_holds,
                "final_holds": self.final_holds}


def _le_with_root2_slack(excess: Fraction, coeff: Fraction, k_minus_l: int) -> bool:
    """excess <= coeff / 2^(k_minus_l / 2), decided exactly by squaring."""
    if excess <= 0:
        return True
    if coeff <= 0:
        return False
    # excess^2 * 2^(k-l) <= coeff^2
    return excess * excess * (2 ** k_minus_l) <= coeff * coeff


def quasi_independence_check(fam_k: DisjointBallFamily,
                             fam_l: DisjointBallFamily) -> OverlapReport:
    if fam_l.k >= fam_k.k:
        raise InputError("need ell < k")
    mu_k, mu_l = fam_k.measure, fam_l.measure
    mu_kl = measure_intersection(fam_k.union, fam_l.union)
    q_l1 = fam_l.q_k1
    q_k = fam_k.q_k
    intermediate = mu_kl <= mu_k * mu_l + Fraction(3 * q_l1, q_k) * mu_k
    final = _le_with_root2_slack(mu_kl - mu_k * mu_l, 6 * mu_k,
                                 fam_k.k - fam_l.k)
    return OverlapReport(fam_k.k, fam_l.k, mu_k, mu_l, mu_kl,
                         intermediate, final)


# ---------------------------------------------------------------------------
# Cumulative mass vs family measure


@dataclass
class MassReport:
    K: int
    lhs: Fraction
    rhs: Fraction
    holds: bool
    per_k: list  # (k, block mass, family measure)

    def to_json(self) -> dict:
        return {"K": self.K, "lhs": frac_str(self.lhs),
                "rhs": frac_str(self.rhs), "holds": self.holds,
                "per_k": [{"k": k, "block_mass": frac_str(m),
                           "family_measure": frac_str(g)}
                          for k, m, g in self.per_k]}


def mass_measure_check(table: ConvergentTable, seq: ApproxSeq, K: int,
                       cap: int = DEFAULT_ARC_CAP) -> MassReport:
    """Exact check that sum_{k<=K} (block mass of h) + q_K h(q_{K+1}) is at
    most sum_{k<=K} measure(family_k), the inequality that converts
    divergence of the h-series into divergence of the family measures."""
    _require_exact(seq)
    table.ensure(K + 3)
    geom = SurrogateGeometry(table, min_depth=K + 5)
    per_k = []
    lhs = Fraction(0)
    rhs = Fraction(0)
    for k in range(K + 1):
        q_k, q_k1 = table.q(k), table.q(k + 1)
        if q_k1 - q_k > cap:
            raise InputError(f"block {k} longer than cap {cap}")
        mass = sum((geom.h(seq, n) for n in range(q_k, q_k1)), Fraction(0))
        fam = build_disjoint_family(table, seq, k, cap, geom)
        per_k.append((k, mass, fam.measure))
        lhs += mass
        rhs += fam.measure
    lhs += table.q(K) * geom.h(seq, table.q(K + 1))
    return MassReport(K, lhs, rhs, lhs <= rhs, per_k)
