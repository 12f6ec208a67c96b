"""Sampled evidence for the hit/miss dichotomy.

For a sampled target s, counts solutions of dist(n*theta - s) < psi(n)
over an index window.  Two engines:

* sweep: iterate n once in B-bit fixed point, locating affected samples in
  a sorted array by bisection.  Orbit error grows linearly (eps_n <=
  n * eps_theta) and every decision within the error band is reported as
  ambiguous rather than silently resolved.  Used for windows up to the
  sweep cap.

* lattice: for piecewise-constant psi the hit count over a segment with
  constant radius r equals the number of integer pairs (n, i) with
  |n*theta_hat - i - s| < r, a floor-sum computable in logarithmic time.
  This makes astronomically long windows exact and affordable; the
  surrogate error is again folded into an ambiguity band.

Sample values are derived from SHA-256 of (seed, index), so results are
reproducible across platforms and independent of evaluation order; worker
counts cannot change a single bit of the output.
"""

from __future__ import annotations

import bisect
import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Optional, Sequence

from .cf_real import ConvergentTable, PartialQuotientStream
from .circle_sets import ArcUnion, SurrogateGeometry
from .errors import InputError
from .intervals import RatInterval, as_fraction
from .jsonfmt import frac_str
from .psi import ApproxSeq, Piecewise, PowerLaw, Table

DEFAULT_FIXED_POINT_BITS = 128
DEFAULT_SWEEP_CAP = 10 ** 8


# ---------------------------------------------------------------------------
# Reproducible sample generation


def sample_fixed_point(seed: int, index: int, bits: int) -> int:
    """Sample index -> fixed-point value in [0, 2**bits), one independent
    derivation per index so evaluation order is irrelevant."""
    out = b""
    counter = 0
    while len(out) * 8 < bits:
        out += hashlib.sha256(f"{seed}|{index}|{counter}".encode()).digest()
        counter += 1
    return int.from_bytes(out, "big") >> (len(out) * 8 - bits)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class HitReport:
    s_fp: int
    bits: int
    n_lo: int
    n_hi: int
    hit_count: int
    first_hit: Optional[int]
    ambiguous_count: int
    engine: str

    @property
    def s_hex(self) -> str:
        return f"{self.s_fp:0{(self.bits + 3) // 4}x}"

    def to_json(self) -> dict:
        return {"s": self.s_hex, "bits": self.bits,
                "window": [str(self.n_lo), str(self.n_hi)],
                "hit_count": self.hit_count,
                "first_hit": None if self.first_hit is None else str(self.first_hit),
                "ambiguous_count": self.ambiguous_count,
                "engine": self.engine}


@dataclass
class DichotomyEstimate:
    M: int
    n_lo: int
    n_hi: int
    rng_seed: int
    bits: int
    fraction_hit: Fraction
    confidence_radius: Fraction
    ambiguous_only: int
    engine: str
    samples: list  # per-sample HitReport, in index order

    def to_json(self) -> dict:
        return {"M": self.M, "window": [str(self.n_lo), str(self.n_hi)],
                "seed": self.rng_seed, "bits": self.bits,
                "fraction_hit": frac_str(self.fraction_hit),
                "confidence_radius": frac_str(self.confidence_radius),
                "ambiguous_only": self.ambiguous_only,
                "engine": self.engine}

    def csv_rows(self) -> list:
        rows = [["index", "s_hex", "hit_count", "first_hit", "ambiguous_count"]]
        for i, rep in enumerate(self.samples):
            rows.append([i, rep.s_hex, rep.hit_count,
                         "" if rep.first_hit is None else rep.first_hit,
                         rep.ambiguous_count])
        return rows


# ---------------------------------------------------------------------------
# Radius suppliers (fixed-point, with directed rounding)


class _RadiusFP:
    """psi(n) scaled by 2**bits with floor/ceil rounding."""

    def __init__(self, seq: ApproxSeq, bits: int):
        self.seq = seq
        self.bits = bits
        self.scale = 1 << bits
        self._fast_harmonic = None
        if isinstance(seq, PowerLaw) and seq.alpha == 1:
            # r(n) = c/n: precompute c * 2^bits as a fraction
            self._fast_harmonic = (seq.c.numerator << bits, seq.c.denominator)

    def bounds(self, n: int) -> tuple:
        if self._fast_harmonic is not None:
            num, den = self._fast_harmonic
            lo = num // (den * n)
            return lo, lo + 1
        v = self.seq.value(n, self.bits + 16)
        lo = (v.lo.numerator << self.bits) // v.lo.denominator
        hi = -((-v.hi.numerator << self.bits) // v.hi.denominator)
        return lo, hi


# ---------------------------------------------------------------------------
# Engine 1: fixed-point sweep


def _sweep(theta_fp: int, eps_num: int, eps_den: int, seq: ApproxSeq,
           bits: int, n_lo: int, n_hi: int, samples: Sequence[tuple],
           stop_at_first: bool = False) -> list:
    """samples: list of (value_fp, original_index), any order.  Returns
    per-sample [hit_count, first_hit, ambiguous_count] keyed by position in
    `samples`.  stop_at_first ends the scan once every sample has an
    unambiguous hit (single-sample callers use it as early exit)."""
    scale = 1 << bits
    mask = scale - 1
    order = sorted(range(len(samples)), key=lambda i: samples[i][0])
    vals = [samples[i][0] for i in order]
    out = [[0, None, 0] for _ in samples]
    radius = _RadiusFP(seq, bits)
    y = (n_lo * theta_fp) & mask
    m = len(vals)
    unhit = m
    for n in range(n_lo, n_hi + 1):
        r_lo, r_hi = radius.bounds(n)
        band = (n * eps_num) // eps_den + 1
        reach = r_hi + band
        strict = r_lo - band
        lo_edge = y - reach
        hi_edge = y + reach
        ranges = []
        if lo_edge < 0:
            ranges.append((lo_edge + scale, scale))
            ranges.append((0, hi_edge))
        elif hi_edge > scale:
            ranges.append((lo_edge, scale))
            ranges.append((0, hi_edge - scale))
        else:
            ranges.append((lo_edge, hi_edge))
        for a, b in ranges:
            i = bisect.bisect_left(vals, a)
            while i < m and vals[i] < b:
                d = vals[i] - y
                if d < 0:
                    d = -d
                if d > scale - d:
                    d = scale - d
                rec = out[order[i]]
                if d < strict:
                    rec[0] += 1
                    if rec[1] is None:
                        rec[1] = n
                        unhit -= 1
                else:
                    rec[2] += 1
                i += 1
        if stop_at_first and unhit == 0:
            break
        y = (y + theta_fp) & mask
    return out


# ---------------------------------------------------------------------------
# Engine 2: exact lattice counts for piecewise-constant radii


def floor_sum(n: int, m: int, a: int, b: int) -> int:
    """sum_{i=0}^{n-1} floor((a*i + b) / m) for m > 0, any-sign a, b."""
    if n <= 0:
        return 0
    ans = 0
    if a < 0:
        a2 = a % m
        ans -= n * (n - 1) // 2 * ((a2 - a) // m)
        a = a2
    if b < 0:
        b2 = b % m
        ans -= n * ((b2 - b) // m)
        b = b2
    while True:
        if a >= m:
            ans += n * (n - 1) // 2 * (a // m)
            a %= m
        if b >= m:
            ans += n * (b // m)
            b %= m
        y = a * n + b
        if y < m:
            return ans
        n, b, m, a = y // m, y % m, a, m


def lattice_hit_count(theta: Fraction, s: Fraction, r: Fraction,
                      n_lo: int, n_hi: int) -> int:
    """#{n in [n_lo, n_hi] : dist(n*theta - s) < r} for rational inputs,
    via two floor sums (time logarithmic in all magnitudes)."""
    if r <= 0:
        return 0
    if 2 * r > 1:
        return n_hi - n_lo + 1
    # count integers i with n*theta - s - r < i < n*theta - s + r per n:
    # ceil(x + r) - floor(x - r) - 1 with x = n*theta - s
    pn, pd = theta.numerator, theta.denominator
    sn, sd = s.numerator, s.denominator
    rn, rd = r.numerator, r.denominator
    D = pd * sd * rd
    A = pn * sd * rd
    S = sn * pd * rd
    R = rn * pd * sd
    count = n_hi - n_lo + 1
    # sum ceil((A n - S + R)/D) = -sum floor((-A n + S - R)/D)
    c1 = -floor_sum(count, D, -A, S - R + (-A) * n_lo)
    c2 = floor_sum(count, D, A, -S - R + A * n_lo)
    return c1 - c2 - count


def _segments_for(seq: ApproxSeq, n_lo: int, n_hi: int) -> list:
    """Split [n_lo, n_hi] into maximal ranges of constant psi; only defined
    for piecewise/table families."""
    if isinstance(seq, Piecewise):
        cuts = [b for b in seq.breaks if n_lo < b <= n_hi]
        segs = []
        start = n_lo
        for c in cuts + [n_hi + 1]:
            segs.append((start, c - 1, seq.piece_value(start)))
            start = c
            if start > n_hi:
                break
        return segs
    if isinstance(seq, Table):
        segs = []
        start = n_lo
        cur = seq.point_value(start)
        for n in range(n_lo + 1, n_hi + 1):
            v = seq.point_value(n)
            if v != cur:
                segs.append((start, n - 1, cur))
                start, cur = n, v
        segs.append((start, n_hi, cur))
        return segs
    if isinstance(seq, PowerLaw) and seq.alpha == 0:
        return [(n_lo, n_hi, seq.c)]
    raise InputError(
        f"window longer than the sweep cap needs piecewise-constant psi; "
        f"{seq.describe()} is not")


def _lattice_report(theta_hat: Fraction, band: Fraction, seq: ApproxSeq,
                    n_lo: int, n_hi: int, s: Fraction) -> tuple:
    """(hit_count, first_hit, ambiguous_count) by exact segment counts."""
    segments = _segments_for(seq, n_lo, n_hi)
    hits = 0
    ambiguous = 0
    first_hit = None
    for a, b, r in segments:
        strict = lattice_hit_count(theta_hat, s, r - band, a, b)
        wide = lattice_hit_count(theta_hat, s, r + band, a, b)
        hits += strict
        ambiguous += wide - strict
        if strict > 0 and first_hit is None:
            lo_n, hi_n = a, b
            while lo_n < hi_n:  # binary search the earliest strict hit
                mid = (lo_n + hi_n) // 2
                if lattice_hit_count(theta_hat, s, r - band, a, mid) > 0:
                    hi_n = mid
                else:
                    lo_n = mid + 1
            first_hit = lo_n
    return hits, first_hit, ambiguous


# ---------------------------------------------------------------------------
# Public operations


def _theta_fixed_point(table: ConvergentTable, bits: int,
                       n_hi: int) -> tuple:
    """(theta_fp, eps_num, eps_den): fixed-point value and a bound
    |theta - theta_fp/2^bits| <= eps_num/eps_den, with the enclosure width
    kept below 2**-(bits + log2 n_hi) so n_hi steps stay within one band
    unit."""
    need = Fraction(1, (1 << bits) * 4 * max(n_hi, 1))
    enc = table.theta_enclosure(need)
    mid = (enc.lo + enc.hi) / 2
    theta_fp = (mid.numerator << bits) // mid.denominator
    eps = enc.width / 2 + Fraction(1, 1 << bits)
    return theta_fp, eps.numerator * (1 << bits), eps.denominator


def _as_table(source) -> ConvergentTable:
    if isinstance(source, ConvergentTable):
        return source
    if isinstance(source, PartialQuotientStream):
        return ConvergentTable(source)
    raise InputError("need a stream or convergent table")


def _pick_engine(seq: ApproxSeq, span: int, sweep_cap: int) -> str:
    """Piecewise-constant families always go to the exact lattice engine;
    everything else sweeps, refusing windows beyond the cap."""
    if isinstance(seq, (Piecewise, Table)) or \
            (isinstance(seq, PowerLaw) and seq.alpha == 0):
        return "lattice"
    if span <= sweep_cap:
        return "sweep"
    raise InputError(
        f"window of {span} steps exceeds the sweep cap {sweep_cap} and "
        f"{seq.describe()} is not piecewise-constant; no exact engine "
        f"applies")


def count_hits(source, seq: ApproxSeq, s: "Fraction | int", n_lo: int,
               n_hi: int, bits: int = DEFAULT_FIXED_POINT_BITS,
               sweep_cap: int = DEFAULT_SWEEP_CAP,
               until_first: bool = False) -> HitReport:
    """Hit/ambiguous counts for one target s (a Fraction in [0,1) or an
    already-scaled fixed-point integer).  With until_first the sweep stops
    at the first unambiguous hit (counts then cover only the scanned
    prefix)."""
    if n_lo < 1 or n_hi < n_lo:
        raise InputError("need 1 <= n_lo <= n_hi")
    table = _as_table(source)
    if isinstance(s, int):
        s_fp = s
    else:
        s = as_fraction(s)
        s_fp = (s.numerator << bits) // s.denominator
    span = n_hi - n_lo + 1
    engine = _pick_engine(seq, span, sweep_cap)
    if engine == "sweep":
        theta_fp, en, ed = _theta_fixed_point(table, bits, n_hi)
        hits, first, amb = _sweep(theta_fp, en, ed, seq, bits, n_lo, n_hi,
                                  [(s_fp, 0)], stop_at_first=until_first)[0]
        return HitReport(s_fp, bits, n_lo, n_hi, hits, first, amb, "sweep")
    width = Fraction(1, (1 << (bits + 8)) * n_hi)
    enc = table.theta_enclosure(width)
    band = enc.width * n_hi
    s_exact = Fraction(s_fp, 1 << bits)
    hits, first, amb = _lattice_report(enc.surrogate, band, seq, n_lo, n_hi,
                                       s_exact)
    return HitReport(s_fp, bits, n_lo, n_hi, hits, first, amb, "lattice")


def _chunk_worker(args) -> list:
    (engine, stream, seq, bits, n_lo, n_hi, chunk) = args
    table = ConvergentTable(stream)
    if engine == "sweep":
        theta_fp, en, ed = _theta_fixed_point(table, bits, n_hi)
        return _sweep(theta_fp, en, ed, seq, bits, n_lo, n_hi, chunk)
    width = Fraction(1, (1 << (bits + 8)) * n_hi)
    enc = table.theta_enclosure(width)
    band = enc.width * n_hi
    out = []
    for s_fp, _ in chunk:
        out.append(list(_lattice_report(enc.surrogate, band, seq, n_lo, n_hi,
                                        Fraction(s_fp, 1 << bits))))
    return out


def dichotomy_estimate(source, seq: ApproxSeq, M: int, n_lo: int, n_hi: int,
                       seed: int, bits: int = DEFAULT_FIXED_POINT_BITS,
                       jobs: int = 1,
                       sweep_cap: int = DEFAULT_SWEEP_CAP) -> DichotomyEstimate:
    """Fraction of M seeded uniform targets with at least one unambiguous
    hit in the window.  Deterministic given (seed, M, window, theta, psi);
    the jobs parameter only partitions work and cannot change any output
    bit."""
    if M < 1:
        raise InputError("need M >= 1")
    table = _as_table(source)
    samples = [(sample_fixed_point(seed, i, bits), i) for i in range(M)]
    span = n_hi - n_lo + 1
    engine = _pick_engine(seq, span, sweep_cap)
    if engine == "lattice":
        _segments_for(seq, n_lo, n_hi)  # validate family before forking
    if jobs <= 1:
        chunks = [samples]
    else:
        size = (M + jobs - 1) // jobs
        chunks = [samples[i:i + size] for i in range(0, M, size)]
    if len(chunks) == 1:
        results = [_chunk_worker((engine, table.stream, seq, bits, n_lo,
                                  n_hi, chunks[0]))]
    else:
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(pool.map(_chunk_worker,
                                    [(engine, table.stream, seq, bits, n_lo,
                                      n_hi, ch) for ch in chunks]))
    per_sample: list = [None] * M
    for chunk, res in zip(chunks, results):
        for (s_fp, idx), (hits, first, amb) in zip(chunk, res):
            per_sample[idx] = HitReport(s_fp, bits, n_lo, n_hi, hits, first,
                                        amb, engine)
    hit_m = sum(1 for rep in per_sample if rep.hit_count >= 1)
    amb_only = sum(1 for rep in per_sample
                   if rep.hit_count == 0 and rep.ambiguous_count >= 1)
    frac = Fraction(hit_m, M)
    return DichotomyEstimate(M, n_lo, n_hi, seed, bits, frac,
                             _binomial_radius(frac, M), amb_only, engine,
                             per_sample)


def _binomial_radius(p: Fraction, m: int) -> Fraction:
    """95% normal-approximation radius 1.96 sqrt(p(1-p)/M), rounded up
    rationally (deterministic; no floats)."""
    var = p * (1 - p) / m
    if var == 0:
        return Fraction(0)
    scale = 1 << 64
    num = var.numerator * scale * scale
    root = isqrt(num // var.denominator) + 1
    return Fraction(196, 100) * Fraction(root, scale)


def window_measure(source, seq: ApproxSeq, n_lo: int, n_hi: int,
                   cap: int = 10 ** 5) -> RatInterval:
    """Exact measure of the union of B(n theta_hat, psi(n)) over the
    window (windows longer than the arc cap refuse; use the sampled
    estimate there)."""
    if n_hi - n_lo + 1 > cap:
        raise InputError(
            f"window of {n_hi - n_lo + 1} exceeds the arc cap {cap}; use "
            f"dichotomy_estimate instead")
    table = _as_table(source)
    table.ensure(2)
    geom = SurrogateGeometry(table, min_depth=4)
    centers = []
    radii = []
    for n in range(n_lo, n_hi + 1):
        v = seq.value(n)
        if not v.is_point():
            raise InputError("window_measure needs rational-valued psi")
        centers.append(geom.orbit_point(n))
        radii.append(v.lo)
    union = ArcUnion.from_balls(centers, radii)
    mu = union.measure
    return RatInterval(mu, mu)
