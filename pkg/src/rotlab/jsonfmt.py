"""Canonical JSON/CSV formatting: rationals as "p/q" strings, intervals as
[lo, hi] pairs.  Reports must be byte-identical across runs, so every
serializer here is deterministic (sorted keys, fixed separators)."""

from __future__ import annotations

import json
from fractions import Fraction

from .intervals import RatInterval


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_frac(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def interval_json(iv: RatInterval) -> list:
    return [frac_str(iv.lo), frac_str(iv.hi)]


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
