"""Certified brackets for the infinite series behind pressure sums.

All bounds are elementary: explicit partial sums plus integral-comparison
remainders sharpened with the first Euler-Maclaurin correction term.  For
completely monotone terms the truncation error of that correction is
bounded by the first omitted term, which keeps every bracket rigorous
without special-function evaluation.
"""

from __future__ import annotations

import math

import numpy as np

# Relative slop added to every bracket endpoint to absorb float rounding.
_SLOP = 1e-13


def _widen(lo: float, hi: float) -> tuple[float, float]:
    pad_lo = abs(lo) * _SLOP
    pad_hi = abs(hi) * _SLOP
    return lo - pad_lo, hi + pad_hi


def power_tail_bounds(s: float, start: int) -> tuple[float, float]:
    """Certified bracket for sum_{i >= start} i^{-s}.

    Returns (inf, inf) when the series diverges (s <= 1).
    """
    if s <= 1.0:
        return math.inf, math.inf
    a = float(start)
    integral = a ** (1.0 - s) / (s - 1.0)
    em = integral + 0.5 * a ** (-s) + s / 12.0 * a ** (-s - 1.0)
    err = s * (s + 1.0) * (s + 2.0) / 720.0 * a ** (-s - 3.0)
    return _widen(em - err, em)


def power_sum_bounds(s: float, start: int, explicit: int = 4096) -> tuple[float, float]:
    """Certified bracket for sum_{i >= start} i^{-s} with an explicit head."""
    if s <= 1.0:
        return math.inf, math.inf
    cut = start + explicit
    head = float(np.sum(np.arange(start, cut, dtype=float) ** (-s)))
    lo, hi = power_tail_bounds(s, cut)
    return _widen(head + lo, head + hi)


def geometric_sum(coef: float, base: float, start: int) -> float:
    """Exact sum_{i >= start} coef * base^i for base in (0,1)."""
    if not (0.0 < base < 1.0):
        raise ValueError(f"geometric base must be in (0,1), got {base}")
    return coef * base**start / (1.0 - base)


def geometric_tail_bounds(coef: float, base: float, t: float, start: int) -> tuple[float, float]:
    """Certified bracket for sum_{i >= start} (coef * base^i)^t."""
    value = geometric_sum(coef**t, base**t, start)
    return _widen(value, value)
