"""Moebius-transform engine shared by all contraction branches.

Every branch kind in this package acts as a Moebius map
``x -> (a x + b) / (c x + d)``, with real coefficients in one dimension
and complex coefficients in two.  Compositions are 2x2 matrix products,
so cylinder images, derivative ranges and fixed points stay in closed
form at every word depth.  Integer coefficients (continued-fraction
branches) remain exact integers under composition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Interval = tuple[float, float]


@dataclass(frozen=True)
class Disc:
    """Closed disc in the complex plane."""

    center: complex
    radius: float

    def contains(self, other: "Disc", slack: float = 0.0) -> bool:
        return abs(other.center - self.center) + other.radius <= self.radius * (1.0 + slack) + slack * 1e-12

    def intersects(self, other: "Disc") -> bool:
        return abs(other.center - self.center) <= self.radius + other.radius


@dataclass(frozen=True)
class Mobius:
    """Map x -> (a x + b) / (c x + d); entries real or complex."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __call__(self, x):
        return (self.a * x + self.b) / (self.c * x + self.d)

    def compose(self, other: "Mobius") -> "Mobius":
        """Matrix product, i.e. self applied after other."""
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def deriv_abs(self, x) -> float:
        q = self.c * x + self.d
        return abs(self.det) / abs(q) ** 2


IDENTITY = Mobius(1, 0, 0, 1)


def interval_image(m: Mobius, iv: Interval) -> Interval:
    """Exact image of an interval under a real Moebius map.

    The denominator must not vanish on the interval; the map is then
    monotone there and the image is spanned by the endpoint values.
    """
    lo, hi = iv
    qlo = m.c * lo + m.d
    qhi = m.c * hi + m.d
    if qlo == 0 or qhi == 0 or (qlo > 0) != (qhi > 0):
        raise ZeroDivisionError("Moebius denominator vanishes on the interval")
    u = (m.a * lo + m.b) / qlo
    v = (m.a * hi + m.b) / qhi
    return (u, v) if u <= v else (v, u)


def deriv_range_interval(m: Mobius, iv: Interval) -> Interval:
    """Range of |m'| over an interval, exact via endpoint denominators."""
    lo, hi = iv
    qlo = abs(m.c * lo + m.d)
    qhi = abs(m.c * hi + m.d)
    if qlo == 0.0 or qhi == 0.0:
        raise ZeroDivisionError("Moebius denominator vanishes on the interval")
    det = abs(m.det)
    qmin, qmax = (qlo, qhi) if qlo <= qhi else (qhi, qlo)
    return det / qmax**2, det / qmin**2


def disc_image(m: Mobius, disc: Disc) -> Disc:
    """Exact image disc of a disc under a complex Moebius map.

    Moebius maps send circles to circles, so no enclosure slack is
    needed.  The disc must avoid the pole -d/c.
    """
    if m.c == 0:
        scale = m.a / m.d
        return Disc(scale * disc.center + m.b / m.d, abs(scale) * disc.radius)
    # Write m = a/c + (b - a d / c) / (c z + d) and invert the inner disc.
    u_center = m.c * disc.center + m.d
    u_radius = abs(m.c) * disc.radius
    mod2 = abs(u_center) ** 2 - u_radius**2
    if mod2 <= 0.0:
        raise ZeroDivisionError("Moebius pole lies inside the disc")
    inv_center = u_center.conjugate() / mod2
    inv_radius = u_radius / mod2
    coeff = m.b - m.a * m.d / m.c
    return Disc(m.a / m.c + coeff * inv_center, abs(coeff) * inv_radius)


def deriv_range_disc(m: Mobius, disc: Disc) -> Interval:
    """Range of |m'| over a disc: |det| / |c z + d|^2 with annulus bounds."""
    if m.c == 0:
        v = abs(m.det) / abs(m.d) ** 2
        return v, v
    u = abs(m.c * disc.center + m.d)
    spread = abs(m.c) * disc.radius
    qmin = u - spread
    if qmin <= 0.0:
        raise ZeroDivisionError("Moebius pole lies inside the disc")
    qmax = u + spread
    det = abs(m.det)
    return det / qmax**2, det / qmin**2


def fixed_point_in(m: Mobius, iv: Interval) -> float:
    """Attracting fixed point of a real Moebius contraction inside iv."""
    if m.c == 0:
        ratio = m.a / m.d
        if ratio == 1:
            raise ZeroDivisionError("map has no finite fixed point")
        x = (m.b / m.d) / (1 - ratio)
        return float(x)
    # c x^2 + (d - a) x - b = 0
    disc = (m.d - m.a) ** 2 + 4 * m.c * m.b
    if disc < 0:
        raise ValueError("no real fixed point")
    root = math.sqrt(disc)
    lo, hi = iv
    eps = 1e-12 * max(1.0, abs(hi), abs(lo))
    for sign in (1.0, -1.0):
        x = (m.a - m.d + sign * root) / (2 * m.c)
        if lo - eps <= x <= hi + eps:
            return float(min(max(x, lo), hi))
    raise ValueError("no fixed point inside the interval")
