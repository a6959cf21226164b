"""Tail rules describing the infinite part of a contraction family.

A tail rule enumerates countably many branches in a canonical order of
decreasing size, organised into *generations*: finite batches whose
images from any generation onwards are confined to a shrinking envelope
around a single accumulation point.  That envelope is what lets the
cloud builder truncate an infinite alphabet at a chosen resolution
without losing any cylinder above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union

import numpy as np

from .errors import ConfigurationError
from .maps import Composite, ComplexGaussBranch, GaussBranch, MapKind, Similarity
from .mobius import (
    Disc,
    Interval,
    Mobius,
    deriv_range_disc,
    deriv_range_interval,
    disc_image,
    interval_image,
)
from .series import geometric_tail_bounds, power_sum_bounds, power_tail_bounds

Label = Union[int, tuple]
Generation = tuple[list[tuple[Label, MapKind]], Union[Interval, Disc]]


# ---------------------------------------------------------------------------
# scalar rules for similarity tails


@dataclass(frozen=True)
class PowerRule:
    """value(i) = coef * i**(-exponent)."""

    coef: float
    exponent: float

    def __post_init__(self):
        if self.coef <= 0 or self.exponent <= 0:
            raise ConfigurationError("power rule needs positive coefficient and exponent")

    def value(self, i: int) -> float:
        return self.coef * float(i) ** (-self.exponent)

    def values(self, i0: int, i1: int) -> np.ndarray:
        return self.coef * np.arange(i0, i1, dtype=float) ** (-self.exponent)

    def values_at(self, idx: np.ndarray) -> np.ndarray:
        return self.coef * np.asarray(idx, dtype=float) ** (-self.exponent)

    def first_indices_below(self, thresholds: np.ndarray) -> np.ndarray:
        """Smallest index with value(i) < threshold, per threshold (> 0)."""
        t = np.asarray(thresholds, dtype=float)
        return np.floor((self.coef / t) ** (1.0 / self.exponent)).astype(np.int64) + 1

    def sum_pow_bounds(self, t: float, start: int) -> tuple[float, float]:
        lo, hi = power_sum_bounds(self.exponent * t, start)
        scale = self.coef**t
        return scale * lo, scale * hi

    def finiteness(self) -> float:
        return 1.0 / self.exponent


@dataclass(frozen=True)
class GeometricRule:
    """value(i) = coef * base**i with base in (0,1)."""

    coef: float
    base: float

    def __post_init__(self):
        if self.coef <= 0 or not (0.0 < self.base < 1.0):
            raise ConfigurationError("geometric rule needs coef > 0 and base in (0,1)")

    def value(self, i: int) -> float:
        return self.coef * self.base**i

    def values(self, i0: int, i1: int) -> np.ndarray:
        return self.coef * self.base ** np.arange(i0, i1, dtype=float)

    def values_at(self, idx: np.ndarray) -> np.ndarray:
        return self.coef * self.base ** np.asarray(idx, dtype=float)

    def first_indices_below(self, thresholds: np.ndarray) -> np.ndarray:
        t = np.asarray(thresholds, dtype=float)
        return np.floor(np.log(t / self.coef) / math.log(self.base)).astype(np.int64) + 1

    def sum_pow_bounds(self, t: float, start: int) -> tuple[float, float]:
        return geometric_tail_bounds(self.coef, self.base, t, start)

    def finiteness(self) -> float:
        return 0.0


ScalarRule = Union[PowerRule, GeometricRule]


@dataclass(frozen=True)
class SimilarityTail:
    """Branches S_i(x) = ratio(i) x + offset(i) for i >= start.

    Offsets must decrease to zero so the accumulation point is the
    origin; ratios must decrease so sizes are monotone in the index.
    """

    ratios: ScalarRule
    offsets: ScalarRule
    start: int

    def __post_init__(self):
        if self.start < 1:
            raise ConfigurationError("tail start index must be at least 1")

    def resolve(self, label: Label) -> MapKind | None:
        if isinstance(label, (int, np.integer)) and label >= self.start:
            return Similarity(self.ratios.value(int(label)), self.offsets.value(int(label)))
        return None

    def generation_maps(self, g: int) -> list[tuple[Label, MapKind]]:
        i = self.start + g
        return [(i, Similarity(self.ratios.value(i), self.offsets.value(i)))]

    def envelope_at(self, g: int) -> Interval:
        i = self.start + g
        return (0.0, self.offsets.value(i) + self.ratios.value(i))

    def generation_reaching(self, x: float) -> int:
        if x <= 0.0:
            raise ConfigurationError("threshold must be positive")
        i = int(self.offsets.first_indices_below(np.array([x * 0.5]))[0])
        while self.envelope_at(max(i - self.start, 0))[1] >= x:
            i += 1
        return max(i - self.start, 0)

    def generations(self) -> Iterator[Generation]:
        g = 0
        while True:
            yield self.generation_maps(g), self.envelope_at(g)
            g += 1

    def accumulation_point(self) -> float:
        return 0.0

    def sup_contraction(self) -> float:
        return self.ratios.value(self.start)

    def psi1_bounds(self, t: float, _domain) -> tuple[float, float]:
        return self.ratios.sum_pow_bounds(t, self.start)

    def finiteness_parameter(self) -> float:
        return self.ratios.finiteness()

    def arrays(self, i0: int, i1: int) -> tuple[np.ndarray, np.ndarray]:
        return self.ratios.values(i0, i1), self.offsets.values(i0, i1)

    def arrays_at(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.ratios.values_at(idx), self.offsets.values_at(idx)


# ---------------------------------------------------------------------------
# restricted continued-fraction digit sets


@dataclass(frozen=True)
class SpacedDigits:
    """Digits floor(n**p) for n >= 2, polynomially spaced."""

    p: float

    def __post_init__(self):
        if self.p < 1.0:
            raise ConfigurationError("spaced digit sets need p >= 1")

    def digits(self) -> Iterator[int]:
        n = 2
        last = 1
        while True:
            b = math.floor(n**self.p)
            if b > last:
                yield b
                last = b
            n += 1

    def contains(self, b: int) -> bool:
        if b < 2:
            return False
        n = round(b ** (1.0 / self.p))
        return any(math.floor(m**self.p) == b for m in (n - 1, n, n + 1) if m >= 2)

    def digit_at(self, g: int) -> int:
        return math.floor((2 + g) ** self.p)

    def index_of_first_digit_above(self, x: float) -> int:
        n = max(2, math.ceil(max(x, 1.0) ** (1.0 / self.p)) - 1)
        while math.floor(n**self.p) <= x:
            n += 1
        return n - 2

    def sup_sum_bounds(self, s: float, shift: int) -> tuple[float, float]:
        """Bracket of sum over digits b of (b + shift)^(-s)."""
        if self.p * s <= 1.0:
            return math.inf, math.inf
        head_n = 2048
        ns = np.arange(2, head_n, dtype=float)
        bs = np.floor(ns**self.p) + shift
        head = float(np.sum(bs ** (-s)))
        # For n >= head_n:  n^p (1 - head_n^-p) < floor(n^p) + shift <= n^p + shift
        lo_fac = (1.0 + (shift + 1.0) * head_n ** (-self.p)) ** (-s)
        hi_fac = (1.0 - head_n ** (-self.p)) ** (-s)
        tlo, thi = power_tail_bounds(self.p * s, head_n)
        return head + lo_fac * tlo, head + hi_fac * thi

    def finiteness_parameter(self) -> float:
        return 1.0 / (2.0 * self.p)

    def min_digit(self) -> int:
        return math.floor(2**self.p)


@dataclass(frozen=True)
class ClusteredDigits:
    """Digits in the union of blocks [2^k, 2^k + 2^(k*alpha)]."""

    alpha: float
    k_explicit: int = 28

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ConfigurationError("clustered digit sets need alpha in (0,1)")

    def _block(self, k: int) -> tuple[int, int]:
        lo = 2**k
        hi = math.floor(2**k + 2 ** (k * self.alpha))
        return lo, hi

    def digits(self) -> Iterator[int]:
        k = 1
        while True:
            lo, hi = self._block(k)
            yield from range(lo, hi + 1)
            k += 1

    def contains(self, b: int) -> bool:
        if b < 2:
            return False
        k = b.bit_length() - 1
        lo, hi = self._block(k)
        return lo <= b <= hi

    def digit_at(self, g: int) -> int:
        k = 1
        rest = g
        while True:
            lo, hi = self._block(k)
            size = hi - lo + 1
            if rest < size:
                return lo + rest
            rest -= size
            k += 1

    def index_of_first_digit_above(self, x: float) -> int:
        g = 0
        k = 1
        while True:
            lo, hi = self._block(k)
            if hi > x:
                return g + max(0, math.floor(min(x, hi)) + 1 - lo) if lo <= x else g
            g += hi - lo + 1
            k += 1

    def sup_sum_bounds(self, s: float, shift: int) -> tuple[float, float]:
        if s <= self.alpha:
            return math.inf, math.inf
        head = 0.0
        for k in range(1, self.k_explicit + 1):
            lo, hi = self._block(k)
            bs = np.arange(lo, hi + 1, dtype=float) + shift
            head += float(np.sum(bs ** (-s)))
        # blocks k > k_explicit: count in [2^(k a), 2^(k a) + 1], and every
        # shifted digit lies in [2^k, 2^(k+2)]
        k0 = self.k_explicit + 1
        qa = 2.0 ** (self.alpha - s)
        qs = 2.0**-s
        hi_tail = (qa**k0 / (1.0 - qa)) + (qs**k0 / (1.0 - qs))
        lo_tail = (4.0**-s) * qa**k0 / (1.0 - qa)
        return head + lo_tail, head + hi_tail

    def finiteness_parameter(self) -> float:
        return self.alpha / 2.0

    def min_digit(self) -> int:
        return 2


@dataclass(frozen=True)
class FullDigits:
    """Every integer digit from min_digit upwards."""

    start: int = 2

    def __post_init__(self):
        if self.start < 2:
            raise ConfigurationError("full digit sets start at 2; digit 1 needs the recoded system")

    def digits(self) -> Iterator[int]:
        b = self.start
        while True:
            yield b
            b += 1

    def contains(self, b: int) -> bool:
        return b >= self.start

    def digit_at(self, g: int) -> int:
        return self.start + g

    def index_of_first_digit_above(self, x: float) -> int:
        return max(0, math.floor(x) + 1 - self.start)

    def sup_sum_bounds(self, s: float, shift: int) -> tuple[float, float]:
        return power_sum_bounds(s, self.start + shift)

    def finiteness_parameter(self) -> float:
        return 0.5

    def min_digit(self) -> int:
        return self.start


DigitSet = Union[SpacedDigits, ClusteredDigits, FullDigits]


@dataclass(frozen=True)
class GaussDigitTail:
    """Continued-fraction branches x -> 1/(b + x) over an infinite digit set."""

    digits: DigitSet

    def resolve(self, label: Label) -> MapKind | None:
        if isinstance(label, (int, np.integer)) and self.digits.contains(int(label)):
            return GaussBranch(int(label))
        return None

    def generation_maps(self, g: int) -> list[tuple[Label, MapKind]]:
        b = self.digits.digit_at(g)
        return [(b, GaussBranch(b))]

    def envelope_at(self, g: int) -> Interval:
        return (0.0, 1.0 / self.digits.digit_at(g))

    def generation_reaching(self, x: float) -> int:
        if x <= 0.0:
            raise ConfigurationError("threshold must be positive")
        return self.digits.index_of_first_digit_above(1.0 / x)

    def generations(self) -> Iterator[Generation]:
        g = 0
        while True:
            yield self.generation_maps(g), self.envelope_at(g)
            g += 1

    def accumulation_point(self) -> float:
        return 0.0

    def sup_contraction(self) -> float:
        return 1.0 / self.digits.min_digit() ** 2

    def psi1_bounds(self, t: float, _domain) -> tuple[float, float]:
        # |S_b'| on [0,1] ranges over [(b+1)^-2, b^-2]
        lo, _ = self.digits.sup_sum_bounds(2.0 * t, 1)
        _, hi = self.digits.sup_sum_bounds(2.0 * t, 0)
        return lo, hi

    def finiteness_parameter(self) -> float:
        return self.digits.finiteness_parameter()


# ---------------------------------------------------------------------------
# full complex continued-fraction alphabet


@dataclass(frozen=True)
class ComplexGaussTail:
    """Recoded branches over the full Gaussian-integer alphabet.

    The raw digit 1 is not uniformly contracting on the standard seed
    disc, so digit strings are parsed into blocks (b) for b != 1 and
    (1, b), giving the plain branches together with the uniformly
    contracting composites S_1 o S_b, exactly as for real digit sets
    containing 1.  Labels are (m, n) for plain digits and ("1b", m, n)
    for the composites.
    """

    def _shell(self, norm: int) -> list[tuple[int, int]]:
        out = []
        m = 1
        while m * m <= norm:
            rest = norm - m * m
            n = math.isqrt(rest)
            if n * n == rest:
                out.append((m, n))
                if n > 0:
                    out.append((m, -n))
            m += 1
        out.sort()
        return out

    def resolve(self, label: Label) -> MapKind | None:
        if isinstance(label, tuple) and len(label) == 3 and label[0] == "1b":
            _, m, n = label
            if m >= 1:
                return Composite((ComplexGaussBranch(1 + 0j), ComplexGaussBranch(complex(m, n))))
        if isinstance(label, tuple) and len(label) == 2:
            m, n = label
            if m >= 1 and (m, n) != (1, 0):
                return ComplexGaussBranch(complex(m, n))
        return None

    def generation_maps(self, g: int) -> list[tuple[Label, MapKind]]:
        batch: list[tuple[Label, MapKind]] = []
        for m, n in self._shell(g + 1):
            if (m, n) != (1, 0):
                batch.append(((m, n), ComplexGaussBranch(complex(m, n))))
            batch.append(
                (("1b", m, n), Composite((ComplexGaussBranch(1 + 0j), ComplexGaussBranch(complex(m, n)))))
            )
        return batch

    def envelope_at(self, g: int) -> Disc:
        r = math.sqrt(g + 1)
        return Disc(0j, 1.0 / max(r - 1.0, 1.0))

    def generation_reaching(self, x: float) -> int:
        if x <= 0.0:
            raise ConfigurationError("threshold must be positive")
        return max(0, math.ceil((1.0 / x + 1.0) ** 2) - 1)

    def generations(self) -> Iterator[Generation]:
        g = 0
        while True:
            batch = self.generation_maps(g)
            if batch:
                yield batch, self.envelope_at(g)
            g += 1

    def accumulation_point(self) -> complex:
        return 0j

    def sup_contraction(self) -> float:
        # worst plain branch is b = 1 +/- i on the seed disc |z-1/2| <= 1/2
        u = abs(complex(1, 1) + 0.5)
        return 1.0 / (u - 0.5) ** 2

    def psi1_bounds(self, t: float, domain: Disc) -> tuple[float, float]:
        if t <= 1.0:
            return math.inf, math.inf
        head_limit = 40
        lo = hi = 0.0
        one = ComplexGaussBranch(1 + 0j).mobius()
        for norm in range(1, head_limit * head_limit + 1):
            for m, n in self._shell(norm):
                b = complex(m, n)
                u = abs(b + domain.center)
                sup_term = (u - domain.radius) ** (-2.0 * t)
                inf_term = (u + domain.radius) ** (-2.0 * t)
                if (m, n) != (1, 0):
                    hi += sup_term
                    lo += inf_term
                # composite S_1 o S_b: outer derivative over the exact
                # image disc of the inner branch
                img = disc_image(ComplexGaussBranch(b).mobius(), domain)
                d1_lo, d1_hi = deriv_range_disc(one, img)
                hi += sup_term * d1_hi**t
                lo += inf_term * d1_lo**t
        # remainder over |b| > head_limit: at most pi*(6k+3) Gaussian
        # integers with Re >= 1 in each annulus [k, k+1); each term,
        # plain or composite, is at most 1.06^t * (k - 1)^(-2t) since the
        # outer derivative stays below (1 - 1/(head_limit-1))^-2
        _, thi = power_tail_bounds(2.0 * t - 1.0, head_limit - 1)
        hi += 2.0 * 1.06 * 18.0 * math.pi * thi
        return lo, hi

    def finiteness_parameter(self) -> float:
        return 1.0


# ---------------------------------------------------------------------------
# induced family for a single parabolic branch


@dataclass(frozen=True)
class InducedParabolicTail:
    """Family {P^n o S_j : n >= 0} for a parabolic branch P fixing 0.

    Generation n holds one composite per uniformly contracting base
    branch; envelopes are the images of the seed interval under P^n,
    which shrink to the parabolic fixed point.
    """

    parabolic: MapKind
    branches: tuple[tuple[Label, MapKind], ...]
    exponent: float = 1.0  # local behaviour x - P(x) ~ x^(1+q)
    domain: Interval = (0.0, 1.0)

    def _composite(self, n: int, branch: MapKind) -> MapKind:
        if n == 0:
            return branch
        return Composite((self.parabolic,) * n + (branch,))

    def resolve(self, label: Label) -> MapKind | None:
        if isinstance(label, tuple) and len(label) == 2:
            n, sub = label
            for lab, branch in self.branches:
                if lab == sub and n >= 0:
                    return self._composite(int(n), branch)
        return None

    def _power_matrix(self, n: int) -> Mobius:
        # for a Moebius parabolic fixing 0 with unit multiplier, powers
        # stay in the family: [[a, 0], [c, a]]^n is [[a, 0], [n c, a]]
        pm = self.parabolic.mobius()
        return Mobius(pm.a, 0.0, n * pm.c, pm.a)

    def generation_maps(self, g: int) -> list[tuple[Label, MapKind]]:
        return [((g, lab), self._composite(g, branch)) for lab, branch in self.branches]

    def generation_mobius(self, g: int) -> list[tuple[Label, Mobius]]:
        power = self._power_matrix(g)
        return [((g, lab), power.compose(branch.mobius())) for lab, branch in self.branches]

    def envelope_at(self, g: int) -> Interval:
        return interval_image(self._power_matrix(g), self.domain)

    def generation_reaching(self, x: float) -> int:
        if x <= 0.0:
            raise ConfigurationError("threshold must be positive")
        pm = self.parabolic.mobius()
        kappa = abs(pm.c / pm.a)
        top = max(abs(self.domain[0]), abs(self.domain[1]))
        n = max(0, math.floor((1.0 / x - 1.0 / top) / kappa) + 1)
        while self.envelope_at(n)[1] >= x:
            n += 1
        return n

    def generations(self) -> Iterator[Generation]:
        g = 0
        while True:
            yield self.generation_maps(g), self.envelope_at(g)
            g += 1

    def accumulation_point(self) -> float:
        return 0.0

    def sup_contraction(self) -> float:
        worst = 0.0
        for _, branch in self.branches:
            worst = max(worst, deriv_range_interval(branch.mobius(), self.domain)[1])
        return worst

    def psi1_bounds(self, t: float, domain: Interval) -> tuple[float, float]:
        q = self.exponent
        if t * (1.0 + q) / q <= 1.0:
            return math.inf, math.inf
        dlo, dhi, rem_coefs, n_explicit = _induced_deriv_table(self, domain)
        lo = float(np.sum(dlo**t))
        hi = float(np.sum(dhi**t))
        _, tail_hi = power_tail_bounds(2.0 * t, n_explicit)
        hi += float(np.sum(rem_coefs**t)) * tail_hi
        return lo, hi

    def finiteness_parameter(self) -> float:
        return self.exponent / (1.0 + self.exponent)


@lru_cache(maxsize=64)
def _induced_deriv_table(tail: InducedParabolicTail, domain: Interval):
    """Per-word derivative extremes for the first generations, plus the
    coefficients bounding the remainder.  These do not depend on the
    pressure exponent, so they are shared across all evaluations."""
    n_explicit = 512
    pm = tail.parabolic.mobius()
    # Moebius parabolic fixing 0 with unit multiplier: P^n(x) = x/(1 + kappa n x)
    kappa = abs(pm.c / pm.a)
    lo = []
    hi = []
    rem = []
    power = Mobius(1, 0, 0, 1)
    for n in range(n_explicit):
        for _, branch in tail.branches:
            word = power.compose(branch.mobius())
            dl, dh = deriv_range_interval(word, domain)
            lo.append(dl)
            hi.append(dh)
        power = pm.compose(power)
    for _, branch in tail.branches:
        x_lo = interval_image(branch.mobius(), domain)[0]
        if x_lo <= 0:
            raise ConfigurationError("base branch image touches the parabolic fixed point")
        d_hi = deriv_range_interval(branch.mobius(), domain)[1]
        rem.append(d_hi / (kappa * x_lo) ** 2)
    return np.array(lo), np.array(hi), np.array(rem), n_explicit


TailRule = Union[SimilarityTail, GaussDigitTail, ComplexGaussTail, InducedParabolicTail]
