import math
from fractions import Fraction

import pytest

from ifsdim.mobius import (
    Disc,
    Mobius,
    deriv_range_disc,
    deriv_range_interval,
    disc_image,
    fixed_point_in,
    interval_image,
)


def test_identity_and_composition():
    m = Mobius(2, 1, 0, 1)
    n = Mobius(0, 1, 1, 2)  # x -> 1/(2+x)
    comp = m.compose(n)
    x = 0.3
    assert comp(x) == pytest.approx(m(n(x)), rel=1e-15)


def test_interval_image_matches_fraction_arithmetic():
    # 1/(2+x) on [0,1]: endpoints via exact rationals
    m = Mobius(0, 1, 1, 2)
    lo, hi = interval_image(m, (0.0, 1.0))
    assert lo == pytest.approx(float(Fraction(1, 3)), abs=1e-15)
    assert hi == pytest.approx(float(Fraction(1, 2)), abs=1e-15)


def test_interval_image_rejects_pole():
    m = Mobius(0, 1, 1, -0.5)  # pole at x = 0.5
    with pytest.raises(ZeroDivisionError):
        interval_image(m, (0.0, 1.0))


def test_deriv_range_interval():
    m = Mobius(0, 1, 1, 2)
    lo, hi = deriv_range_interval(m, (0.0, 1.0))
    assert lo == pytest.approx(1.0 / 9.0, rel=1e-14)
    assert hi == pytest.approx(1.0 / 4.0, rel=1e-14)


def test_disc_image_is_exact():
    # z -> 1/(3+z) maps a disc to a disc; verify by boundary sampling
    m = Mobius(0, 1, 1, 3)
    disc = Disc(0.5 + 0j, 0.5)
    img = disc_image(m, disc)
    for k in range(24):
        z = disc.center + disc.radius * complex(math.cos(k / 24 * 2 * math.pi),
                                                math.sin(k / 24 * 2 * math.pi))
        w = m(z)
        assert abs(abs(w - img.center) - img.radius) < 1e-12


def test_deriv_range_disc_brackets_samples():
    m = Mobius(0, 1, 1, complex(2, 1))
    disc = Disc(0.5 + 0j, 0.5)
    lo, hi = deriv_range_disc(m, disc)
    for k in range(16):
        z = disc.center + disc.radius * complex(math.cos(k), math.sin(k)) / 1.0001
        d = m.deriv_abs(z)
        assert lo - 1e-12 <= d <= hi + 1e-12


def test_fixed_point_similarity_and_gauss():
    assert fixed_point_in(Mobius(0.5, 0.25, 0, 1), (0.0, 1.0)) == pytest.approx(0.5)
    # x = 1/(2+x): golden-ratio-like root sqrt(2) - 1 for digit 2
    x = fixed_point_in(Mobius(0, 1, 1, 2), (0.0, 1.0))
    assert x == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-12)
