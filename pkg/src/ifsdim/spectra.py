"""Closed-form Assouad spectra, bound envelopes and their diagnostics.

Every formula here is elementary arithmetic in the scale parameter
theta.  Curves are sampled on a strictly increasing grid inside (0,1);
the quasi-Assouad value of a sampled curve is read from its last node,
and the phase transition is the first theta at which the curve reaches
that value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DomainError

DEFAULT_GRID = 1024
GRID_CLIP = 1e-3

#: maximisation of the envelope integrand over phi: coarse grid then
#: golden-section polish; the polish tolerance is tight enough that a
#: kink maximiser costs less than 1e-12 in value
PHI_GRID = 512
PHI_TOL = 1e-12

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def default_theta_grid(n: int = DEFAULT_GRID) -> np.ndarray:
    """Uniform grid of n nodes on [GRID_CLIP, 1 - GRID_CLIP]."""
    if n < 2:
        raise DomainError("theta grid needs at least two nodes")
    return np.linspace(GRID_CLIP, 1.0 - GRID_CLIP, n)


@dataclass(frozen=True)
class SpectrumCurve:
    """Sampled map theta -> dimension value with provenance."""

    thetas: np.ndarray
    values: np.ndarray
    provenance: str  # formula | lower_bound | upper_bound | estimate
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        th = np.asarray(self.thetas, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if th.shape != vals.shape or th.ndim != 1:
            raise DomainError("curve grid and values must be 1-D arrays of equal length")
        if np.any(np.diff(th) <= 0):
            raise DomainError("theta grid must be strictly increasing")
        if th[0] <= 0.0 or th[-1] >= 1.0:
            raise DomainError("theta grid must lie inside (0, 1)")
        finite = vals[np.isfinite(vals)]
        if self.provenance == "formula" and np.any(np.diff(finite) < -1e-12):
            raise DomainError("a closed-form spectrum must be non-decreasing")
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "values", vals)

    def value_at(self, theta: float) -> float:
        return float(np.interp(theta, self.thetas, self.values))

    def qa_value(self) -> float:
        """Quasi-Assouad value, read from the last grid node."""
        return float(self.values[-1])

    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.values)


@dataclass(frozen=True)
class ThreeParamForm:
    """Spectrum determined by box dimension, quasi-Assouad dimension and rho."""

    ubox: float
    qa: float
    rho: float

    def __post_init__(self):
        if self.ubox > self.qa + 1e-12:
            raise DomainError("box dimension cannot exceed the quasi-Assouad dimension")
        if self.qa > 0 and not (1.0 - self.ubox / self.qa - 1e-9 <= self.rho <= 1.0 + 1e-12):
            raise DomainError(f"phase transition {self.rho} outside [1 - ubox/qa, 1]")


@dataclass(frozen=True)
class BoundEnvelope:
    lower: SpectrumCurve
    upper: SpectrumCurve

    def __post_init__(self):
        if not np.array_equal(self.lower.thetas, self.upper.thetas):
            raise DomainError("envelope curves must share a grid")
        if np.any(self.lower.values > self.upper.values + 1e-9):
            raise DomainError("lower envelope exceeds upper envelope")


SpectrumLike = Union[SpectrumCurve, Callable[[float], float]]


def _spectrum_eval(spectrum_p: SpectrumLike, phi: float) -> float:
    if isinstance(spectrum_p, SpectrumCurve):
        if phi >= 1.0:
            return spectrum_p.qa_value()
        return spectrum_p.value_at(phi)
    return float(spectrum_p(phi))


# ---------------------------------------------------------------------------
# the weighted-average bound and its envelope


def f_value(theta: float, phi: float, spectrum_p: SpectrumLike, ubox_f: float) -> float:
    """Weighted average of the fixed-point spectrum at phi and the box dimension.

    Interpolates the covering cost of cylinders at intermediate sizes;
    at phi = theta it returns the fixed-point spectrum, at phi = 1 the
    box dimension.
    """
    if not (0.0 < theta < 1.0):
        raise DomainError(f"theta must be in (0,1), got {theta}")
    if phi < theta - 1e-15 or phi > 1.0 + 1e-15:
        raise DomainError(f"phi must lie in [theta, 1], got phi={phi}, theta={theta}")
    phi = min(max(phi, theta), 1.0)
    spectrum_at_phi = _spectrum_eval(spectrum_p, phi)
    inv_theta = 1.0 / theta
    inv_phi = 1.0 / phi
    return ((inv_phi - 1.0) * spectrum_at_phi + (inv_theta - inv_phi) * ubox_f) / (inv_theta - 1.0)


def _maximise_f(theta: float, spectrum_p: SpectrumLike, ubox_f: float) -> float:
    phis = np.linspace(theta, 1.0, PHI_GRID)
    vals = [f_value(theta, p, spectrum_p, ubox_f) for p in phis]
    k = int(np.argmax(vals))
    best = vals[k]
    lo = phis[max(k - 1, 0)]
    hi = phis[min(k + 1, PHI_GRID - 1)]
    # golden-section polish on the bracketing interval
    a, b = lo, hi
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc = f_value(theta, c, spectrum_p, ubox_f)
    fd = f_value(theta, d, spectrum_p, ubox_f)
    while b - a > PHI_TOL:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f_value(theta, c, spectrum_p, ubox_f)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f_value(theta, d, spectrum_p, ubox_f)
    return max(best, fc, fd)


def upper_envelope(thetas: Sequence[float], spectrum_p: SpectrumLike, ubox_f: float) -> SpectrumCurve:
    """Pointwise maximum of f over phi in [theta, 1]."""
    th = np.asarray(thetas, dtype=float)
    vals = np.array([_maximise_f(t, spectrum_p, ubox_f) for t in th])
    return SpectrumCurve(th, vals, "upper_bound", {"ubox_f": ubox_f})


def lower_bound_curve(thetas: Sequence[float], spectrum_p: SpectrumLike, h: float) -> SpectrumCurve:
    """Pointwise maximum of the Hausdorff dimension and the fixed-point spectrum."""
    th = np.asarray(thetas, dtype=float)
    vals = np.array([max(h, _spectrum_eval(spectrum_p, t)) for t in th])
    return SpectrumCurve(th, vals, "lower_bound", {"h": h})


def bound_envelope(thetas: Sequence[float], spectrum_p: SpectrumLike, h: float,
                   ubox_p: float) -> BoundEnvelope:
    """Sandwich bounds for a limit set with fixed-point spectrum spectrum_p."""
    ubox_f = max(h, ubox_p)
    return BoundEnvelope(
        lower_bound_curve(thetas, spectrum_p, h),
        upper_envelope(thetas, spectrum_p, ubox_f),
    )


# ---------------------------------------------------------------------------
# closed forms


def three_param_eval(form: ThreeParamForm, theta: float) -> float:
    """Value of the three-parameter spectrum at theta."""
    if not (0.0 <= theta <= 1.0):
        raise DomainError(f"theta must be in [0,1], got {theta}")
    if form.ubox == form.qa or form.rho == 0.0 or theta >= 1.0:
        return form.ubox if form.ubox == form.qa else form.qa
    rise = (1.0 - form.rho) * theta / ((1.0 - theta) * form.rho) * (form.qa - form.ubox)
    return min(form.ubox + rise, form.qa)


def fp_spectrum(p: float, theta: float) -> float:
    """Spectrum of the decreasing sequence i^(-p)."""
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    if not (0.0 <= theta <= 1.0):
        raise DomainError(f"theta must be in [0,1], got {theta}")
    if theta >= 1.0:
        return 1.0
    return min(1.0 / ((1.0 + p) * (1.0 - theta)), 1.0)


def sharp_family_spectrum(p: float, t: float, h: float, theta: float) -> float:
    """Three-case spectrum of the polynomial-offset families.

    The case is selected by the tail exponent: at t = p + 1 the upper
    bound is attained, for t >= p + 1/h the lower bound is attained,
    and in between the spectrum has two phase transitions.
    """
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    if t < p + 1.0 - 1e-12:
        raise DomainError(f"tail exponent must satisfy t >= p + 1, got {t}")
    if not (1.0 / (1.0 + p) < h < 1.0):
        raise DomainError(f"h must lie in (1/(1+p), 1) = ({1.0/(1.0+p):.4g}, 1), got {h}")
    if not (0.0 <= theta <= 1.0):
        raise DomainError(f"theta must be in [0,1], got {theta}")
    if theta >= 1.0:
        return 1.0
    rho = p / (1.0 + p)
    if t >= p + 1.0 / h:
        kink = (h + h * p - 1.0) / (h * (1.0 + p))
        if theta <= kink:
            return h
        if theta < rho:
            return 1.0 / ((1.0 + p) * (1.0 - theta))
        return 1.0
    if t > p + 1.0:
        kink = (h + h * p - 1.0) * p / ((1.0 + p) * (h * t - 1.0))
        if theta <= kink:
            return h + theta / (p * (1.0 - theta)) * (1.0 - h * (t - p))
        if theta < rho:
            return 1.0 / ((1.0 + p) * (1.0 - theta))
        return 1.0
    if theta < rho:
        return h + theta / (p * (1.0 - theta)) * (1.0 - h)
    return 1.0


def ctd_spaced_spectrum(p: float, h: float, theta: float) -> float:
    """Spectrum of continued-fraction sets with digits spaced like n^p."""
    if p <= 1.0:
        raise DomainError(f"spaced digit sets need p > 1, got {p}")
    if not (1.0 / (p + 1.0) < h < 1.0 / p):
        raise DomainError(f"h must lie in (1/(p+1), 1/p) = ({1.0/(p+1.0):.4g}, {1.0/p:.4g}), got {h}")
    if not (0.0 <= theta <= 1.0):
        raise DomainError(f"theta must be in [0,1], got {theta}")
    if theta >= 1.0:
        return 1.0
    rho = p / (1.0 + p)
    kink = (h + h * p - 1.0) * p / ((1.0 + p) * (2.0 * p * h - 1.0))
    if theta <= kink:
        return h + theta / (p * (1.0 - theta)) * (1.0 - h * p)
    if theta < rho:
        return 1.0 / ((1.0 + p) * (1.0 - theta))
    return 1.0


def ctd_clustered_spectrum(alpha: float, h: float, theta: float) -> float:
    """Spectrum of continued-fraction sets with digit blocks [2^k, 2^k + 2^(k alpha)]."""
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must be in (0,1), got {alpha}")
    if h < alpha / 2.0:
        raise DomainError(f"h must be at least the finiteness parameter alpha/2 = {alpha/2.0}, got {h}")
    if not (0.0 <= theta <= 1.0):
        raise DomainError(f"theta must be in [0,1], got {theta}")
    rho = 1.0 - alpha / 2.0
    if theta >= rho:
        return 1.0
    return h + alpha * theta / ((1.0 - theta) * (2.0 - alpha)) * (1.0 - h)


def dense_cf_spectrum(h: float, theta: float) -> float:
    """Spectrum of continued-fraction sets with full-density digit sets."""
    if h < 0.5:
        raise DomainError(f"full-density digit sets force h >= 1/2, got {h}")
    if not (0.0 <= theta <= 1.0):
        raise DomainError(f"theta must be in [0,1], got {theta}")
    if theta >= 0.5:
        return 1.0
    return h + theta / (1.0 - theta) * (1.0 - h)


def complex_cf_spectrum(h: float, theta: float) -> float:
    """Spectrum of the full complex continued-fraction set, h supplied by the caller."""
    if not (1.0 <= h <= 2.0):
        raise DomainError(f"h must lie in [1, 2], got {h}")
    if not (0.0 <= theta <= 1.0):
        raise DomainError(f"theta must be in [0,1], got {theta}")
    if theta >= 0.5:
        return 2.0
    return h + theta / (1.0 - theta) * (2.0 - h)


def parabolic_spectrum(q: float, h: float, theta: float) -> float:
    """Spectrum of a parabolic attractor with tangency exponent q at its fixed point."""
    if q <= 0:
        raise DomainError(f"q must be positive, got {q}")
    if not (0.0 < h < 1.0):
        raise DomainError(f"h must be in (0,1), got {h}")
    if not (0.0 <= theta <= 1.0):
        raise DomainError(f"theta must be in [0,1], got {theta}")
    if theta >= 1.0 / (1.0 + q):
        return 1.0
    return h + q * theta / (1.0 - theta) * (1.0 - h)


def backwards_cf_spectrum(h: float, theta: float) -> float:
    """Spectrum of backwards continued-fraction sets (parabolic with q = 1)."""
    return parabolic_spectrum(1.0, h, theta)


def assouad_dimension_formula(h: float, dim_a_p: float) -> float:
    """Assouad dimension of the limit set from h and the fixed-point set."""
    return max(h, dim_a_p)


def quasi_assouad_formula(h: float, qa_p: float) -> float:
    """Quasi-Assouad dimension of the limit set from h and the fixed-point set."""
    return max(h, qa_p)


def porosity_threshold_check(value: float, ambient_dim: int) -> bool:
    """A set is porous exactly when its Assouad dimension is below the ambient one."""
    return value < ambient_dim


def curve_from_formula(fn: Callable[[float], float], thetas: Sequence[float] | None = None,
                       provenance: str = "formula", **metadata) -> SpectrumCurve:
    th = default_theta_grid() if thetas is None else np.asarray(thetas, dtype=float)
    vals = np.array([fn(t) for t in th])
    return SpectrumCurve(th, vals, provenance, dict(metadata))


# ---------------------------------------------------------------------------
# curve diagnostics


@dataclass(frozen=True)
class PhaseTransition:
    theta: float
    qa: float
    ambiguous: bool = False


def phase_transition(curve: SpectrumCurve, tol: float = 1e-9) -> PhaseTransition:
    """First theta at which the curve reaches its quasi-Assouad value.

    A non-monotone (estimated) curve is handled by taking the first
    up-crossing and flagging the result as ambiguous.
    """
    mask = curve.valid_mask()
    th = curve.thetas[mask]
    vals = curve.values[mask]
    if len(vals) == 0:
        raise DomainError("curve has no valid nodes")
    qa = float(vals[-1])
    level = qa - tol
    ambiguous = bool(np.any(np.diff(vals) < -max(tol, 1e-12)))
    if vals[0] >= level:
        return PhaseTransition(0.0, qa, ambiguous)
    k = int(np.argmax(vals >= level))
    if vals[k] < level:
        return PhaseTransition(float(th[-1]), qa, True)
    t0, t1 = th[k - 1], th[k]
    v0, v1 = vals[k - 1], vals[k]
    frac = (level - v0) / (v1 - v0) if v1 > v0 else 1.0
    return PhaseTransition(float(t0 + frac * (t1 - t0)), qa, ambiguous)


def _refine_kink(th: np.ndarray, vals: np.ndarray, k: int) -> float:
    """Pin a kink near node k+1 by intersecting quadratic fits of the flanks."""
    n = len(th)
    left = np.arange(max(k - 6, 0), k + 1)
    right = np.arange(k + 2, min(k + 9, n))
    if len(left) < 3 or len(right) < 3:
        return float(th[k + 1])
    pl = np.polyfit(th[left], vals[left], 2)
    pr = np.polyfit(th[right], vals[right], 2)
    roots = np.roots(np.asarray(pl) - np.asarray(pr))
    roots = roots[np.isreal(roots)].real
    window = (th[max(k - 1, 0)], th[min(k + 3, n - 1)])
    roots = roots[(roots >= window[0]) & (roots <= window[1])]
    if len(roots) == 0:
        return float(th[k + 1])
    return float(roots[np.argmin(np.abs(roots - th[k + 1]))])


def slope_discontinuities(curve: SpectrumCurve, min_jump: float = 0.02,
                          prominence: float = 6.0) -> list[float]:
    """Interior kinks of a piecewise-smooth sampled curve.

    Flags nodes where the one-sided slope difference exceeds min_jump
    and stands out against the local curvature baseline.
    """
    th, vals = curve.thetas, curve.values
    slopes = np.diff(vals) / np.diff(th)
    jumps = np.abs(np.diff(slopes))
    out = []
    window = 8
    for k in np.where(jumps > min_jump)[0]:
        lo = max(0, k - window)
        hi = min(len(jumps), k + window + 1)
        neigh = np.delete(jumps[lo:hi], np.arange(max(k - 1, lo), min(k + 2, hi)) - lo)
        base = np.median(neigh) if len(neigh) else 0.0
        if jumps[k] > prominence * max(base, 1e-9):
            out.append(_refine_kink(th, vals, k))
    # merge kinks closer than one grid step
    merged: list[float] = []
    step = float(np.min(np.diff(th)))
    for x in out:
        if merged and x - merged[-1] <= 1.5 * step:
            continue
        merged.append(x)
    return merged


@dataclass(frozen=True)
class ThreeParamFit:
    form: ThreeParamForm
    max_deviation: float
    ok: bool


def fit_three_param(curve: SpectrumCurve, tol: float = 1e-3) -> ThreeParamFit:
    """Best three-parameter description of a sampled curve.

    The box dimension is extrapolated from the first two nodes, the
    quasi-Assouad value read from the last, and the phase transition
    scanned for the smallest maximum deviation.  ok is set when the
    curve follows the fitted form within tol.
    """
    th, vals = curve.thetas, curve.values
    qa = float(vals[-1])
    # linear extrapolation to theta = 0
    ubox = float(vals[0] - th[0] * (vals[1] - vals[0]) / (th[1] - th[0]))
    ubox = min(max(ubox, 0.0), qa)
    if abs(qa - ubox) < 1e-12:
        dev = float(np.max(np.abs(vals - ubox)))
        return ThreeParamFit(ThreeParamForm(ubox, qa, 1.0), dev, dev <= tol)
    rho_min = max(1.0 - ubox / qa, 1e-6)
    candidates = list(np.linspace(rho_min, 1.0 - 1e-6, 256))
    candidates.append(min(max(phase_transition(curve).theta, rho_min), 1.0 - 1e-6))
    best_rho, best_dev = candidates[0], math.inf
    for rho in candidates:
        form = ThreeParamForm(ubox, qa, rho)
        dev = max(abs(three_param_eval(form, t) - v) for t, v in zip(th, vals))
        if dev < best_dev:
            best_rho, best_dev = rho, dev
    # local refinement around the best candidate
    lo = max(best_rho - 0.01, rho_min)
    hi = min(best_rho + 0.01, 1.0 - 1e-6)
    for rho in np.linspace(lo, hi, 128):
        form = ThreeParamForm(ubox, qa, rho)
        dev = max(abs(three_param_eval(form, t) - v) for t, v in zip(th, vals))
        if dev < best_dev:
            best_rho, best_dev = rho, dev
    return ThreeParamFit(ThreeParamForm(ubox, qa, best_rho), float(best_dev), best_dev <= tol)
