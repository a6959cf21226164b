import numpy as np
import pytest

from ifsdim import DomainError
from ifsdim.spectra import (
    SpectrumCurve,
    ThreeParamForm,
    assouad_dimension_formula,
    backwards_cf_spectrum,
    bound_envelope,
    complex_cf_spectrum,
    ctd_clustered_spectrum,
    ctd_spaced_spectrum,
    curve_from_formula,
    default_theta_grid,
    dense_cf_spectrum,
    f_value,
    fit_three_param,
    fp_spectrum,
    lower_bound_curve,
    parabolic_spectrum,
    phase_transition,
    porosity_threshold_check,
    quasi_assouad_formula,
    sharp_family_spectrum,
    slope_discontinuities,
    three_param_eval,
    upper_envelope,
)

GRID = default_theta_grid()


class TestWeightedAverage:
    def test_endpoint_phi_equals_theta(self):
        p_spec = lambda t: fp_spectrum(1.0, t)
        assert f_value(0.3, 0.3, p_spec, 0.8) == pytest.approx(p_spec(0.3), rel=1e-14)

    def test_endpoint_phi_one_gives_box_dimension(self):
        assert f_value(0.3, 1.0, lambda t: fp_spectrum(1.0, t), 0.8) == pytest.approx(0.8)

    def test_three_param_maximum_in_closed_form(self):
        # P with box 0.5, quasi-Assouad 1, transition 0.5; h = 0.6 between
        h, qa_p, rho_p = 0.6, 1.0, 0.5
        p_spec = lambda t: fp_spectrum(1.0, t)
        theta = 0.25
        direct = h + (1.0 - rho_p) * theta / ((1.0 - theta) * rho_p) * (qa_p - h)
        assert f_value(theta, rho_p, p_spec, h) == pytest.approx(direct, rel=1e-13)

    def test_domain_error_when_phi_below_theta(self):
        with pytest.raises(DomainError):
            f_value(0.5, 0.3, lambda t: 0.5, 0.5)


class TestEnvelopes:
    def test_constant_spectrum_gives_constant_envelope(self):
        curve = upper_envelope(GRID[::64], lambda t: 0.7, 0.7)
        assert np.allclose(curve.values, 0.7, atol=1e-12)

    def test_fp_maximisation_example(self):
        curve = upper_envelope([0.25], lambda t: fp_spectrum(1.0, t), 0.6)
        assert curve.values[0] == pytest.approx(0.6 + (0.5 * 0.25 / (0.75 * 0.5)) * 0.4, abs=1e-10)

    def test_past_transition_envelope_is_qa(self):
        curve = upper_envelope([0.7], lambda t: fp_spectrum(1.0, t), 0.6)
        assert curve.values[0] == pytest.approx(1.0, abs=1e-10)

    def test_envelope_monotone(self):
        curve = upper_envelope(GRID[::16], lambda t: fp_spectrum(1.8, t), 0.5)
        assert np.all(np.diff(curve.values) >= -1e-10)

    def test_lower_bound_examples(self):
        assert lower_bound_curve([0.3], lambda t: 0.3, 0.5).values[0] == pytest.approx(0.5)
        val = lower_bound_curve([0.4], lambda t: fp_spectrum(1.0, t), 0.4).values[0]
        assert val == pytest.approx(1.0 / (2.0 * 0.6), rel=1e-12)

    def test_quasi_assouad_limit(self):
        # theta -> 1 recovers max{h, qa_P}
        for h in (0.3, 0.9):
            low = lower_bound_curve([1.0 - 1e-9], lambda t: fp_spectrum(1.0, t), h)
            assert low.values[0] == pytest.approx(max(h, 1.0), abs=1e-6)

    def test_envelope_object_checks_order(self):
        env = bound_envelope(GRID[::64], lambda t: fp_spectrum(1.0, t), 0.6, 0.5)
        assert np.all(env.lower.values <= env.upper.values + 1e-9)


class TestClosedForms:
    def test_three_param_examples(self):
        form = ThreeParamForm(0.5, 1.0, 0.5)
        assert three_param_eval(form, 0.0) == pytest.approx(0.5)
        assert three_param_eval(form, 0.5) == pytest.approx(1.0)
        assert three_param_eval(form, 0.25) == pytest.approx(0.5 + (0.5 * 0.25 / (0.75 * 0.5)) * 0.5)

    def test_three_param_equal_endpoints(self):
        assert three_param_eval(ThreeParamForm(0.4, 0.4, 1.0), 0.7) == 0.4

    def test_three_param_invariants(self):
        with pytest.raises(DomainError):
            ThreeParamForm(1.0, 0.5, 0.8)
        with pytest.raises(DomainError):
            ThreeParamForm(0.5, 1.0, 0.2)  # below 1 - ubox/qa

    def test_fp_spectrum_examples(self):
        assert fp_spectrum(1.0, 0.5) == 1.0
        assert fp_spectrum(1.8, 0.0) == pytest.approx(1.0 / 2.8)
        curve = curve_from_formula(lambda t: fp_spectrum(1.8, t))
        assert phase_transition(curve).theta == pytest.approx(1.8 / 2.8, abs=2e-3)

    def test_sharp_family_case_values(self):
        assert sharp_family_spectrum(1.8, 2.8, 0.5, 0.3) == pytest.approx(0.61904761904, abs=1e-10)
        k1 = (0.5 + 0.9 - 1.0) * 1.8 / (2.8 * (0.5 * 3.6 - 1.0))
        assert k1 == pytest.approx(0.3214285714, abs=1e-9)
        left = sharp_family_spectrum(1.8, 3.6, 0.5, k1)
        right = 1.0 / (2.8 * (1.0 - k1))
        assert left == pytest.approx(right, abs=1e-12)
        assert left == pytest.approx(0.52631578947, abs=1e-9)

    def test_sharp_family_constant_branch(self):
        # far tail regime: flat at h below the first transition
        kink = (0.5 + 0.9 - 1.0) / (0.5 * 2.8)
        assert sharp_family_spectrum(1.8, 3.9, 0.5, 0.2) == 0.5
        assert 0.2 <= kink

    def test_sharp_family_domain(self):
        with pytest.raises(DomainError):
            sharp_family_spectrum(1.8, 3.6, 0.3, 0.5)  # h below 1/(1+p)
        with pytest.raises(DomainError):
            sharp_family_spectrum(1.8, 2.0, 0.5, 0.5)  # t below p+1

    def test_spaced_equals_sharp_at_doubled_exponent(self):
        for p, h in ((1.8, 0.5), (1.3, 0.55), (2.4, 0.35)):
            a = np.array([ctd_spaced_spectrum(p, h, t) for t in GRID])
            b = np.array([sharp_family_spectrum(p, 2.0 * p, h, t) for t in GRID])
            assert np.array_equal(a, b)

    def test_spaced_third_branch_and_first_branch(self):
        assert ctd_spaced_spectrum(1.8, 0.5, 0.7) == 1.0  # theta past p/(1+p)
        assert ctd_spaced_spectrum(1.8, 0.5, 0.1) == pytest.approx(0.50617283950, abs=1e-10)

    def test_spaced_domain_endpoints_rejected(self):
        with pytest.raises(DomainError):
            ctd_spaced_spectrum(1.8, 1.0 / 1.8, 0.3)
        with pytest.raises(DomainError):
            ctd_spaced_spectrum(1.8, 1.0 / 2.8, 0.3)

    def test_clustered_examples(self):
        assert ctd_clustered_spectrum(0.5, 0.5, 0.25) == pytest.approx(0.55555555556, abs=1e-10)
        assert ctd_clustered_spectrum(0.5, 0.5, 0.0) == pytest.approx(0.5)
        rho = 1.0 - 0.5 / 2.0
        just_below = rho * (1.0 - 1e-13)
        assert ctd_clustered_spectrum(0.5, 0.5, just_below) == pytest.approx(1.0, abs=1e-12)

    def test_dense_cf(self):
        assert dense_cf_spectrum(0.6, 0.0) == pytest.approx(0.6)
        assert dense_cf_spectrum(0.6, 0.5) == 1.0
        assert dense_cf_spectrum(0.6, 0.25) == pytest.approx(0.73333333333, abs=1e-10)
        with pytest.raises(DomainError):
            dense_cf_spectrum(0.4, 0.3)

    def test_complex_cf(self):
        assert complex_cf_spectrum(1.8558, 0.25) == pytest.approx(1.90386666667, abs=1e-10)
        assert complex_cf_spectrum(1.8558, 0.5) == 2.0
        assert complex_cf_spectrum(1.8558, 1e-12) == pytest.approx(1.8558, abs=1e-10)

    def test_parabolic(self):
        q = 2.0
        rho = 1.0 / (1.0 + q)
        assert parabolic_spectrum(q, 0.5, rho * (1 - 1e-13)) == pytest.approx(1.0, abs=1e-12)
        assert parabolic_spectrum(2.0, 0.5, 0.2) == pytest.approx(0.75)
        for t in GRID[::64]:
            assert parabolic_spectrum(1.0, 0.5, t) == backwards_cf_spectrum(0.5, t)
            assert parabolic_spectrum(1.0, 0.6, t) == pytest.approx(dense_cf_spectrum(0.6, t), abs=1e-12)

    def test_max_formulas_and_porosity(self):
        assert assouad_dimension_formula(0.5, 1.0) == 1.0
        assert assouad_dimension_formula(0.9, 0.3) == 0.9
        assert quasi_assouad_formula(0.5, 1.0) == 1.0
        assert porosity_threshold_check(0.8, 1)
        assert not porosity_threshold_check(1.0, 1)

    def test_fp_limit_matches_sharp_qa(self):
        # each tail regime tends to 1 as theta -> 1
        for t in (2.8, 3.6, 3.9):
            assert sharp_family_spectrum(1.8, t, 0.5, 0.999999) == 1.0


class TestCurveDiagnostics:
    def test_formula_curves_monotone_and_continuous(self):
        for fn in (
            lambda t: sharp_family_spectrum(1.8, 2.8, 0.5, t),
            lambda t: sharp_family_spectrum(1.8, 3.6, 0.5, t),
            lambda t: ctd_clustered_spectrum(0.5, 0.6, t),
            lambda t: dense_cf_spectrum(0.7, t),
        ):
            curve = curve_from_formula(fn)
            diffs = np.diff(curve.values)
            assert np.all(diffs >= -1e-12)
            # no jump above the Lipschitz estimate times the grid step
            step = np.diff(curve.thetas)
            slopes = diffs / step
            assert np.max(slopes) < 50.0

    def test_phase_transition_constant_curve(self):
        curve = SpectrumCurve(GRID, np.full(len(GRID), 0.4), "formula")
        assert phase_transition(curve).theta == 0.0

    def test_phase_transition_two_kink_curve_returns_second(self):
        curve = curve_from_formula(lambda t: sharp_family_spectrum(1.8, 3.6, 0.5, t))
        pt = phase_transition(curve)
        assert pt.theta == pytest.approx(1.8 / 2.8, abs=2e-3)
        assert not pt.ambiguous
        kinks = slope_discontinuities(curve)
        assert len(kinks) == 2
        assert kinks[0] == pytest.approx(0.32142857142, abs=1e-3)
        assert kinks[1] == pytest.approx(0.64285714285, abs=1e-3)

    def test_non_monotone_curve_flagged(self):
        vals = np.where(GRID < 0.5, 0.5 + 0.2 * np.sin(GRID * 40) * 0.1, 0.9)
        curve = SpectrumCurve(GRID, vals, "estimate")
        assert phase_transition(curve).ambiguous

    def test_three_param_fit_succeeds_case_one(self):
        curve = curve_from_formula(lambda t: sharp_family_spectrum(1.8, 2.8, 0.5, t))
        fit = fit_three_param(curve)
        assert fit.ok
        assert fit.max_deviation <= 1e-3

    def test_three_param_fit_fails_case_two(self):
        curve = curve_from_formula(lambda t: sharp_family_spectrum(1.8, 3.6, 0.5, t))
        fit = fit_three_param(curve)
        assert not fit.ok
        assert fit.max_deviation > 1e-3

    def test_three_param_fit_fails_case_three(self):
        curve = curve_from_formula(lambda t: sharp_family_spectrum(1.8, 3.9, 0.5, t))
        assert not fit_three_param(curve).ok


class TestSandwich:
    @pytest.mark.parametrize(
        "formula,p_spec,h,ubox_p",
        [
            (lambda t: sharp_family_spectrum(1.8, 2.8, 0.5, t), lambda t: fp_spectrum(1.8, t), 0.5, 1 / 2.8),
            (lambda t: sharp_family_spectrum(1.8, 3.6, 0.5, t), lambda t: fp_spectrum(1.8, t), 0.5, 1 / 2.8),
            (lambda t: sharp_family_spectrum(1.8, 3.9, 0.5, t), lambda t: fp_spectrum(1.8, t), 0.5, 1 / 2.8),
            (lambda t: ctd_spaced_spectrum(1.8, 0.5, t), lambda t: fp_spectrum(1.8, t), 0.5, 1 / 2.8),
            (lambda t: ctd_clustered_spectrum(0.5, 0.6, t),
             lambda t: three_param_eval(ThreeParamForm(0.25, 1.0, 0.75), t), 0.6, 0.25),
            (lambda t: dense_cf_spectrum(0.7, t), lambda t: fp_spectrum(1.0, t), 0.7, 0.5),
            (lambda t: backwards_cf_spectrum(0.75, t), lambda t: fp_spectrum(1.0, t), 0.75, 0.5),
        ],
    )
    def test_formula_between_bounds(self, formula, p_spec, h, ubox_p):
        grid = GRID[::8]
        lower = lower_bound_curve(grid, p_spec, h)
        upper = upper_envelope(grid, p_spec, max(h, ubox_p))
        vals = np.array([formula(t) for t in grid])
        assert np.all(vals >= lower.values - 1e-10)
        assert np.all(vals <= upper.values + 1e-10)

    def test_case_one_attains_upper_bound(self):
        grid = GRID[::8]
        upper = upper_envelope(grid, lambda t: fp_spectrum(1.8, t), 0.5)
        vals = np.array([sharp_family_spectrum(1.8, 2.8, 0.5, t) for t in grid])
        assert np.max(np.abs(vals - upper.values)) <= 1e-10

    def test_case_three_attains_lower_bound(self):
        grid = GRID[::8]
        lower = lower_bound_curve(grid, lambda t: fp_spectrum(1.8, t), 0.5)
        vals = np.array([sharp_family_spectrum(1.8, 3.9, 0.5, t) for t in grid])
        assert np.max(np.abs(vals - lower.values)) <= 1e-10

    def test_phase_transition_inherits_from_fixed_points(self):
        # when h is below the quasi-Assouad value of the fixed points the
        # envelope's transition matches the fixed-point transition
        grid = GRID
        upper = upper_envelope(grid, lambda t: fp_spectrum(1.8, t), 0.5)
        p_curve = curve_from_formula(lambda t: fp_spectrum(1.8, t))
        t_env = phase_transition(upper).theta
        t_p = phase_transition(p_curve).theta
        assert abs(t_env - t_p) <= 2.5e-3


class TestCurveType:
    def test_grid_validation(self):
        with pytest.raises(DomainError):
            SpectrumCurve(np.array([0.5, 0.4]), np.array([0.1, 0.2]), "formula")
        with pytest.raises(DomainError):
            SpectrumCurve(np.array([0.0, 0.5]), np.array([0.1, 0.2]), "formula")

    def test_formula_curves_must_be_monotone(self):
        with pytest.raises(DomainError):
            SpectrumCurve(np.array([0.2, 0.4]), np.array([0.5, 0.3]), "formula")
        SpectrumCurve(np.array([0.2, 0.4]), np.array([0.5, 0.3]), "estimate")

    def test_interpolation_and_qa(self):
        curve = SpectrumCurve(np.array([0.2, 0.6]), np.array([0.2, 0.6]), "formula")
        assert curve.value_at(0.4) == pytest.approx(0.4)
        assert curve.qa_value() == 0.6
