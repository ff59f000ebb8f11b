"""
Tests for weak-error estimators, density sweeps, KDE, rate fits and the closed-form rate formulas.
"""

import math

import msgspec
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ewel.coefficients import Regime, make_model
from ewel.euler import GridSchedule, simulate_batch
from ewel.exceptions import ArgumentError, ConfigurationError, NumericalFault
from ewel.weak_error import (
    BIAS_LIMITED,
    EXCLUDED_NEAR_BOUNDARY,
    NOISE_DOMINATED,
    PSI_DOMAIN_MAX,
    SweepRow,
    TestFunction,
    TestFunctionKind,
    admissible_indicator_distance,
    alpha_q,
    borel_bound_factor,
    check_declared_distances,
    density_error_sweep,
    epsilon_schedule,
    estimate_weak_error,
    eta_schedule,
    fit_rate,
    flag_series,
    grid_for_h,
    kde_density,
    kde_difference,
    make_test_function,
    predicted_order,
    psi,
    schedule_rows,
    sensitivity_constant,
    silverman_bandwidth,
    smooth_indicator,
    strong_rate_check,
    weak_error_cell,
    weak_error_sweep,
)

SPHERE = {"kind": "sphere", "center": [0.0, 0.0], "radius": 1.0}


# ---------------------------------------------------------------------------
# Rate formulas
# ---------------------------------------------------------------------------


class TestPsi:
    def test_closed_forms(self):
        assert psi(math.exp(-math.exp(math.e))) == pytest.approx(1.0 / math.e, abs=1e-12)
        assert psi(math.exp(-math.exp(math.e**2))) == pytest.approx(2.0 / math.e**2, abs=1e-12)

    def test_decreases_towards_zero(self):
        # psi = ln(u) / u with u = ln ln (1/h) falls once u > e, i.e. from h = 2^-22 on
        values = [psi(2.0**-k) for k in range(22, 61)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < values[0]

    @pytest.mark.parametrize("h", [0.0, PSI_DOMAIN_MAX, 0.5, -1.0])
    def test_outside_domain(self, h):
        with pytest.raises(ArgumentError, match="psi"):
            psi(h)


class TestBorelFactor:
    def test_power_branch(self):
        assert borel_bound_factor(1.0, 1.0) == pytest.approx(2.0)

    def test_log_branch(self):
        assert borel_bound_factor(math.exp(-2.0), 1.0) == pytest.approx(3.0)

    def test_tie_goes_to_the_power_branch(self):
        assert borel_bound_factor(math.exp(-2.0), 0.5) == pytest.approx(2.0 * math.e + 1.0, rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 1.0), st.floats(1e-4, 0.9))
    def test_decreasing_on_each_branch(self, gamma, dist):
        threshold = math.exp(-1.0 / gamma)
        step = 1.01
        if (dist < threshold) == (dist * step < threshold):
            assert borel_bound_factor(dist * step, gamma) <= borel_bound_factor(dist, gamma)

    @pytest.mark.parametrize("dist,gamma", [(0.0, 1.0), (-0.1, 1.0), (0.5, 0.0), (0.5, 1.5)])
    def test_bad_arguments(self, dist, gamma):
        with pytest.raises(ArgumentError):
            borel_bound_factor(dist, gamma)


class TestSensitivity:
    def test_alpha_q(self):
        assert alpha_q(2.0, 1) == pytest.approx(0.25)
        assert alpha_q(6.0, 3) == pytest.approx(0.25)
        assert alpha_q(math.inf, 2) == 0.5
        with pytest.raises(ArgumentError, match="exceed the dimension"):
            alpha_q(2.0, 2)

    def test_theta_picks_the_minimum(self):
        constant = sensitivity_constant(0.2, 2.0, 1)
        assert constant.alpha == pytest.approx(0.25)
        assert constant.theta == pytest.approx(0.1)
        assert constant.log_value == pytest.approx(11.0**11)

    def test_eta_range(self):
        with pytest.raises(ArgumentError):
            sensitivity_constant(1.5, 4.0, 1)


class TestSchedules:
    def test_eta_is_clipped_below_gamma(self):
        eta = eta_schedule(2.0**-8, 0.5)
        assert eta < 0.5
        assert eta == pytest.approx(0.5)

    def test_eta_outside_psi_domain(self):
        assert eta_schedule(0.25, 0.5) == 0.25

    def test_eta_from_psi(self):
        h = 2.0**-40
        assert eta_schedule(h, 1.0) == pytest.approx(2.0 * psi(h))

    def test_epsilon_balance(self):
        assert epsilon_schedule(0.01, 1.0, 0.5, 0.0) == pytest.approx(0.1)
        # (h / dt^(1 - gamma))^(1 / (2 - eta))
        assert epsilon_schedule(0.01, 0.25, 0.5, 0.5) == pytest.approx((0.01 / 0.25**0.5) ** (1.0 / 1.5))

    def test_epsilon_bad_arguments(self):
        with pytest.raises(ArgumentError):
            epsilon_schedule(0.0, 1.0, 0.5, 0.5)
        with pytest.raises(ArgumentError):
            epsilon_schedule(0.01, 1.0, 0.5, 2.0)

    def test_schedule_rows_are_coarse_first(self):
        rows = schedule_rows([2.0**-6, 2.0**-3, 2.0**-5], 1.0, 0.5)
        assert [r.h for r in rows] == [2.0**-3, 2.0**-5, 2.0**-6]
        assert rows[0].epsilon > rows[-1].epsilon

    def test_predicted_order(self):
        assert predicted_order(Regime.HOLDER, 1, gamma=0.5) == 0.25
        ps = Regime.PIECEWISE_SMOOTH
        assert predicted_order(ps, 2) == 0.25
        assert predicted_order(ps, 2, dist_to_I=0.5, h=0.01) == pytest.approx(1.0 / 3.0)
        assert predicted_order(ps, 1, constant_sigma=True, dist_to_I=0.5, h=0.01) == 1.0
        assert predicted_order(ps, 1, constant_sigma=True, dist_to_I=0.05, h=0.01) == 0.5

    def test_admissible_indicator_distance(self):
        assert admissible_indicator_distance(1.0, 0.01, 1.0) == pytest.approx(0.1)


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------


class TestSmoothIndicator:
    def test_inside_domain(self):
        f = make_test_function({"kind": "smooth_indicator", "domain": SPHERE, "delta": 0.3}, dim=2)
        value, grad = smooth_indicator([[0.2, 0.1]], f.domain, 0.3)
        assert value[0] == 1.0
        np.testing.assert_array_equal(grad, [[0.0, 0.0]])

    def test_half_shell_value(self):
        f = make_test_function({"kind": "smooth_indicator", "domain": SPHERE, "delta": 0.3}, dim=2)
        x = [[1.0 + 0.3 / math.sqrt(2.0), 0.0]]
        assert f(x)[0] == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_gradient_matches_finite_differences(self):
        f = make_test_function({"kind": "smooth_indicator", "domain": SPHERE, "delta": 0.3}, dim=2)
        rng = np.random.default_rng(5)
        angle = rng.uniform(0.0, 2.0 * math.pi, 100)
        radius = 1.0 + rng.uniform(0.01, 0.29, 100)
        pts = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
        step = 1e-6
        fd = np.stack(
            [(f(pts + step * e) - f(pts - step * e)) / (2.0 * step) for e in np.eye(2)], axis=1
        )
        np.testing.assert_allclose(f.gradient(pts), fd, atol=1e-6)

    def test_increases_towards_the_domain(self):
        f = make_test_function(
            {"kind": "smooth_indicator", "domain": {"kind": "point", "point": 0.0}, "delta": 0.5}
        )
        values = f(np.linspace(-0.5, 0.0, 51))
        assert values[0] == 0.0 and values[-1] == 1.0
        assert np.all(np.diff(values) >= 0.0)

    def test_delta_beyond_reach(self):
        with pytest.raises(ConfigurationError, match="reach"):
            make_test_function({"kind": "smooth_indicator", "domain": SPHERE, "delta": 1.5}, dim=2)


class TestTestFunctions:
    def test_holder_forms(self):
        assert make_test_function({"kind": "holder", "form": "cos"})([0.0])[0] == 1.0
        f = make_test_function({"kind": "holder", "form": "abs_power", "beta": 0.5})
        assert f([-4.0])[0] == pytest.approx(2.0)
        assert f.label == "abs_power(beta=0.5)"

    def test_exp_indicator(self):
        f = TestFunction(TestFunctionKind.EXP_INDICATOR, radius=2.0, rate=1.0)
        np.testing.assert_allclose(f([1.0, 3.0]), [math.e, 0.0])
        assert f.label == "exp_indicator(K=2,c=1)"

    def test_indicator_of_a_half_line(self):
        f = make_test_function({"kind": "indicator", "domain": {"kind": "point", "point": 0.5}})
        np.testing.assert_array_equal(f([0.0, 0.5, 1.0]), [0.0, 1.0, 1.0])
        np.testing.assert_allclose(f.boundary_distance([0.0]), [0.5])

    def test_unknown_kind_and_parameter(self):
        with pytest.raises(ConfigurationError, match="unknown test function kind"):
            make_test_function({"kind": "spline"})
        with pytest.raises(ConfigurationError, match="parameter"):
            make_test_function({"kind": "holder", "form": "cos", "width": 1.0})

    def test_gradient_only_for_smooth_indicator(self):
        with pytest.raises(ConfigurationError, match="gradient"):
            make_test_function({"kind": "holder"}).gradient([0.0])


# ---------------------------------------------------------------------------
# Kernel density estimates
# ---------------------------------------------------------------------------


class TestKDE:
    def test_single_sample(self):
        est = kde_density(np.array([0.0]), [0.0], bandwidth=1.0)
        assert est.values[0] == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-14)
        assert est.bandwidth == [1.0]
        assert est.method == "kde"

    def test_constant_coefficient_law(self):
        field = make_model("constant", {"drift": 0.0, "sigma": 1.0})
        batch = simulate_batch(field, 0.0, GridSchedule(1.0, 2), 1_000_000, seed=17, store="terminal")
        est = kde_density(batch, [0.0], bandwidth=0.05)
        assert est.values[0] == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=0.02)
        assert est.t == 1.0 and est.x == [0.0]
        assert est.bias_bound[0] < 0.01 * est.values[0]

    def test_standard_error_of_the_estimate(self):
        samples = np.random.default_rng(3).normal(size=(4000, 1))
        est = kde_density(samples, [[0.0], [0.5]], bandwidth=0.2)
        k = np.exp(-0.5 * ((np.array([[0.0], [0.5]]) - samples[:, 0]) / 0.2) ** 2) / (0.2 * math.sqrt(2.0 * math.pi))
        expected = k.std(axis=1, ddof=1) / math.sqrt(4000)
        np.testing.assert_allclose(est.stderr, expected, rtol=1e-10)
        np.testing.assert_allclose(est.values, k.mean(axis=1), rtol=1e-12)

    def test_single_sample_has_zero_stderr(self):
        assert kde_density(np.array([0.0]), [0.0], bandwidth=1.0).stderr == [0.0]

    def test_silverman_bandwidth_is_scaled(self):
        samples = np.random.default_rng(0).normal(size=10_000)
        full = silverman_bandwidth(samples, scale=1.0)
        assert silverman_bandwidth(samples)[0] == pytest.approx(0.5 * full[0])
        assert full[0] == pytest.approx(0.9 * 10_000 ** (-0.2), rel=0.05)

    def test_degenerate_sample(self):
        with pytest.raises(NumericalFault, match="spread"):
            kde_density(np.zeros(100), [0.0])
        with pytest.raises(ArgumentError, match="non-empty"):
            kde_density(np.zeros((0, 1)), [0.0], bandwidth=0.1)
        with pytest.raises(ArgumentError, match="bandwidth"):
            kde_density(np.zeros(10), [0.0], bandwidth=-0.1)

    def test_coupled_difference_of_equal_samples(self):
        a = np.random.default_rng(1).normal(size=(500, 1))
        diff, stderr, bias = kde_difference(a, a.copy(), [[0.0], [1.0]], 0.2)
        np.testing.assert_array_equal(diff, [0.0, 0.0])
        np.testing.assert_array_equal(stderr, [0.0, 0.0])
        np.testing.assert_array_equal(bias, [0.0, 0.0])

    def test_coupled_difference_shape_mismatch(self):
        with pytest.raises(ArgumentError, match="differ in shape"):
            kde_difference(np.zeros((5, 1)), np.zeros((6, 1)), [0.0], 0.1)


# ---------------------------------------------------------------------------
# Rate fits
# ---------------------------------------------------------------------------


class TestFitRate:
    HS = [2.0**-k for k in range(3, 8)]

    def test_exact_power_law(self):
        fit = fit_rate([(h, 2.0 * h**0.5) for h in self.HS])
        assert fit.slope == pytest.approx(0.5, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(2.0), abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0)
        assert not fit.weighted

    def test_first_order(self):
        assert fit_rate([(h, h) for h in self.HS]).slope == pytest.approx(1.0, abs=1e-12)

    def test_noisy_quarter_order(self):
        rng = np.random.default_rng(2)
        hs = [2.0**-k for k in (2, 4, 6, 8, 10)]
        points = [(h, h**0.25 * (1.0 + 0.05 * rng.standard_normal()), 0.05 * h**0.25) for h in hs]
        fit = fit_rate(points)
        assert 0.2 <= fit.slope <= 0.3
        assert fit.weighted

    def test_scale_equivariance(self):
        rng = np.random.default_rng(3)
        base = [(h, h**0.4 * math.exp(0.1 * rng.standard_normal()), 0.01) for h in self.HS]
        a = fit_rate(base)
        b = fit_rate([(h, 3.7 * e, 3.7 * s) for h, e, s in base])
        assert b.slope == pytest.approx(a.slope, abs=1e-12)
        assert b.intercept - a.intercept == pytest.approx(math.log(3.7), abs=1e-12)

    def test_predictions_stay_within_the_residual(self):
        rng = np.random.default_rng(4)
        points = [(h, h**0.7 * math.exp(0.05 * rng.standard_normal())) for h in self.HS]
        fit = fit_rate(points)
        for h, e in points:
            assert abs(math.log(fit.predict(h)) - math.log(e)) <= 3.0 * fit.residual + 1e-12

    def test_non_positive_errors_are_excluded(self):
        points = [(h, h) for h in self.HS] + [(0.5, 0.0), (0.4, float("nan"))]
        fit = fit_rate(points)
        assert len(fit.points) == 5
        assert len(fit.excluded) == 2
        assert len(fit.notes) == 2

    def test_too_few_points(self):
        with pytest.raises(NumericalFault, match="at least 4"):
            fit_rate([(0.1, 0.1), (0.05, 0.05), (0.025, -1.0), (0.0125, 0.0)])

    def test_json_uses_r2(self):
        fit = fit_rate([(h, h) for h in self.HS])
        encoded = msgspec.json.decode(msgspec.json.encode(fit))
        assert "r2" in encoded and "r_squared" not in encoded


# ---------------------------------------------------------------------------
# Weak-error estimators
# ---------------------------------------------------------------------------


class TestWeakError:
    def test_constant_coefficients_have_no_weak_error(self):
        field = make_model("constant", {"drift": 0.3, "sigma": 1.0})
        for spec in ({"kind": "holder", "form": "cos"}, {"kind": "holder", "form": "abs_power", "beta": 0.5}):
            est = estimate_weak_error(field, make_test_function(spec), 0.0, GridSchedule(1.0, 4), 16, 5000, seed=1)
            assert abs(est.error) <= 3.0 * est.stderr + 1e-12

    def test_ou_mean_bias(self):
        field = make_model("ou", {"theta": 1.0, "sigma": 1.0})
        f = make_test_function({"kind": "holder", "form": "identity"})
        est = estimate_weak_error(field, f, 1.0, GridSchedule(1.0, 4), 16, 20_000, seed=2)
        expected = 0.75**4 - (1.0 - 1.0 / 64.0) ** 64
        assert abs(est.error - expected) <= 4.0 * est.stderr + 1e-9
        assert est.refinement_factor == 16 and est.m_paths == 20_000

    def test_refinement_floor(self):
        field = make_model("ou")
        f = make_test_function({"kind": "holder"})
        with pytest.raises(ArgumentError, match="at least 16"):
            estimate_weak_error(field, f, 0.0, GridSchedule(1.0, 4), 8, 100, seed=1)

    def test_indicator_too_close_to_x0_is_excluded(self):
        field = make_model("tanh_drift")
        f = make_test_function({"kind": "indicator", "domain": {"kind": "point", "point": 0.05}})
        (row,) = weak_error_cell(field, [f], 0.0, 1.0, 0.25, 100, seed=1, refinement_factor=16)
        assert row.flags == EXCLUDED_NEAR_BOUNDARY
        assert math.isnan(row.error)

    def test_sweep_rows_are_sorted_coarse_first(self):
        field = make_model("tanh_drift")
        tests = [make_test_function({"kind": "holder", "form": "cos"})]
        rows = weak_error_sweep(field, tests, 0.5, [0.125, 0.5, 0.25], 500, seed=3, refinement_factor=16)
        assert [r.h for r in rows] == [0.5, 0.25, 0.125]
        assert {r.test_function for r in rows} == {"cos"}

    def test_strong_rate_of_additive_noise(self):
        field = make_model("tanh_drift")
        fit = strong_rate_check(field, 0.0, [2.0**-k for k in range(2, 6)], 2000, seed=4)
        assert fit.slope >= 0.4


class TestFlags:
    def _row(self, h, error, stderr, bias=None):
        return SweepRow(model="m", h=h, epsilon=None, test_function="cos", error=error, stderr=stderr, bias_bound=bias)

    def test_noise_dominated_series(self):
        rows = flag_series([self._row(0.5, 0.01, 0.02), self._row(0.25, 0.005, 0.01)])
        assert all(r.flags == NOISE_DOMINATED for r in rows)

    def test_resolved_series_is_not_flagged(self):
        rows = flag_series([self._row(0.5, 0.1, 0.02), self._row(0.25, 0.001, 0.01)])
        assert all(r.flags == "" for r in rows)

    def test_bias_limited_series(self):
        rows = flag_series([self._row(0.5, 0.1, 0.001, bias=0.01), self._row(0.25, 0.01, 0.001, bias=0.006)])
        assert all(r.flags == BIAS_LIMITED for r in rows)

    def test_csv_row_columns(self):
        row = self._row(0.5, 0.1, 0.01)
        assert list(row.csv_row()) == ["model", "h", "epsilon", "test_function", "error", "stderr", "bias_bound", "flags"]


# ---------------------------------------------------------------------------
# Density sweeps
# ---------------------------------------------------------------------------


class TestDensitySweep:
    def test_grid_for_h(self):
        assert grid_for_h(1.0, 0.125).steps == 8
        with pytest.raises(ConfigurationError, match="divide"):
            grid_for_h(1.0, 0.3)

    def test_piecewise_points_need_declared_distances(self):
        field = make_model("sign_drift")
        ys = np.array([[0.75]])
        with pytest.raises(ConfigurationError, match="declare"):
            check_declared_distances(field, ys, None)
        with pytest.raises(ConfigurationError, match="differs"):
            check_declared_distances(field, ys, [0.5])
        check_declared_distances(field, ys, [0.75])

    def test_scheme_vs_fine_on_constant_coefficients(self):
        field = make_model("constant", {"drift": 0.0, "sigma": 1.0})
        rows = density_error_sweep(
            field, 0.0, [[0.0], [1.0]], [0.5, 0.25], "scheme_vs_fine", 2000, seed=5,
            refinement_factor=16, bandwidth=0.2,
        )
        assert len(rows) == 4
        assert {r.test_function for r in rows} == {"density(y=0)", "density(y=1)"}
        for r in rows:
            assert r.error <= 3.0 * r.stderr + 1e-10

    def test_decomposition_components_with_scheduled_radius(self):
        field = make_model("sign_drift")
        rows = density_error_sweep(
            field, 0.0, [[0.5]], [0.5, 0.25], "decomposition", 2000, seed=6,
            refinement_factor=16, epsilon="schedule", y_distances=[0.5], bandwidth=0.2,
        )
        labels = {r.test_function for r in rows}
        assert labels == {
            "density(y=0.5):p-p_eps",
            "density(y=0.5):p_eps-p_eps_h",
            "density(y=0.5):p_eps_h-p_h",
            "density(y=0.5):p-p_h",
        }
        expected = {r.h: r.epsilon for r in schedule_rows([0.5, 0.25], 1.0, field.gamma)}
        for r in rows:
            assert r.epsilon == pytest.approx(expected[r.h])
            assert r.error >= 0.0

    def test_decomposition_needs_a_radius(self):
        with pytest.raises(ConfigurationError, match="radius"):
            density_error_sweep(make_model("tanh_drift"), 0.0, [[0.5]], [0.5], "decomposition", 100, seed=1)
