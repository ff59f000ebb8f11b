"""
Tests for the bump kernel, Hölder convolution, the piecewise blend and the mollifier scans.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ewel.coefficients import SampleGrid, make_model
from ewel.exceptions import ArgumentError, ConfigurationError
from ewel.harness import MollifierConfig
from ewel.parametrix import TableCache, TableCacheConfig, engine_for, set_table_cache_config
from ewel.mollifier import (
    BLEND_SLACK,
    DEFAULT_NODES,
    MollifierKernel,
    MollifyMethod,
    blend_weight,
    derivative_blowup_scan,
    lq_deviation,
    mollifier_scan,
    mollify,
    mollify_holder,
    mollify_piecewise,
    reflect_time,
    sup_deviation,
)


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------


class TestKernel:
    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_discrete_mass_is_one(self, dim):
        kernel = MollifierKernel(dim, nodes=12)
        assert kernel.weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert kernel.mass() == pytest.approx(1.0, rel=1e-10)

    def test_symmetric_nodes_have_zero_first_moment(self):
        kernel = MollifierKernel(1, nodes=24)
        assert float(kernel.weights @ kernel.points[:, 0]) == pytest.approx(0.0, abs=1e-14)

    def test_profile_vanishes_outside_unit_ball(self):
        kernel = MollifierKernel(2, nodes=8)
        assert kernel.profile(np.array([[1.0, 0.0], [0.8, 0.8]])).tolist() == [0.0, 0.0]

    def test_too_few_nodes(self):
        with pytest.raises(ConfigurationError, match="at least"):
            MollifierKernel(1, nodes=4)


# ---------------------------------------------------------------------------
# Hölder convolution
# ---------------------------------------------------------------------------


class TestHolderConvolution:
    def test_constant_field_is_unchanged(self):
        field = make_model("constant", {"drift": 0.3, "sigma": 1.2})
        smooth = mollify_holder(field, 0.1)
        xs = np.linspace(-2.0, 2.0, 9)
        np.testing.assert_allclose(smooth.drift(0.0, xs)[:, 0], 0.3, rtol=1e-13)
        np.testing.assert_allclose(smooth.sigma(0.0, xs)[:, 0, 0], 1.2, rtol=1e-13)

    def test_linear_drift_is_reproduced(self):
        field = make_model("ou", {"theta": 2.0})
        smooth = mollify(field, 0.25)
        xs = np.linspace(-2.0, 2.0, 9)
        np.testing.assert_allclose(smooth.drift(0.0, xs)[:, 0], -2.0 * xs, atol=1e-12)

    def test_declared_constants_are_inherited(self):
        field = make_model("weierstrass_sigma")
        smooth = mollify(field, 0.1)
        assert smooth.method is MollifyMethod.HOLDER_CONVOLUTION
        assert (smooth.k1, smooth.k2, smooth.lam, smooth.gamma) == (field.k1, field.k2, field.lam, field.gamma)
        assert smooth.params["epsilon"] == 0.1
        assert "eps=0.1" in smooth.name

    def test_default_quadrature_nodes(self):
        smooth = mollify(make_model("weierstrass_sigma"), 0.1)
        assert DEFAULT_NODES == 24
        assert smooth.params["quadrature_nodes"] == DEFAULT_NODES
        assert MollifierConfig().quadrature_nodes == DEFAULT_NODES

    def test_series_cache_tells_quadrature_apart(self):
        set_table_cache_config(TableCacheConfig(cache=TableCache()))
        field = make_model("weierstrass_sigma")
        coarse = mollify(field, 0.1, nodes=8)
        fine = mollify(field, 0.1, nodes=48)
        assert coarse.params["quadrature_nodes"] == 8
        first = engine_for(coarse, 0.0, 0.5, 0.0)
        second = engine_for(fine, 0.0, 0.5, 0.0)
        assert second is not first
        assert second.field is fine
        assert engine_for(fine, 0.0, 0.5, 0.0) is second

    def test_series_cache_tells_horizons_apart(self):
        set_table_cache_config(TableCacheConfig(cache=TableCache()))
        field = make_model("time_sine", {"sigma0": 1.0, "amplitude": 0.5, "period": 1.0})
        short = engine_for(mollify(field, 0.2, horizon=1.0), 0.0, 0.5, 0.0)
        long = engine_for(mollify(field, 0.2, horizon=2.0), 0.0, 0.5, 0.0)
        assert long is not short

    @pytest.mark.parametrize("eps", [0.0, -0.1, 1.5])
    def test_radius_out_of_range(self, eps):
        with pytest.raises(ConfigurationError, match="radius"):
            mollify_holder(make_model("weierstrass_sigma"), eps)

    def test_piecewise_field_rejected(self):
        with pytest.raises(ConfigurationError, match="Hölder"):
            mollify_holder(make_model("sign_drift"), 0.1)

    def test_reflect_time(self):
        np.testing.assert_allclose(reflect_time(np.array([-0.1, 0.5, 1.2]), 1.0), [0.1, 0.5, 0.8])
        np.testing.assert_allclose(reflect_time(np.array([-0.3]), None), [0.3])

    def test_time_dependent_sigma_is_smoothed_in_time(self):
        field = make_model("time_sine", {"sigma0": 1.0, "amplitude": 0.5, "period": 1.0})
        smooth = mollify(field, 0.2, horizon=1.0)
        # smoothing lowers the peak of the sine
        peak = smooth.sigma(0.25, [0.0])[0, 0, 0]
        assert 1.0 < peak < 1.5

    def test_tabulated_matches_direct_quadrature(self):
        smooth = mollify(make_model("weierstrass_sigma"), 0.2)
        table = smooth.tabulated()
        knots = table.sigma_eval.spline.x[::50]
        np.testing.assert_allclose(table.sigma(0.0, knots), smooth.sigma(0.0, knots), atol=1e-12)
        # the mollified drift is smooth, so the spline holds between knots too
        xs = np.random.default_rng(1).uniform(-2.0, 2.0, 400)
        np.testing.assert_allclose(table.drift(0.0, xs), smooth.drift(0.0, xs), atol=1e-6)
        # off the table the direct evaluator is used
        far = np.array([10.0])
        np.testing.assert_allclose(table.sigma(0.0, far), smooth.sigma(0.0, far))

    def test_tabulation_needs_one_dimension(self):
        smooth = mollify(make_model("tanh_drift", {"dim": 2}), 0.2)
        with pytest.raises(ArgumentError, match="one-dimensional"):
            smooth.tabulated()


# ---------------------------------------------------------------------------
# Piecewise blend
# ---------------------------------------------------------------------------


class TestPiecewiseBlend:
    def test_blend_weight_profile(self):
        assert blend_weight(np.array([0.0]))[0] == pytest.approx(1.0)
        assert blend_weight(np.array([2.0, 3.0])).tolist() == [0.0, 0.0]
        assert 2.0 * blend_weight(np.array([1.0]))[0] == pytest.approx(
            2.0 * math.exp(0.25) * math.exp(-1.0 / 3.0)
        )

    def test_drift_is_untouched_outside_the_tube(self):
        field = make_model("sign_drift", {"amplitude": 0.5})
        smooth = mollify_piecewise(field, 0.1)
        xs = np.array([-1.0, -0.2, 0.2, 1.0])
        np.testing.assert_array_equal(smooth.drift(0.0, xs), field.drift(0.0, xs))

    def test_blend_is_odd_across_the_point(self):
        smooth = mollify(make_model("sign_drift", {"amplitude": 0.5}), 0.1)
        assert smooth.drift(0.0, [0.0])[0, 0] == pytest.approx(0.0, abs=1e-15)
        xs = np.linspace(0.01, 0.09, 9)
        np.testing.assert_allclose(smooth.drift(0.0, xs), -smooth.drift(0.0, -xs), atol=1e-14)

    def test_blend_is_continuous_at_the_tube_edge(self):
        smooth = mollify(make_model("sign_drift", {"amplitude": 0.5}), 0.1)
        inside = smooth.drift(0.0, [0.1 - 1e-9])[0, 0]
        assert inside == pytest.approx(0.5, abs=1e-6)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-0.5, 0.5), st.floats(0.01, 0.3))
    def test_blend_bound(self, x, eps):
        field = make_model("sign_drift", {"amplitude": 0.5})
        smooth = mollify_piecewise(field, eps)
        assert abs(smooth.drift(0.0, [x])[0, 0]) <= BLEND_SLACK * field.k1 + 1e-12
        assert smooth.k1 == BLEND_SLACK * field.k1

    def test_sigma_is_kept(self):
        field = make_model("sign_drift", {"sigma": 1.3})
        smooth = mollify(field, 0.1)
        assert smooth.sigma(0.0, [0.0])[0, 0, 0] == 1.3
        assert smooth.quadrature_nodes == 0

    def test_radius_beyond_reach(self):
        field = make_model("sphere_drift", {"radius": 0.5})
        with pytest.raises(ConfigurationError, match="reach"):
            mollify_piecewise(field, 0.6)

    def test_holder_field_rejected(self):
        with pytest.raises(ConfigurationError, match="discontinuity set"):
            mollify_piecewise(make_model("tanh_drift"), 0.1)

    def test_sphere_blend_outside_and_inside(self):
        field = make_model("sphere_drift", {"radius": 1.0})
        smooth = mollify(field, 0.1)
        pts = np.array([[0.0, 0.0], [2.0, 0.0]])
        np.testing.assert_allclose(smooth.drift(0.0, pts), field.drift(0.0, pts))


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------


class TestDeviationScans:
    def test_constant_field_has_no_deviation(self):
        field = make_model("constant", {"drift": 0.3})
        report = sup_deviation(field, mollify(field, 0.1))
        assert report.delta_b == pytest.approx(0.0, abs=1e-13)
        assert report.delta_sigma == pytest.approx(0.0, abs=1e-13)
        assert report.delta_sigma_eta is None

    def test_holder_seminorm_needs_eta_below_gamma(self):
        field = make_model("weierstrass_sigma", {"gamma": 0.5})
        with pytest.raises(ArgumentError, match="eta"):
            sup_deviation(field, mollify(field, 0.1), eta=0.6)

    def test_holder_seminorm_is_reported(self):
        field = make_model("weierstrass_sigma", {"gamma": 0.5})
        report = sup_deviation(field, mollify(field, 0.1), SampleGrid(n_pairs=2000), eta=0.25)
        assert report.delta_sigma_eta is not None and report.delta_sigma_eta > 0.0

    def test_sign_drift_sup_deviation_is_the_jump(self):
        field = make_model("sign_drift", {"amplitude": 0.5})
        grid = SampleGrid(radius=1.0, resolution=201, time_resolution=1)
        report = sup_deviation(field, mollify(field, 0.1), grid)
        # the lattice contains the point 0, where b = 0.5 and b_eps = 0
        assert report.delta_b == pytest.approx(0.5)

    def test_lq_deviation_scales_like_eps_to_one_over_q(self):
        field = make_model("sign_drift", {"amplitude": 0.5})
        a = lq_deviation(field, mollify(field, 0.2), q=2.0, horizon=1.0)
        b = lq_deviation(field, mollify(field, 0.1), q=2.0, horizon=1.0)
        assert a / b == pytest.approx(math.sqrt(2.0), rel=1e-2)

    def test_lq_needs_q_above_dimension(self):
        field = make_model("sign_drift")
        with pytest.raises(ConfigurationError, match="q must exceed"):
            lq_deviation(field, mollify(field, 0.1), q=1.0, horizon=1.0)

    def test_derivative_of_mollified_linear_drift(self):
        field = make_model("ou", {"theta": 1.5})
        report = derivative_blowup_scan(mollify(field, 0.2), [1])
        assert report.max_drift == pytest.approx(1.5, rel=1e-6)
        assert report.max_sigma == pytest.approx(0.0, abs=1e-8)

    def test_derivative_step_must_resolve_eps(self):
        smooth = mollify(make_model("tanh_drift"), 0.1)
        with pytest.raises(ConfigurationError, match="does not resolve"):
            derivative_blowup_scan(smooth, [1], step=0.05)

    def test_multi_index_must_match_dimension(self):
        smooth = mollify(make_model("tanh_drift"), 0.1)
        with pytest.raises(ArgumentError, match="multi-index"):
            derivative_blowup_scan(smooth, [1, 0])

    def test_scan_rows_and_ratios(self):
        field = make_model("sign_drift", {"amplitude": 0.5})
        rows = mollifier_scan(field, [0.1, 0.2], SampleGrid(radius=1.0, resolution=101, time_resolution=1), q=2.0)
        quantities = {r.quantity for r in rows}
        assert {"delta_b", "delta_sigma", "lq_deviation", "deriv1_drift", "deriv1_sigma"} <= quantities
        assert "lq_deviation_ratio" in quantities
        ratio = next(r for r in rows if r.quantity == "lq_deviation_ratio")
        assert ratio.epsilon == 0.2
        assert ratio.value == pytest.approx(math.sqrt(2.0), rel=1e-2)
        growth = next(r for r in rows if r.quantity == "deriv1_drift_ratio")
        assert growth.value > 1.0


@pytest.mark.slow
class TestMollifierScaling:
    def test_weierstrass_deviation_and_derivative_growth(self):
        field = make_model("weierstrass_sigma", {"gamma": 0.5})
        grid = SampleGrid(radius=2.0, resolution=801, time_resolution=1)
        rows = mollifier_scan(field, [0.2, 0.1, 0.05], grid, nodes=96)
        dev = {r.epsilon: r.value for r in rows if r.quantity == "delta_sigma"}
        assert 1.6 <= dev[0.2] / dev[0.05] <= 2.8
        for r in rows:
            if r.quantity == "deriv1_sigma_ratio":
                assert 1.1 <= r.value <= 2.0
