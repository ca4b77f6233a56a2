import math

import numpy as np
import pytest

from foliageprop.errors import (
    NegativeDepth,
    NonpositiveStep,
    ThetaOutOfRange,
    UncalibratedParameters,
)
from foliageprop.ret import (
    LeafState,
    RetCoefficients,
    RetLimit,
    clamp_ret,
    dual_slope_loss,
    intersect_ray_with_clutter,
    load_ret_parameters,
    ret_curve,
    ret_loss,
)

from conftest import east_of, make_slab_stack


@pytest.fixture(scope="module")
def params():
    return load_ret_parameters()


def brute_force_loss(params, depth, theta):
    """Independent reimplementation: direct Poisson series, plain floats."""
    c = params.coefficients
    tau = c.extinction_per_m * depth
    lam = c.albedo * c.forward_fraction * tau
    beam = c.rx_beamwidth_deg * math.cos(math.radians(theta))
    cap = beam**2 / (4.0 * c.lobe_width_deg**2)
    total = math.exp(-tau)
    term = math.exp(-tau)  # tau^k / k! * e^-tau, built up iteratively
    for k in range(1, 4000):
        term *= lam / k
        total += term * (1.0 - math.exp(-cap / k))
        if term < 1e-300:
            break
    return -10.0 * math.log10(total)


class TestRetLoss:
    def test_zero_depth_zero_loss(self, params):
        for theta in (0.0, 30.0, 60.0, 90.0):
            assert ret_loss(params, 0.0, theta) == 0.0

    def test_fig_anchor_25m_30deg_exceeds_30db(self, params):
        assert ret_loss(params, 25.0, 30.0) > 30.0

    def test_loss_larger_at_60deg(self, params):
        assert ret_loss(params, 25.0, 60.0) > ret_loss(params, 25.0, 30.0)

    def test_nondecreasing_in_depth(self, params):
        for theta in (0.0, 30.0, 60.0):
            losses = [ret_loss(params, d, theta) for d in np.linspace(0.0, 200.0, 401)]
            assert all(b >= a - 1e-12 for a, b in zip(losses, losses[1:]))

    def test_monotone_pairs(self, params):
        for theta in (0.0, 30.0, 60.0):
            assert ret_loss(params, 50.0, theta) >= ret_loss(params, 25.0, theta)

    def test_dual_slope(self, params):
        early = (ret_loss(params, 5.0, 0.0) - ret_loss(params, 0.0, 0.0)) / 5.0
        late = (ret_loss(params, 100.0, 0.0) - ret_loss(params, 95.0, 0.0)) / 5.0
        assert early > late

    def test_matches_brute_force_series(self, params):
        rng = np.random.default_rng(29)
        for _ in range(40):
            depth = float(rng.uniform(0.1, 300.0))
            theta = float(rng.uniform(0.0, 90.0))
            assert ret_loss(params, depth, theta) == pytest.approx(
                brute_force_loss(params, depth, theta), abs=1e-6
            )

    def test_negative_depth(self, params):
        with pytest.raises(NegativeDepth):
            ret_loss(params, -1.0, 0.0)

    def test_theta_out_of_range(self, params):
        with pytest.raises(ThetaOutOfRange):
            ret_loss(params, 10.0, 91.0)
        with pytest.raises(ThetaOutOfRange):
            ret_loss(params, 10.0, -1.0)

    def test_unknown_species(self):
        with pytest.raises(UncalibratedParameters):
            load_ret_parameters(species="tamarack")

    def test_unknown_band(self):
        with pytest.raises(UncalibratedParameters):
            load_ret_parameters(frequency_ghz=38.0)

    def test_out_of_leaf_attenuates_less(self, params):
        out = load_ret_parameters(leaf_state=LeafState.OUT_OF_LEAF)
        assert ret_loss(out, 25.0, 30.0) < ret_loss(params, 25.0, 30.0)

    def test_coefficient_validation(self):
        with pytest.raises(ValueError):
            RetCoefficients(extinction_per_m=-1.0, albedo=0.5, forward_fraction=0.5,
                            lobe_width_deg=20.0, rx_beamwidth_deg=20.0)
        with pytest.raises(ValueError):
            RetCoefficients(extinction_per_m=0.5, albedo=1.0, forward_fraction=0.5,
                            lobe_width_deg=20.0, rx_beamwidth_deg=20.0)


class TestClamp:
    def test_clamp_active(self):
        assert clamp_ret(45.0, RetLimit(20.0)) == 20.0

    def test_clamp_inactive(self):
        assert clamp_ret(12.0, RetLimit(20.0)) == 12.0

    def test_zero_limit_always_zero(self):
        for raw in (0.0, 5.0, 100.0):
            assert clamp_ret(raw, RetLimit(0.0)) == 0.0

    def test_idempotent(self):
        limit = RetLimit(20.0)
        for raw in (0.0, 12.0, 20.0, 45.0):
            once = clamp_ret(raw, limit)
            assert clamp_ret(once, limit) == once

    def test_presets(self):
        assert RetLimit.semi_rural().limit_db == 20.0
        assert RetLimit.heavily_forested().limit_db == 30.0

    def test_negative_limit_rejected(self):
        with pytest.raises(ValueError):
            RetLimit(-1.0)

    def test_accepts_plain_float_limit(self):
        assert clamp_ret(45.0, 20.0) == 20.0


class TestRetCurve:
    def test_first_sample_zero(self, params):
        curve = ret_curve(params, 30.0, 50.0, 1.0)
        assert curve[0, 0] == 0.0
        assert curve[0, 1] == 0.0

    def test_nondecreasing(self, params):
        curve = ret_curve(params, 30.0, 100.0, 0.5)
        assert np.all(np.diff(curve[:, 1]) >= -1e-12)

    def test_60deg_dominates_30deg(self, params):
        c30 = ret_curve(params, 30.0, 100.0, 1.0)
        c60 = ret_curve(params, 60.0, 100.0, 1.0)
        assert np.all(c60[:, 1] >= c30[:, 1] - 1e-12)

    def test_invalid_args(self, params):
        with pytest.raises(ValueError):
            ret_curve(params, 30.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            ret_curve(params, 30.0, 10.0, -1.0)


class TestDualSlopeFallback:
    def test_shape(self):
        assert dual_slope_loss(0.0) == 0.0
        assert dual_slope_loss(5.0) == pytest.approx(10.0)
        assert dual_slope_loss(10.0) == pytest.approx(20.0)
        assert dual_slope_loss(25.0) == pytest.approx(27.5)

    def test_continuous_at_knee(self):
        assert dual_slope_loss(10.0 - 1e-9) == pytest.approx(dual_slope_loss(10.0 + 1e-9), abs=1e-6)

    def test_negative_depth(self):
        with pytest.raises(NegativeDepth):
            dual_slope_loss(-1.0)


class TestIntersection:
    def test_analytic_slab(self, slab_stack):
        stack, lat, lon = slab_stack
        rx = east_of(lat, lon, 300.0)
        hit = intersect_ray_with_clutter(stack, lat, lon, 30.0, rx[0], rx[1], 2.5, step_m=1.0)
        # line h(x) = 30 - (27.5/300) x against a 20 m slab over [100, 200]:
        # entry at x = 109.09, exit at slab end; slant depth 91.3 m, 5.24 deg
        assert hit.total_depth_m == pytest.approx(91.3, abs=1.0)
        assert hit.theta_deg == pytest.approx(5.24, abs=0.05)
        assert len(hit.segments) == 1
        start, end = hit.segments[0]
        assert start == pytest.approx(109.09, abs=1.0)
        assert end == pytest.approx(200.0, abs=1.0)

    def test_no_clutter_no_depth(self, slab_stack):
        stack, lat, lon = slab_stack
        # ray fully above the 20 m slab
        rx = east_of(lat, lon, 300.0)
        hit = intersect_ray_with_clutter(stack, lat, lon, 60.0, rx[0], rx[1], 40.0, step_m=1.0)
        assert hit.total_depth_m == 0.0
        assert hit.theta_deg is None
        assert hit.segments == ()

    def test_depth_matches_segment_slant_lengths(self, slab_stack):
        stack, lat, lon = slab_stack
        rx = east_of(lat, lon, 300.0)
        hit = intersect_ray_with_clutter(stack, lat, lon, 30.0, rx[0], rx[1], 2.5, step_m=0.5)
        grade = abs(2.5 - 30.0) / 300.0
        slant = math.sqrt(1.0 + grade**2)
        seg_total = sum((e - s) * slant for s, e in hit.segments)
        assert hit.total_depth_m == pytest.approx(seg_total, abs=1.0)

    def test_step_convergence(self, slab_stack):
        stack, lat, lon = slab_stack
        rx = east_of(lat, lon, 300.0)
        d1 = intersect_ray_with_clutter(stack, lat, lon, 30.0, rx[0], rx[1], 2.5, step_m=1.0)
        d2 = intersect_ray_with_clutter(stack, lat, lon, 30.0, rx[0], rx[1], 2.5, step_m=0.5)
        assert abs(d2.total_depth_m - d1.total_depth_m) < 2.0 * 1.0

    def test_symmetric_under_endpoint_swap(self, slab_stack):
        stack, lat, lon = slab_stack
        rx = east_of(lat, lon, 300.0)
        fwd = intersect_ray_with_clutter(stack, lat, lon, 30.0, rx[0], rx[1], 2.5, step_m=1.0)
        rev = intersect_ray_with_clutter(stack, rx[0], rx[1], 2.5, lat, lon, 30.0, step_m=1.0)
        assert abs(fwd.total_depth_m - rev.total_depth_m) < 2.0 * 1.0

    def test_nonpositive_step(self, slab_stack):
        stack, lat, lon = slab_stack
        rx = east_of(lat, lon, 300.0)
        with pytest.raises(NonpositiveStep):
            intersect_ray_with_clutter(stack, lat, lon, 30.0, rx[0], rx[1], 2.5, step_m=0.0)

    def test_grazing_ray_through_uniform_canopy(self):
        # horizontal ray inside a canopy that spans the whole grid
        stack, lat, lon = make_slab_stack(canopy_height=20.0, slab_start=-49.0, slab_end=369.0)
        rx = east_of(lat, lon, 300.0)
        hit = intersect_ray_with_clutter(stack, lat, lon, 10.0, rx[0], rx[1], 10.0, step_m=1.0)
        assert hit.total_depth_m == pytest.approx(300.0, abs=1.5)
        assert hit.theta_deg == pytest.approx(0.0, abs=0.01)
