import math

import numpy as np
import pytest

from qmemsim.homodyne import (
    PurityFit,
    SourceModel,
    VisibilityCurve,
    fit_purity,
    fringe_trace,
    visibility_double,
    visibility_loop_width,
    visibility_realistic,
    visibility_single,
)


class TestClosedForms:
    def test_vacuum_limit(self):
        assert visibility_single(0.0, 0.7) == 1.0

    def test_pi_pulse_kills_fringes(self):
        assert visibility_single(1.0, 1.0) == 0.0

    def test_half_population_bare(self):
        assert visibility_single(0.5, 1.0) == pytest.approx(4.0 / 7.0, abs=1e-15)

    def test_double_reduces_to_single(self):
        for b in (0.1, 0.5, 0.9):
            for t1 in (0.2, 0.8):
                assert visibility_double(b, t1, 1.0) == visibility_single(b, t1)

    def test_double_half_population(self):
        assert visibility_double(0.5, 1.0, 1.0) == pytest.approx(4.0 / 7.0, abs=1e-15)

    def test_deep_cascade_acts_as_loss(self):
        # vanishing net transmissivity drives the visibility to 1 - beta_sq
        for b in (0.2, 0.6):
            assert visibility_double(b, 1e-9, 1e-9) == pytest.approx(1.0 - b, abs=1e-9)

    def test_product_invariance(self):
        for b in (0.3, 0.6):
            ref = visibility_double(b, 0.5, 0.7)
            for t1, t2 in ((0.7, 0.5), (0.35, 1.0), (1.0, 0.35)):
                assert abs(visibility_double(b, t1, t2) - ref) <= 1e-12

    def test_domain_checked(self):
        with pytest.raises(ValueError):
            visibility_single(1.2, 0.5)
        with pytest.raises(ValueError):
            visibility_double(0.5, -0.1, 0.5)


class TestRealistic:
    def test_matches_ideal_at_unit_efficiency(self):
        for b in (0.2, 0.5, 0.8):
            for t in (0.3, 1.0):
                got = visibility_realistic(SourceModel(b, 1.0, 1.0), t, 1.0)
                assert got == pytest.approx(visibility_single(b, t), abs=1e-9)

    def test_loss_limit_closed_form(self):
        src = SourceModel(0.3, 1.0, 1.0)
        assert visibility_realistic(src, 0.5, 0.0) == pytest.approx(0.7, abs=1e-15)

    def test_impure_distinguishable_source(self):
        src = SourceModel(0.0, 0.95, 0.915)
        expected = 0.95**2 * math.sqrt(0.915)
        assert visibility_realistic(src, 0.5, 0.0) == pytest.approx(expected, abs=1e-12)
        # at finite efficiency the vacuum limit is approached from below
        src_small = SourceModel(0.01, 0.95, 0.915)
        got = visibility_realistic(src_small, 0.5, 1e-3)
        assert got == pytest.approx(expected * (1.0 - 0.01), abs=1e-3)

    def test_lossless_exceeds_lossy(self):
        # device dependence survives only at high efficiency
        for b in (0.3, 0.7):
            for t in (0.4, 0.9):
                ideal = visibility_realistic(SourceModel(b, 1.0, 1.0), t, 1.0)
                lossy = visibility_realistic(SourceModel(b, 1.0, 1.0), t, 1e-3)
                assert ideal > lossy

    def test_monotone_in_population(self):
        grid = np.linspace(0.05, 0.95, 10)
        for eta in (1.0, 0.3):
            vals = [
                visibility_realistic(SourceModel(float(b), 0.95, 0.9), 0.6, eta)
                for b in grid
            ]
            assert all(v2 < v1 for v1, v2 in zip(vals, vals[1:]))


class TestPurityFit:
    def _curve(self, purity, v_hom, sigma=None, rng=None):
        beta = np.linspace(0.05, 0.95, 10)
        vis = purity**2 * math.sqrt(v_hom) * (1.0 - beta)
        if rng is not None:
            vis = vis + rng.normal(0.0, sigma, size=beta.size)
        sig = tuple([sigma] * beta.size) if sigma else None
        return VisibilityCurve(tuple(beta.tolist()), tuple(vis.tolist()), sig)

    def test_noise_free_round_trip(self):
        fit = fit_purity(self._curve(0.95, 0.915), 0.915)
        assert isinstance(fit, PurityFit)
        assert fit.purity == pytest.approx(0.95, abs=1e-10)
        assert fit.residual_norm < 1e-12

    def test_fully_mixed_source(self):
        fit = fit_purity(self._curve(0.0, 0.9), 0.9)
        assert fit.purity == 0.0

    def test_noisy_recovery(self):
        rng = np.random.default_rng(1234)
        fit = fit_purity(self._curve(0.95, 0.915, sigma=0.01, rng=rng), 0.915)
        assert fit.purity == pytest.approx(0.95, abs=0.01)
        assert fit.purity_se > 0.0

    def test_affine_diagnostic_close_to_constrained(self):
        fit = fit_purity(self._curve(0.9, 1.0), 1.0)
        assert fit.slope_affine == pytest.approx(-fit.slope, abs=1e-9)
        assert fit.intercept_affine == pytest.approx(fit.slope, abs=1e-9)

    def test_degenerate_design_rejected(self):
        curve = VisibilityCurve((0.5, 0.5000000001, 0.50000000011), (0.4, 0.4, 0.4))
        with pytest.raises(ValueError):
            fit_purity(curve, 1.0)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            fit_purity(VisibilityCurve((0.1, 0.9), (0.9, 0.1)), 1.0)

    def test_curve_validation(self):
        with pytest.raises(ValueError):
            VisibilityCurve((0.1, 0.1), (0.5, 0.5))
        with pytest.raises(ValueError):
            VisibilityCurve((0.1, 1.4), (0.5, 0.5))


class TestFringeTrace:
    def test_pi_pulse_is_flat(self):
        phases = np.linspace(0.0, 2 * math.pi, 17)
        ch1, ch2 = fringe_trace(SourceModel(1.0, 1.0, 1.0), [0.3], phases, 1.0)
        assert np.ptp(ch1) < 1e-12
        assert np.ptp(ch2) < 1e-12

    def test_channels_complementary(self):
        # one-photon fringes are opposite and two-photon terms carry no
        # phase, so the channel sum is flat in phi
        phases = np.linspace(0.0, 2 * math.pi, 21)
        ch1, ch2 = fringe_trace(SourceModel(0.5, 1.0, 1.0), [0.5], phases, 1.0)
        total = ch1 + ch2
        assert np.ptp(total) < 1e-12
        assert np.ptp(ch1) > 0.01

    def test_2pi_periodicity(self):
        phases = [0.3, 0.3 + 2 * math.pi]
        ch1, _ = fringe_trace(SourceModel(0.4, 1.0, 1.0), [], phases, 1.0)
        assert ch1[0] == pytest.approx(ch1[1], abs=1e-12)

    def test_visibility_consistent_with_realistic(self):
        src = SourceModel(0.5, 0.97, 0.9)
        phases = np.linspace(0.0, 2 * math.pi, 201)
        ch1, _ = fringe_trace(src, [0.5], phases, 0.4)
        vis = (ch1.max() - ch1.min()) / (ch1.max() + ch1.min())
        assert vis == pytest.approx(visibility_realistic(src, 0.5, 0.4), abs=1e-6)


class TestVisibilityLoop:
    def test_static_transmissivity_gives_no_loop(self):
        b = np.concatenate([np.linspace(0, 1, 21), np.linspace(1, 0, 21)[1:]])
        t = np.full_like(b, 0.6)
        width = visibility_loop_width(b, t, SourceModel(0.0, 1.0, 1.0), 1.0)
        assert width < 1e-12

    def test_modulated_transmissivity_opens_loop(self):
        b = np.concatenate([np.linspace(0, 1, 21), np.linspace(1, 0, 21)[1:]])
        t = np.concatenate([np.full(21, 0.4), np.full(20, 0.8)])
        width = visibility_loop_width(b, t, SourceModel(0.0, 1.0, 1.0), 1.0)
        assert width > 0.01
