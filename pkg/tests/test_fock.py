import cmath
import math

import pytest

from qmemsim.fock import (
    AUX_ARM,
    PRINCIPAL,
    RAIL,
    BeamSplitter,
    CapacityError,
    Delay,
    FockKet,
    MemristorTap,
    MixedState,
    ModeLabel,
    PhaseShift,
    apply_element,
    dump_state,
    joint_click_distribution,
    mean_photon_number,
    prepare_two_pulse_source,
    threshold_click_probability,
    two_pulse_pipeline,
)
from qmemsim.homodyne import SourceModel


def closed_form_click(beta_sq, r, phi):
    """Interference-bin click probability for one memristor at unit
    efficiency: fringe term plus the feedback and bunching two-photon
    terms. Derived by expanding the two-pulse state through the splitter
    network by hand; the same expression backs the acceptance grid."""
    t = 1.0 - r
    return (
        (1.0 - beta_sq) * beta_sq * t * math.sin(phi / 2.0) ** 2
        + beta_sq**2 * r * t / 2.0
        + 0.375 * beta_sq**2 * t * t
    )


def closed_form_click_double(beta_sq, r1, r2, phi):
    t1, t2 = 1.0 - r1, 1.0 - r2
    return (
        (1.0 - beta_sq) * beta_sq * t1 * t2 * math.sin(phi / 2.0) ** 2
        + beta_sq**2 * r1 * t1 * t2 / 2.0
        + beta_sq**2 * r2 * t1 * t1 * t2 / 2.0
        + 0.375 * beta_sq**2 * t1 * t1 * t2 * t2
    )


def one(spatial, time_bin, internal=PRINCIPAL):
    return ModeLabel(spatial, time_bin, internal)


class TestElements:
    def test_transparent_splitter_is_identity(self):
        ket = FockKet({(one(0, 0),): 1.0})
        out = apply_element(ket, BeamSplitter(0, 1, 0.0))
        assert out.amplitude([one(0, 0)]) == pytest.approx(1.0)

    def test_mirror_swaps_with_sign(self):
        ket = FockKet({(one(0, 0),): 1.0, (one(1, 0),): 0.0})
        out = apply_element(ket, BeamSplitter(0, 1, 1.0))
        assert out.amplitude([one(1, 0)]) == pytest.approx(1.0)
        ket_b = FockKet({(one(1, 0),): 1.0})
        out_b = apply_element(ket_b, BeamSplitter(0, 1, 1.0))
        assert out_b.amplitude([one(0, 0)]) == pytest.approx(1.0)

    def test_hom_dip(self):
        # one photon in each port of a balanced splitter never splits
        ket = FockKet({(one(0, 0), one(1, 0)): 1.0})
        out = apply_element(ket, BeamSplitter(0, 1, 0.5))
        assert abs(out.amplitude([one(0, 0), one(1, 0)])) < 1e-15
        assert abs(out.amplitude([one(0, 0), one(0, 0)])) == pytest.approx(
            1 / math.sqrt(2), abs=1e-12
        )

    def test_unitarity(self):
        ket = FockKet(
            {
                (): 0.5,
                (one(0, 0),): 0.5j,
                (one(1, 0),): -0.5,
                (one(0, 0), one(1, 0)): 0.5,
            }
        )
        for element in (
            BeamSplitter(0, 1, 0.37),
            PhaseShift(0, 1.1),
            Delay(1, 2),
        ):
            out = apply_element(ket, element)
            assert out.norm() == pytest.approx(1.0, abs=1e-12)
            ket = out

    def test_delay_shifts_bins(self):
        ket = FockKet({(one(0, 1),): 1.0})
        out = apply_element(ket, Delay(0, 2))
        assert out.amplitude([one(0, 3)]) == pytest.approx(1.0)

    def test_phase_shift(self):
        ket = FockKet({(one(0, 0),): 1.0})
        out = apply_element(ket, PhaseShift(0, math.pi / 2))
        assert out.amplitude([one(0, 0)]) == pytest.approx(1j, abs=1e-12)

    def test_tap_moves_amplitude_to_feedback(self):
        ket = FockKet({(one(0, 0),): 1.0})
        out = apply_element(ket, MemristorTap(0, 9, 0.25))
        assert out.amplitude([one(0, 0)]) == pytest.approx(math.sqrt(0.75))
        assert out.amplitude([one(9, 0)]) == pytest.approx(0.5)

    def test_capacity_error(self):
        with pytest.raises(CapacityError):
            FockKet({(one(0, 0), one(0, 0), one(0, 1)): 1.0}, n_max=2)


class TestSource:
    def test_vacuum_source(self):
        state = prepare_two_pulse_source(SourceModel(0.0, 1.0, 1.0), 0.3)
        assert len(state.components) == 1
        w, ket = state.components[0]
        assert w == pytest.approx(1.0)
        assert ket.amplitude([]) == pytest.approx(1.0)

    def test_two_photon_source(self):
        phi = 0.7
        state = prepare_two_pulse_source(SourceModel(1.0, 1.0, 1.0), phi)
        assert len(state.components) == 1
        _, ket = state.components[0]
        amp = ket.amplitude([one(RAIL, 0), one(RAIL, 1)])
        assert amp == pytest.approx(cmath.exp(1j * phi), abs=1e-12)

    def test_weights_sum_to_one(self):
        state = prepare_two_pulse_source(SourceModel(0.4, 0.8, 0.9), 0.0)
        assert sum(w for w, _ in state.components) == pytest.approx(1.0, abs=1e-12)
        state.validate()

    def test_mixed_state_weight_validation(self):
        bad = MixedState([(0.6, FockKet.vacuum()), (0.6, FockKet.vacuum())])
        with pytest.raises(ValueError):
            bad.validate()


class TestThresholdDetection:
    def test_vacuum_never_clicks(self):
        assert threshold_click_probability(FockKet.vacuum(), (0, 0), 0.9) == 0.0

    def test_two_photon_bunching_factor(self):
        # a two-photon occupation clicks as 1 - (1 - eta)^2 = eta (2 - eta)
        ket = FockKet({(one(0, 0), one(0, 0)): 1.0})
        for eta in (0.05, 0.5, 1.0):
            p = threshold_click_probability(ket, (0, 0), eta)
            assert p == pytest.approx(eta * (2.0 - eta), abs=1e-12)

    def test_internal_modes_summed(self):
        ket = FockKet({(one(0, 0, 0), one(0, 0, 2)): 1.0})
        assert threshold_click_probability(ket, (0, 0), 1.0) == pytest.approx(1.0)

    def test_spot_value(self):
        probs = two_pulse_pipeline(SourceModel(1.0, 1.0, 1.0), [0.5], 0.0, 1.0)
        assert probs[(1, 1)] == pytest.approx(0.21875, abs=1e-9)

    def test_mean_photon_number(self):
        ket = FockKet({(one(0, 0), one(0, 0)): 1.0})
        assert mean_photon_number(ket, 0, 0) == pytest.approx(2.0)


GRID_BETA = (0.1, 0.3, 0.5, 0.7, 0.9)
GRID_R = (0.0, 0.3, 0.7)
GRID_PHI = (0.0, math.pi / 2, math.pi)


class TestPipeline:
    @pytest.mark.parametrize("beta_sq", GRID_BETA)
    @pytest.mark.parametrize("r", GRID_R)
    @pytest.mark.parametrize("phi", GRID_PHI)
    def test_single_chain_matches_closed_form(self, beta_sq, r, phi):
        p = two_pulse_pipeline(SourceModel(beta_sq, 1.0, 1.0), [r], phi, 1.0)[(1, 1)]
        assert p == pytest.approx(closed_form_click(beta_sq, r, phi), abs=1e-9)

    @pytest.mark.parametrize("r1,r2", [(0.3, 0.6), (0.0, 0.5), (0.7, 0.2)])
    @pytest.mark.parametrize("phi", (0.0, 1.0, math.pi))
    def test_double_chain_matches_closed_form(self, r1, r2, phi):
        beta_sq = 0.6
        p = two_pulse_pipeline(SourceModel(beta_sq, 1.0, 1.0), [r1, r2], phi, 1.0)[(1, 1)]
        assert p == pytest.approx(closed_form_click_double(beta_sq, r1, r2, phi), abs=1e-9)

    def test_fringe_peak_at_pi(self):
        src = SourceModel(0.5, 1.0, 1.0)
        values = [
            two_pulse_pipeline(src, [], phi, 1.0)[(1, 1)]
            for phi in (0.0, 1.0, 2.0, math.pi)
        ]
        assert values[-1] == max(values)

    def test_probability_completeness(self):
        # click/no-click outcomes over all six detector slots exhaust the
        # ensemble even with memristor feedback occupying hidden modes
        state = prepare_two_pulse_source(SourceModel(0.6, 0.9, 0.8), 0.4)
        state = apply_element(state, MemristorTap(RAIL, 10, 0.3))
        state = apply_element(state, BeamSplitter(RAIL, AUX_ARM, 0.5))
        state = apply_element(state, Delay(AUX_ARM, 1))
        state = apply_element(state, BeamSplitter(AUX_ARM, RAIL, 0.5))
        detectors = [(s, b) for s in (RAIL, AUX_ARM) for b in (0, 1, 2)]
        dist = joint_click_distribution(state, detectors, 0.7)
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)

    def test_unsupported_chain_length(self):
        with pytest.raises(ValueError):
            two_pulse_pipeline(SourceModel(0.5), [0.1, 0.2, 0.3], 0.0, 1.0)

    def test_efficiency_scales_click_probability(self):
        src = SourceModel(0.5, 1.0, 1.0)
        p_full = two_pulse_pipeline(src, [0.4], math.pi, 1.0)[(1, 1)]
        p_half = two_pulse_pipeline(src, [0.4], math.pi, 0.5)[(1, 1)]
        assert p_half < p_full


class TestDistinguishability:
    def test_orthogonal_photons_do_not_interfere(self):
        # with v_hom = 0 the two-photon coincidence at the outputs survives
        # at the distinguishable-particle level instead of being suppressed
        probs_dist = _coincidence(v_hom=0.0)
        probs_indist = _coincidence(v_hom=1.0)
        assert probs_indist == pytest.approx(0.0, abs=1e-12)
        assert probs_dist == pytest.approx(0.125, abs=1e-12)

    def test_fringe_scaling_with_v_hom(self):
        # single-photon fringe contrast carries sqrt(v_hom)
        v_hom = 0.64
        src = SourceModel(0.5, 1.0, v_hom)
        p_max = two_pulse_pipeline(src, [], math.pi, 1e-6)[(1, 1)]
        p_min = two_pulse_pipeline(src, [], 0.0, 1e-6)[(1, 1)]
        vis = (p_max - p_min) / (p_max + p_min)
        assert vis == pytest.approx((1 - 0.5) * math.sqrt(v_hom), abs=1e-4)


def _coincidence(v_hom):
    state = prepare_two_pulse_source(SourceModel(1.0, 1.0, v_hom), 0.0)
    state = apply_element(state, BeamSplitter(RAIL, AUX_ARM, 0.5))
    state = apply_element(state, Delay(AUX_ARM, 1))
    state = apply_element(state, BeamSplitter(AUX_ARM, RAIL, 0.5))
    dist = joint_click_distribution(state, [(RAIL, 1), (AUX_ARM, 1)], 1.0)
    return dist.get((True, True), 0.0)


def test_dump_format():
    ket = FockKet({(one(0, 1), one(0, 1)): 1.0})
    text = dump_state(ket)
    assert text == "0:1:0^2 1.0 0.0"
    assert dump_state(FockKet.vacuum()).startswith("vacuum")
