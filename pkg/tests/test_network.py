import math

import numpy as np
import pytest

from qmemsim.homodyne import SourceModel
from qmemsim.memristor import DetectionModel, MemristorParams
from qmemsim.network import (
    ChainConfig,
    InsufficientDataError,
    extract_loop,
    loop_areas,
    pinch_check,
    run_chain,
    series_parallel_equivalence,
    sweep_windows,
)
from qmemsim.signals import SamplingGrid, SignalSpec, Waveform

T_OSC = 400.0
SIN2 = SignalSpec(Waveform.SIN_SQUARED, period_s=T_OSC)


def chain(*windows, exposure=4.0, latency=0.0, detection=None):
    nodes = tuple(MemristorParams(w, exposure, latency) for w in windows)
    if detection is None:
        detection = DetectionModel()
    return ChainConfig(nodes=nodes, detection=detection)


class TestRunChain:
    def test_constant_drive_fixed_point(self):
        drive = SignalSpec(Waveform.CONSTANT, period_s=40.0, level=0.5)
        trace = run_chain(chain(20.0), drive, SamplingGrid(dt_s=1.0, duration_s=200.0))
        assert trace.n_transmitted[-1, 0] == pytest.approx(0.25, abs=1e-14)
        assert trace.n_reflected[-1, 0] == pytest.approx(0.25, abs=1e-14)

    def test_two_node_constant_drive(self):
        drive = SignalSpec(Waveform.CONSTANT, period_s=40.0, level=0.5)
        trace = run_chain(chain(20.0, 20.0), drive, SamplingGrid(dt_s=1.0, duration_s=240.0))
        # while both windows still hold the neutral fill, both nodes sit at
        # R = 0.5 and the cascade transfer is 0.5^2 * 0.5
        assert trace.n_transmitted[0, 1] == pytest.approx(0.125, abs=1e-14)
        # the second node then drifts to the mean of its own 0.25 input, so
        # the true steady state is (1 - 0.5) * (1 - 0.25) * 0.5
        assert trace.n_transmitted[-1, 1] == pytest.approx(0.1875, abs=1e-14)
        assert trace.reflectivity[-1, 1] == pytest.approx(0.25, abs=1e-14)

    def test_cascade_flux_per_node(self):
        det = DetectionModel(efficiency=0.3, shot_noise=True, seed=5)
        config = chain(120.0, 40.0, detection=det)
        trace = run_chain(config, SIN2, SamplingGrid(dt_s=0.5, duration_s=1000.0))
        for node in range(2):
            x = trace.node_input(node)
            err = np.max(
                np.abs(trace.n_transmitted[:, node] + trace.n_reflected[:, node] - x)
            )
            assert err <= 1e-15

    def test_output_never_exceeds_input(self):
        trace = run_chain(chain(120.0, 40.0), SIN2, SamplingGrid(dt_s=0.5, duration_s=1000.0))
        assert np.all(trace.n_transmitted[:, 1] <= trace.n_in + 1e-15)
        assert np.all(trace.n_transmitted[:, 0] <= trace.n_in + 1e-15)

    def test_short_run_flagged(self):
        trace = run_chain(chain(120.0), SIN2, SamplingGrid(dt_s=0.5, duration_s=500.0))
        assert not trace.steady_state_reached
        assert trace.warnings

    def test_misaligned_exposure_rejected(self):
        with pytest.raises(ValueError, match="integer multiple"):
            run_chain(chain(120.0, exposure=4.0), SIN2, SamplingGrid(dt_s=0.3, duration_s=900.0))

    def test_backend_selection(self):
        trace = run_chain(chain(40.0), SIN2, SamplingGrid(dt_s=1.0, duration_s=900.0),
                          backend="python")
        assert trace.backend == "python"
        with pytest.raises(ValueError):
            run_chain(chain(40.0), SIN2, SamplingGrid(dt_s=1.0, duration_s=900.0),
                      backend="fortran")

    def test_per_node_detection_models(self):
        # one noisy node and one exact node in the same cascade
        dets = (
            DetectionModel(efficiency=0.2, shot_noise=True, seed=9),
            DetectionModel(efficiency=1.0, shot_noise=False),
        )
        config = ChainConfig(
            nodes=(MemristorParams(120.0, 4.0), MemristorParams(40.0, 4.0)),
            detection=dets,
        )
        grid = SamplingGrid(dt_s=0.5, duration_s=1000.0)
        trace = run_chain(config, SIN2, grid)
        noisy = run_chain(
            ChainConfig(nodes=config.nodes, detection=dets[0]), SIN2, grid
        )
        exact = run_chain(
            ChainConfig(nodes=config.nodes, detection=dets[1]), SIN2, grid
        )
        # node 2 of the mixed cascade is fed by the noisy node 1 but forms
        # exact estimates, so it matches neither pure configuration
        assert np.array_equal(trace.reflectivity[:, 0], noisy.reflectivity[:, 0])
        assert not np.array_equal(trace.reflectivity[:, 1], noisy.reflectivity[:, 1])
        assert not np.array_equal(trace.reflectivity[:, 1], exact.reflectivity[:, 1])
        assert np.all(trace.reflectivity >= 0.0) and np.all(trace.reflectivity <= 1.0)

    def test_growing_window_warmup_in_chain(self):
        from qmemsim.memristor import InitPolicy

        nodes = (
            MemristorParams(40.0, 4.0, init_policy=InitPolicy.GROWING_WINDOW),
        )
        drive = SignalSpec(Waveform.CONSTANT, period_s=40.0, level=1.0)
        trace = run_chain(ChainConfig(nodes=nodes), drive, SamplingGrid(dt_s=1.0, duration_s=200.0))
        # neutral start, then the first estimate alone sets the mean
        assert trace.reflectivity[0, 0] == 0.5
        assert trace.reflectivity[4, 0] == 1.0  # first boundary after 4 steps
        assert trace.reflectivity[-1, 0] == 1.0

    def test_determinism_same_seed(self):
        det = DetectionModel(efficiency=0.1, shot_noise=True, seed=21)
        grid = SamplingGrid(dt_s=0.5, duration_s=900.0)
        a = run_chain(chain(120.0, detection=det), SIN2, grid)
        b = run_chain(chain(120.0, detection=det), SIN2, grid)
        assert np.array_equal(a.reflectivity, b.reflectivity)
        det2 = DetectionModel(efficiency=0.1, shot_noise=True, seed=22)
        c = run_chain(chain(120.0, detection=det2), SIN2, grid)
        assert not np.array_equal(a.reflectivity, c.reflectivity)


class TestLoops:
    def test_insufficient_data_reports_requirement(self):
        trace = run_chain(chain(120.0), SIN2, SamplingGrid(dt_s=0.5, duration_s=600.0))
        with pytest.raises(InsufficientDataError, match="need at least"):
            extract_loop(trace, T_OSC)

    def test_loop_closes_on_drive_phase(self):
        trace = run_chain(chain(120.0), SIN2, SamplingGrid(dt_s=0.5, duration_s=1300.0))
        loop = extract_loop(trace, T_OSC)
        assert loop.n_samples == int(T_OSC / 0.5) + 1
        assert abs(loop.n_in[0] - loop.n_in[-1]) < 1e-9

    def test_linear_regime_loop_is_degenerate(self):
        trace = run_chain(chain(T_OSC), SIN2, SamplingGrid(dt_s=0.5, duration_s=1300.0))
        loop = extract_loop(trace, T_OSC)
        assert loop.area <= 1e-6
        report = pinch_check(loop)
        assert report.peak_gap <= 1e-6
        assert report.origin_pinched

    def test_open_loop_regime(self):
        trace = run_chain(chain(120.0), SIN2, SamplingGrid(dt_s=0.5, duration_s=1300.0))
        loop = extract_loop(trace, T_OSC)
        assert loop.area > 0.1
        report = pinch_check(loop)
        assert report.origin_pinched
        assert all(v == 0.0 for v in report.origin_outputs)
        assert report.peak_gap > 0.0
        assert report.peak_population == pytest.approx(1.0, abs=1e-12)

    def test_node_selection(self):
        trace = run_chain(chain(120.0, 40.0), SIN2, SamplingGrid(dt_s=0.5, duration_s=1300.0))
        first = extract_loop(trace, T_OSC, node_output=0)
        last = extract_loop(trace, T_OSC, node_output=-1)
        assert last.node_index == 1
        assert np.all(last.n_out <= first.n_out + 1e-15)


class TestLoopAreas:
    def test_square(self):
        x = np.array([0.0, 1.0, 1.0, 0.0, 0.0])
        y = np.array([0.0, 0.0, 1.0, 1.0, 0.0])
        signed, lobes = loop_areas(x, y)
        assert signed == pytest.approx(1.0)
        assert lobes == pytest.approx(1.0)

    def test_orientation_sign(self):
        x = np.array([0.0, 0.0, 1.0, 1.0, 0.0])
        y = np.array([0.0, 1.0, 1.0, 0.0, 0.0])
        signed, lobes = loop_areas(x, y)
        assert signed == pytest.approx(-1.0)
        assert lobes == pytest.approx(1.0)

    def test_figure_eight_lobes_do_not_cancel(self):
        # bow tie: two 0.25 triangles of opposite orientation
        x = np.array([0.0, 1.0, 1.0, 0.0, 0.0])
        y = np.array([0.0, 1.0, 0.0, 1.0, 0.0])
        signed, lobes = loop_areas(x, y)
        assert abs(signed) < 1e-12
        assert lobes == pytest.approx(0.5, abs=1e-12)

    def test_degenerate_flat_polyline(self):
        x = np.linspace(0.0, 1.0, 50)
        y = 0.5 * x
        xs = np.concatenate([x, x[::-1]])
        ys = np.concatenate([y, y[::-1] + 1e-16])
        signed, lobes = loop_areas(xs, ys)
        assert abs(signed) < 1e-12
        assert lobes < 1e-12


class TestSweep:
    def test_regime_ordering(self):
        base = chain(120.0, exposure=4.0)
        grid = SamplingGrid(dt_s=2.0, duration_s=1300.0)
        results = sweep_windows(base, [4.0, 120.0, 400.0], SIN2, grid)
        areas = {r.config_id: r.area for r in results}
        assert areas[1] > areas[0]
        assert areas[1] > areas[2]

    def test_staircase_profile_builds_longer_chain(self):
        base = chain(120.0, exposure=4.0)
        grid = SamplingGrid(dt_s=2.0, duration_s=1600.0)
        profile = tuple(0.1 * k * T_OSC for k in range(1, 10))
        results = sweep_windows(base, [profile], SIN2, grid)
        assert results[0].windows_s == profile
        assert 0.0 < results[0].area <= 0.5

    def test_per_node_replacement(self):
        base = chain(120.0, 120.0, exposure=4.0)
        grid = SamplingGrid(dt_s=2.0, duration_s=1300.0)
        results = sweep_windows(base, [(120.0, 40.0)], SIN2, grid)
        assert results[0].windows_s == (120.0, 40.0)


class TestSeriesParallel:
    def test_transparent_chain(self):
        res = series_parallel_equivalence([0.0], SourceModel(0.5, 1.0, 1.0), 0.0)
        assert res.max_abs_diff <= 1e-12

    def test_single_memristor(self):
        res = series_parallel_equivalence([0.5], SourceModel(0.5, 1.0, 1.0), 0.0)
        assert res.max_abs_diff <= 1e-12

    def test_double_memristor(self):
        res = series_parallel_equivalence([0.3, 0.6], SourceModel(0.8, 1.0, 1.0), 0.9)
        assert res.max_abs_diff <= 1e-12

    def test_imperfect_source_still_equivalent(self):
        res = series_parallel_equivalence([0.4], SourceModel(0.6, 0.9, 0.8), 1.3, eta=0.7)
        assert res.max_abs_diff <= 1e-12

    def test_probabilities_are_normalized(self):
        res = series_parallel_equivalence([0.5], SourceModel(0.5, 1.0, 1.0), 0.3)
        assert sum(res.prob_series.values()) == pytest.approx(1.0, abs=1e-12)
        assert sum(res.prob_parallel.values()) == pytest.approx(1.0, abs=1e-12)

    def test_long_chain_rejected(self):
        with pytest.raises(ValueError):
            series_parallel_equivalence([0.1, 0.2, 0.3], SourceModel(0.5), 0.0)


class TestChainConfig:
    def test_needs_nodes(self):
        with pytest.raises(ValueError):
            ChainConfig(nodes=())

    def test_per_node_detection_length(self):
        det = DetectionModel()
        with pytest.raises(ValueError):
            ChainConfig(nodes=(MemristorParams(10.0, 1.0),), detection=(det, det))

    def test_max_window(self):
        cfg = chain(120.0, 360.0)
        assert cfg.max_window == 360.0
