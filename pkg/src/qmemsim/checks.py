"""Built-in verification suites.

Each check pins one falsifiable property of the implementation at a fixed
tolerance: the asymptotic device regimes, exact flux accounting, the
window-average identity, enumeration versus the closed-form interference
probabilities and visibilities, the loss-limit law, the purity fit
round-trip, hysteresis structure, series/parallel equivalence, visibility
hysteresis, and byte-level run reproducibility. The same functions back the
``qmemsim check`` command and the acceptance test suite.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fock, homodyne, network
from .homodyne import SourceModel, VisibilityCurve, fit_purity, visibility_realistic
from .memristor import DetectionModel, MemristorParams
from .network import ChainConfig
from .runners import run_scenario
from .scenario import scenario_from_dict
from .signals import SamplingGrid, SignalSpec, Waveform

__all__ = ["CheckResult", "SUITES", "run_suite", "all_checks"]

T_OSC = 400.0
TAU = 4.0

DRIVE = SignalSpec(Waveform.SIN_SQUARED, period_s=T_OSC)

BETA_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
R_GRID = (0.0, 0.3, 0.7)
PHI_GRID = (0.0, math.pi / 2, math.pi)


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    measured: str
    requirement: str
    details: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.criterion}: {self.name} | {self.measured} | requires {self.requirement}"


def _single_chain(window_s: float, exposure_s: float = TAU) -> ChainConfig:
    return ChainConfig(nodes=(MemristorParams(window_s, exposure_s),))


def check_quadratic_regime(backend=None) -> CheckResult:
    """Short-window limit: output collapses onto input - input**2."""
    t_window = 0.01 * T_OSC
    dt = t_window / 10.0
    started = time.perf_counter()
    config = _single_chain(t_window, exposure_s=dt)
    grid = SamplingGrid(dt_s=dt, duration_s=t_window + 2.0 * T_OSC + 2.0)
    trace = network.run_chain(config, DRIVE, grid, backend=backend)
    loop = network.extract_loop(trace, T_OSC)
    err = float(np.max(np.abs(loop.n_out - (loop.n_in - loop.n_in**2))))
    elapsed = time.perf_counter() - started
    passed = err <= 0.02 and elapsed < 1.0
    return CheckResult(
        1,
        "quadratic regime n_out ~ n_in - n_in^2 at T = 0.01 T_osc",
        passed,
        f"max pointwise error {err:.3e}, runtime {elapsed:.2f}s",
        "error <= 0.02 and runtime < 1 s",
    )


def check_linear_regime(backend=None) -> CheckResult:
    """Full-period window: constant R = 0.5 and n_out = 0.5 n_in."""
    started = time.perf_counter()
    config = _single_chain(T_OSC)
    dt = 0.4
    grid = SamplingGrid(dt_s=dt, duration_s=2.5 * T_OSC)
    trace = network.run_chain(config, DRIVE, grid, backend=backend)
    after = trace.t >= T_OSC
    r_err = float(np.max(np.abs(trace.reflectivity[after, 0] - 0.5)))
    out_err = float(np.max(np.abs(trace.n_transmitted[after, 0] - 0.5 * trace.n_in[after])))
    elapsed = time.perf_counter() - started
    passed = r_err <= 1e-12 and out_err <= 1e-12 and elapsed < 1.0
    return CheckResult(
        2,
        "linear regime R = 0.5, n_out = 0.5 n_in at T = T_osc",
        passed,
        f"|R-0.5| {r_err:.2e}, |n_out-0.5 n_in| {out_err:.2e}, runtime {elapsed:.2f}s",
        "both <= 1e-12 and runtime < 1 s",
    )


def check_flux_conservation(backend=None) -> CheckResult:
    """transmitted + reflected equals the node input at every step."""
    config = ChainConfig(
        nodes=(MemristorParams(0.3 * T_OSC, TAU), MemristorParams(0.1 * T_OSC, TAU)),
        detection=DetectionModel(efficiency=0.1275, shot_noise=True, seed=11),
    )
    dt = 0.008
    grid = SamplingGrid(dt_s=dt, duration_s=800.0)  # 1e5 steps
    trace = network.run_chain(config, DRIVE, grid, backend=backend)
    worst = 0.0
    for node in range(trace.n_nodes):
        x = trace.node_input(node)
        err = np.max(np.abs(trace.n_transmitted[:, node] + trace.n_reflected[:, node] - x))
        worst = max(worst, float(err))
    passed = worst <= 1e-15 and trace.n_steps == 100000
    return CheckResult(
        3,
        "flux conservation over a 1e5-step noisy cascade",
        passed,
        f"{trace.n_steps} steps, max |n_trans + n_refl - n_in| = {worst:.2e}",
        "<= 1e-15 at every node",
    )


def check_moving_average(backend=None) -> CheckResult:
    """Window mean identity against the analytic sliding average of sin^2."""
    t_window = 0.3 * T_OSC
    dt = TAU / 100.0
    config = _single_chain(t_window)
    grid = SamplingGrid(dt_s=dt, duration_s=720.0)
    trace = network.run_chain(config, DRIVE, grid, backend=backend)
    m = int(round(TAU / dt))
    worst = 0.0

    def closed_mean(t):
        return 0.5 - (T_OSC / (2 * math.pi * t_window)) * math.sin(
            math.pi * t_window / T_OSC
        ) * math.cos(math.pi * (2 * t - t_window) / T_OSC)

    for b in range(1, trace.n_steps // m):
        t_b = b * m * dt
        if t_b < t_window - 1e-9:
            continue  # window still contains warm-up fill
        step_idx = b * m
        if step_idx >= trace.n_steps:
            break
        worst = max(worst, abs(float(trace.reflectivity[step_idx, 0]) - closed_mean(t_b)))
    passed = worst <= 1e-6
    return CheckResult(
        4,
        "moving-average identity vs closed-form windowed mean",
        passed,
        f"max |R - closed form| = {worst:.2e} at dt = tau/100",
        "<= 1e-6",
    )


def _p_click_closed(beta_sq: float, r: float, phi: float) -> float:
    t = 1.0 - r
    return (
        (1.0 - beta_sq) * beta_sq * t * math.sin(phi / 2.0) ** 2
        + beta_sq**2 * r * t / 2.0
        + 0.375 * beta_sq**2 * t * t
    )


def check_oracle_click_probability(backend=None) -> CheckResult:
    """Enumeration vs the closed-form interference-bin click probability."""
    worst = 0.0
    for b in BETA_GRID:
        for r in R_GRID:
            for phi in PHI_GRID:
                p = fock.two_pulse_pipeline(SourceModel(b), [r], phi, 1.0)[(1, 1)]
                worst = max(worst, abs(p - _p_click_closed(b, r, phi)))
    spot = fock.two_pulse_pipeline(SourceModel(1.0), [0.5], 0.0, 1.0)[(1, 1)]
    spot_err = abs(spot - 0.21875)
    passed = worst <= 1e-9 and spot_err <= 1e-9
    return CheckResult(
        5,
        "enumeration vs closed-form click probability",
        passed,
        f"grid max |diff| = {worst:.2e}; spot value {spot!r} (err {spot_err:.2e})",
        "<= 1e-9 incl. spot value 0.21875",
    )


def check_oracle_visibility(backend=None) -> CheckResult:
    """Enumeration vs closed-form visibilities, single and double, plus
    invariance under re-splitting the two transmissivities."""
    worst = 0.0
    for b in BETA_GRID:
        for r in R_GRID:
            t = 1.0 - r
            ve = visibility_realistic(SourceModel(b), t, 1.0)
            worst = max(worst, abs(ve - homodyne.visibility_single(b, t)))
    worst_double = 0.0
    for b in BETA_GRID:
        for r1, r2 in ((0.0, 0.3), (0.3, 0.7), (0.7, 0.0)):
            t1, t2 = 1.0 - r1, 1.0 - r2
            p_max = fock.two_pulse_pipeline(SourceModel(b), [r1, r2], math.pi, 1.0)[(1, 1)]
            p_min = fock.two_pulse_pipeline(SourceModel(b), [r1, r2], 0.0, 1.0)[(1, 1)]
            ve = (p_max - p_min) / (p_max + p_min)
            worst_double = max(worst_double, abs(ve - homodyne.visibility_double(b, t1, t2)))
    worst_split = 0.0
    for b in (0.3, 0.6):
        product = 0.35
        splits = ((0.5, 0.7), (0.7, 0.5), (0.35, 1.0), (1.0, 0.35))
        values = [homodyne.visibility_double(b, t1, t2) for t1, t2 in splits]
        worst_split = max(worst_split, max(values) - min(values))
        for t1, t2 in splits:
            assert abs(t1 * t2 - product) < 1e-12
    passed = worst <= 1e-9 and worst_double <= 1e-9 and worst_split <= 1e-12
    return CheckResult(
        6,
        "enumeration vs closed-form visibilities",
        passed,
        f"single {worst:.2e}, double {worst_double:.2e}, re-split spread {worst_split:.2e}",
        "single/double <= 1e-9, re-split <= 1e-12",
    )


def check_loss_limit(backend=None) -> CheckResult:
    """Heavy-loss visibility collapses onto the line 1 - beta_sq."""
    bgrid = np.linspace(0.05, 0.95, 10)
    vis = [visibility_realistic(SourceModel(float(b)), 0.5, 1e-3) for b in bgrid]
    slope, intercept = np.polyfit(bgrid, vis, 1)
    passed = abs(slope + 1.0) <= 0.01 and abs(intercept - 1.0) <= 0.01
    return CheckResult(
        7,
        "loss-limit law visibility -> 1 - beta_sq at eta = 1e-3",
        passed,
        f"slope {slope:.6f}, intercept {intercept:.6f}",
        "slope -1 +- 0.01, intercept 1 +- 0.01",
    )


def check_purity_pipeline(backend=None) -> CheckResult:
    """Round-trip: synthesize noisy visibility curves, recover the purity."""
    purity, v_hom, sigma = 0.95, 0.915, 0.01
    beta = np.linspace(0.05, 0.95, 10)
    truth = purity**2 * math.sqrt(v_hom) * (1.0 - beta)
    ok = 0
    n_seeds = 100
    for seed in range(n_seeds):
        rng = np.random.default_rng(seed)
        noisy = truth + rng.normal(0.0, sigma, size=beta.size)
        curve = VisibilityCurve(
            tuple(beta.tolist()), tuple(noisy.tolist()), tuple([sigma] * beta.size)
        )
        fit = fit_purity(curve, v_hom)
        if abs(fit.purity - purity) <= 0.01:
            ok += 1
    passed = ok >= 95
    return CheckResult(
        8,
        "purity fit round-trip under visibility noise",
        passed,
        f"{ok}/{n_seeds} seeds recovered purity within 0.01",
        ">= 95 of 100 seeds",
    )


def check_hysteresis_structure(backend=None) -> CheckResult:
    """Loop area peaks between the asymptotic regimes; exact origin pinch."""
    dt = 0.4
    grid = SamplingGrid(dt_s=dt, duration_s=1600.0)
    areas = {}
    loops = {}
    for frac, exposure in ((0.01, dt), (0.3, TAU), (1.0, TAU)):
        config = _single_chain(frac * T_OSC, exposure_s=exposure)
        trace = network.run_chain(config, DRIVE, grid, backend=backend)
        loop = network.extract_loop(trace, T_OSC)
        areas[frac] = loop.area
        loops[frac] = loop
    pinch = network.pinch_check(loops[0.3])
    ordering = areas[0.3] > areas[0.01] and areas[0.3] > areas[1.0]
    passed = (
        ordering
        and pinch.origin_pinched
        and areas[1.0] <= 1e-6
        and all(v == 0.0 for v in pinch.origin_outputs)
    )
    return CheckResult(
        9,
        "hysteresis areas ordered across regimes with exact origin pinch",
        passed,
        (
            f"areas: T=0.01 {areas[0.01]:.4f}, T=0.3 {areas[0.3]:.4f}, "
            f"T=1.0 {areas[1.0]:.2e}; origin outputs {pinch.origin_outputs}"
        ),
        "area(0.3) strictly largest, linear area <= 1e-6, pinch exactly 0",
    )


def check_series_parallel(backend=None) -> CheckResult:
    """Conditioned time-bin layout equals the parallel-rail layout."""
    worst = 0.0
    for n_chain in (1, 2):
        for r in R_GRID:
            for b in (0.2, 0.5, 0.8):
                for phi in PHI_GRID:
                    res = network.series_parallel_equivalence(
                        [r] * n_chain, SourceModel(b), phi, eta=1.0
                    )
                    worst = max(worst, res.max_abs_diff)
    passed = worst <= 1e-12
    return CheckResult(
        10,
        "series/parallel equivalence of conditioned detection probabilities",
        passed,
        f"max |diff| over N in {{1,2}} grid = {worst:.2e}",
        "<= 1e-12",
    )


def check_visibility_hysteresis(backend=None) -> CheckResult:
    """Fringe visibility traces an open loop at eta = 1 that closes under
    loss; cascading narrows it."""
    grid = SamplingGrid(dt_s=TAU, duration_s=1200.0)

    def loop_series(n_nodes):
        config = ChainConfig(
            nodes=tuple(MemristorParams(0.3 * T_OSC, TAU) for _ in range(n_nodes))
        )
        trace = network.run_chain(config, DRIVE, grid, backend=backend)
        ppp = int(round(T_OSC / trace.dt))
        s = trace.n_steps - 1 - ppp
        b = np.array(trace.n_in[s : s + ppp + 1])
        t_net = np.ones_like(b)
        for k in range(n_nodes):
            t_net = t_net * (1.0 - trace.reflectivity[s : s + ppp + 1, k])
        return b, t_net

    src = SourceModel(0.0, 1.0, 1.0)
    b1, t1 = loop_series(1)
    width_ideal = homodyne.visibility_loop_width(b1, t1, src, 1.0)
    width_lossy = homodyne.visibility_loop_width(b1, t1, src, 1e-3)
    b2, t2 = loop_series(2)
    width_double = homodyne.visibility_loop_width(b2, t2, src, 1.0)
    passed = width_ideal > 0.0 and width_lossy < 1e-3 and width_double < width_ideal
    return CheckResult(
        11,
        "visibility hysteresis: open at eta = 1, closed under loss, narrower cascaded",
        passed,
        (
            f"width eta=1 {width_ideal:.4f}, eta=1e-3 {width_lossy:.2e}, "
            f"double {width_double:.4f}"
        ),
        "width(eta=1) > 0, width(1e-3) < 1e-3, double < single",
    )


def check_determinism(backend=None) -> CheckResult:
    """Identical scenario and seed give byte-identical CSV bodies."""
    scenario_dict = {
        "experiment": "single_memristor",
        "seed": 123,
        "signal": {"waveform": "sin_squared", "period_s": 400.0},
        "grid": {"dt_s": 2.0, "duration_s": 1300.0},
        "chain": {
            "nodes": [{"window_fraction": 0.3, "exposure_s": 4.0, "latency_s": 0.2}],
            "detection": {"efficiency": 0.1275, "shot_noise": True},
        },
    }
    identical = True
    compared = 0
    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for run_id in ("a", "b"):
            scn = scenario_from_dict(scenario_dict)
            out = Path(tmp) / run_id
            run_scenario(scn, out, backend=backend)
            outs.append(out)
        for f in sorted(outs[0].glob("*.csv")):
            other = outs[1] / f.name
            compared += 1
            if f.read_bytes() != other.read_bytes():
                identical = False
    passed = identical and compared >= 2
    return CheckResult(
        12,
        "byte-identical CSV bodies for repeated runs",
        passed,
        f"{compared} CSV files compared, identical: {identical}",
        "all CSV bodies byte-identical",
    )


ALL_CHECKS = (
    check_quadratic_regime,
    check_linear_regime,
    check_flux_conservation,
    check_moving_average,
    check_oracle_click_probability,
    check_oracle_visibility,
    check_loss_limit,
    check_purity_pipeline,
    check_hysteresis_structure,
    check_series_parallel,
    check_visibility_hysteresis,
    check_determinism,
)

SUITES: dict[str, tuple] = {
    "asymptotic": (check_quadratic_regime, check_linear_regime),
    "conservation": (check_flux_conservation,),
    "moving-average": (check_moving_average,),
    "oracle": (check_oracle_click_probability,),
    "visibility": (check_oracle_visibility, check_loss_limit),
    "purity": (check_purity_pipeline,),
    "hysteresis": (check_hysteresis_structure,),
    "series-parallel": (check_series_parallel,),
    "visibility-hysteresis": (check_visibility_hysteresis,),
    "determinism": (check_determinism,),
    "all": ALL_CHECKS,
}


def all_checks(backend=None) -> list[CheckResult]:
    return [fn(backend=backend) for fn in ALL_CHECKS]


def run_suite(name: str, backend=None) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}")
    return [fn(backend=backend) for fn in SUITES[name]]
