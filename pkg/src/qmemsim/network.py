"""Memristor chains: simulation runs, hysteresis loops, equivalence checks.

A chain feeds each node's transmitted mean photon number into the next node;
every node runs its own feedback from its own reflected arm only, so the
composition is purely feed-forward. Traces are per-step records of the
drive, the reflectivities in force and both output arms of every node.
Hysteresis loops are the parametric (input, output) curves over one
steady-state drive period; their area, the memory proxy, is reported as the
sum of absolute lobe areas so that pinched figure-eight loops do not
self-cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import fock
from ._kernels import DEFAULT_BACKEND, get_kernel
from .memristor import DetectionModel, InitPolicy, MemristorParams
from .signals import SamplingGrid, SignalSpec, sample_array

__all__ = [
    "ChainConfig",
    "Trace",
    "HysteresisLoop",
    "PinchReport",
    "SweepResult",
    "EquivalenceResult",
    "InsufficientDataError",
    "run_chain",
    "extract_loop",
    "pinch_check",
    "sweep_windows",
    "series_parallel_equivalence",
    "loop_areas",
]


class InsufficientDataError(ValueError):
    """The trace does not contain enough steady-state data."""


@dataclass(frozen=True)
class ChainConfig:
    """An ordered cascade of memristors with a shared or per-node detection
    model."""

    nodes: tuple[MemristorParams, ...]
    detection: Union[DetectionModel, tuple[DetectionModel, ...]] = DetectionModel()

    def __post_init__(self):
        if len(self.nodes) < 1:
            raise ValueError("chain needs at least one node")
        if isinstance(self.detection, tuple) and len(self.detection) != len(self.nodes):
            raise ValueError("per-node detection list must match the number of nodes")

    def node_detection(self, i: int) -> DetectionModel:
        if isinstance(self.detection, tuple):
            return self.detection[i]
        return self.detection

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def max_window(self) -> float:
        return max(p.integration_window_s for p in self.nodes)


@dataclass(frozen=True)
class Trace:
    """Per-step chain record. ``t`` holds step start times; ``n_in`` is the
    drive entering node 1 at those times; the 2D arrays are indexed
    [step, node]."""

    t: np.ndarray
    n_in: np.ndarray
    reflectivity: np.ndarray
    n_reflected: np.ndarray
    n_transmitted: np.ndarray
    dt: float
    drive_period: float
    max_window: float
    steady_state_reached: bool
    backend: str
    warnings: tuple[str, ...] = ()

    @property
    def n_steps(self) -> int:
        return self.t.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.reflectivity.shape[1]

    def node_input(self, node: int) -> np.ndarray:
        """Input population seen by a node: the drive for node 0, the
        upstream transmitted arm otherwise."""
        if node == 0:
            return self.n_in
        return self.n_transmitted[:, node - 1]


@dataclass(frozen=True)
class HysteresisLoop:
    """One steady-state drive period of (input, output) pairs. ``area`` is
    the sum of absolute lobe areas (self-intersections split the polygon);
    ``area_signed`` is the raw shoelace value, in which opposite lobes of a
    pinched loop cancel."""

    n_in: np.ndarray
    n_out: np.ndarray
    drive_period: float
    node_index: int
    area: float
    area_signed: float

    def __post_init__(self):
        # output <= input <= 1 confines the loop to a triangle of area 0.5;
        # the window-mean feedback reaches ~0.27 at T = 0.3 * period
        if abs(self.area) > 0.5 + 1e-9:
            raise ValueError(
                f"loop area {self.area} exceeds the 0.5 bound for unit drives"
            )

    @property
    def n_samples(self) -> int:
        return self.n_in.shape[0]


@dataclass(frozen=True)
class PinchReport:
    origin_population: float
    origin_outputs: tuple[float, ...]
    origin_pinched: bool
    peak_population: float
    peak_gap: float


@dataclass(frozen=True)
class SweepResult:
    config_id: int
    windows_s: tuple[float, ...]
    area: float
    loop: HysteresisLoop


@dataclass(frozen=True)
class EquivalenceResult:
    prob_series: dict
    prob_parallel: dict
    max_abs_diff: float


def _steps_per_exposure(params: MemristorParams, dt: float, node: int) -> int:
    m = int(round(params.exposure_s / dt))
    if m < 1 or abs(m * dt - params.exposure_s) > 1e-9 * max(params.exposure_s, 1.0):
        raise ValueError(
            f"node {node}: exposure_s={params.exposure_s} is not an integer "
            f"multiple of dt={dt}"
        )
    return m


def run_chain(
    config: ChainConfig,
    drive: SignalSpec,
    grid: SamplingGrid,
    backend: str | None = None,
) -> Trace:
    """Simulate the chain against the drive over the grid.

    The drive that is split at each step is its value at the step start, so
    trace samples touch the drive's exact extremes on aligned grids. The
    exposure estimates accumulate the drive at step midpoints, which keeps
    the discrete window average within O(dt^2) of the continuous one; the
    downstream nodes see piecewise-constant inputs for which the step value
    is already exact.
    """
    dt = grid.dt_s
    n_nodes = config.n_nodes
    n_steps = int(math.floor(grid.duration_s / dt + 1e-9))
    if n_steps < 1:
        raise ValueError("grid shorter than one step")

    m_arr = np.empty(n_nodes, dtype=np.int64)
    w_arr = np.empty(n_nodes, dtype=np.int64)
    lat_arr = np.empty(n_nodes, dtype=np.int64)
    init_r = np.full(n_nodes, 0.5)
    prefill = np.zeros(n_nodes, dtype=np.uint8)
    noise_flags = np.zeros(n_nodes, dtype=np.uint8)
    combined_flags = np.zeros(n_nodes, dtype=np.uint8)
    eta = np.empty(n_nodes)
    trials = np.empty(n_nodes, dtype=np.int64)
    budget = np.empty(n_nodes)
    rngs = []
    for i, params in enumerate(config.nodes):
        det = config.node_detection(i)
        m_arr[i] = _steps_per_exposure(params, dt, i)
        w_arr[i] = params.window_len
        lat_arr[i] = max(0, int(math.ceil(params.latency_s / dt - 1e-9)))
        prefill[i] = 1 if params.init_policy is InitPolicy.NEUTRAL_HALF else 0
        noise_flags[i] = 1 if det.shot_noise else 0
        combined_flags[i] = 1 if det.combined_estimator else 0
        eta[i] = det.efficiency
        trials[i] = det.trials(params.exposure_s)
        budget[i] = det.pulse_rate_hz * params.exposure_s
        rngs.append(np.random.default_rng([det.seed, i]))

    times = grid.origin_s + dt * np.arange(n_steps)
    drive_split = np.ascontiguousarray(sample_array(drive, times))
    drive_acc = np.ascontiguousarray(sample_array(drive, times + dt / 2.0))

    out_r = np.empty((n_steps, n_nodes))
    out_refl = np.empty((n_steps, n_nodes))
    out_trans = np.empty((n_steps, n_nodes))

    name = backend or DEFAULT_BACKEND
    kernel = get_kernel(name)
    kernel.run_chain_steps(
        drive_split,
        drive_acc,
        m_arr,
        w_arr,
        lat_arr,
        init_r,
        prefill,
        noise_flags,
        combined_flags,
        eta,
        trials,
        budget,
        rngs,
        out_r,
        out_refl,
        out_trans,
    )

    period = drive.period_s
    needed = config.max_window + 2.0 * period
    notes = []
    reached = grid.duration_s + 1e-9 >= needed
    if not reached:
        notes.append(
            f"duration {grid.duration_s}s is below window + two periods "
            f"({needed}s); loops may not be steady-state"
        )
    for arr in (times, drive_split, out_r, out_refl, out_trans):
        arr.setflags(write=False)
    return Trace(
        t=times,
        n_in=drive_split,
        reflectivity=out_r,
        n_reflected=out_refl,
        n_transmitted=out_trans,
        dt=dt,
        drive_period=period,
        max_window=config.max_window,
        steady_state_reached=reached,
        backend=name,
        warnings=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Hysteresis loops
# ---------------------------------------------------------------------------


def extract_loop(trace: Trace, drive_period: float, node_output: int = -1) -> HysteresisLoop:
    """Final full drive period of (chain input, selected node's transmitted
    output), with its loop area. Requires the trace to hold at least the
    longest window plus two periods so the extracted period is steady."""
    dt = trace.dt
    ppp = int(round(drive_period / dt))
    if ppp < 4 or abs(ppp * dt - drive_period) > 1e-6 * drive_period:
        raise ValueError(
            f"drive period {drive_period} is not resolved by dt={dt}"
        )
    node = node_output % trace.n_nodes
    start = trace.n_steps - 1 - ppp
    min_duration = trace.max_window + 2.0 * drive_period + dt
    if start < 0 or start * dt + 1e-9 < trace.max_window + drive_period:
        raise InsufficientDataError(
            f"need at least {min_duration}s of trace for a steady-state loop, "
            f"got {trace.n_steps * dt}s"
        )
    x = np.array(trace.n_in[start : start + ppp + 1])
    y = np.array(trace.n_transmitted[start : start + ppp + 1, node])
    signed, lobes = loop_areas(x, y)
    return HysteresisLoop(
        n_in=x,
        n_out=y,
        drive_period=drive_period,
        node_index=node,
        area=lobes,
        area_signed=signed,
    )


def loop_areas(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Signed shoelace area of the closed parametric curve and the sum of
    absolute lobe areas after splitting at self-intersections."""
    pts = np.column_stack([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])
    if len(pts) > 1 and np.all(np.abs(pts[0] - pts[-1]) < 1e-12):
        pts = pts[:-1]
    signed = _shoelace(pts)
    lobes = _abs_lobe_area(pts, depth=0)
    return signed, lobes


def _shoelace(pts: np.ndarray) -> float:
    if len(pts) < 3:
        return 0.0
    x = pts[:, 0]
    y = pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _abs_lobe_area(pts: np.ndarray, depth: int) -> float:
    if len(pts) < 3:
        return 0.0
    if depth > 32:
        return abs(_shoelace(pts))
    hit = _first_self_intersection(pts)
    if hit is None:
        return abs(_shoelace(pts))
    i, j, px, py = hit
    cross_pt = np.array([[px, py]])
    lobe = np.vstack([cross_pt, pts[i + 1 : j + 1]])
    rest = np.vstack([pts[: i + 1], cross_pt, pts[j + 1 :]])
    return _abs_lobe_area(lobe, depth + 1) + _abs_lobe_area(rest, depth + 1)


def _first_self_intersection(pts: np.ndarray):
    """First pair of non-adjacent segments of the closed polygon that cross
    transversally. Near-parallel grazing contacts (coincident branches of a
    degenerate loop) are ignored via a relative cross-product threshold."""
    n = len(pts)
    if n < 4:
        return None
    nxt = np.roll(pts, -1, axis=0)
    d = nxt - pts  # segment vectors
    seg_len = np.sqrt(np.sum(d * d, axis=1))
    for i in range(n - 2):
        j0 = i + 2
        j1 = n if i > 0 else n - 1  # segment (n-1, 0) is adjacent to segment 0
        if j0 >= j1:
            continue
        js = np.arange(j0, j1)
        p, q = pts[i], d[i]
        rel_a = pts[js] - p
        rel_b = nxt[js] - p
        d1 = q[0] * rel_a[:, 1] - q[1] * rel_a[:, 0]
        d2 = q[0] * rel_b[:, 1] - q[1] * rel_b[:, 0]
        rel_c = p - pts[js]
        rel_e = (p + q) - pts[js]
        d3 = d[js, 0] * rel_c[:, 1] - d[js, 1] * rel_c[:, 0]
        d4 = d[js, 0] * rel_e[:, 1] - d[js, 1] * rel_e[:, 0]
        eps = 1e-9 * seg_len[i] * seg_len[js] + 1e-30
        crossing = (
            (np.minimum(d1, d2) < -eps)
            & (np.maximum(d1, d2) > eps)
            & (np.minimum(d3, d4) < -eps)
            & (np.maximum(d3, d4) > eps)
        )
        idx = np.nonzero(crossing)[0]
        if idx.size:
            k = int(js[idx[0]])
            denom = d1[idx[0]] - d2[idx[0]]
            t = d1[idx[0]] / denom
            px = pts[k, 0] + t * d[k, 0]
            py = pts[k, 1] + t * d[k, 1]
            return i, k, float(px), float(py)
    return None


def pinch_check(loop: HysteresisLoop) -> PinchReport:
    """Verify the multiplicative pinch at zero input and measure the branch
    gap just below the drive peak.

    The output is reflectivity times input, so every sample at zero input
    must sit at exactly zero output. At the peak the two branches merge in
    a single turning sample; the reported gap interpolates the approaching
    and departing branches at the largest sampled population below the
    peak, which is where an open loop shows its spread.
    """
    x = loop.n_in
    y = loop.n_out
    xmin = float(np.min(x))
    at_min = np.nonzero(x == xmin)[0]
    origin_outputs = tuple(float(y[k]) for k in at_min)
    pinched = xmin == 0.0 and all(v == 0.0 for v in origin_outputs)

    imax = int(np.argmax(x))
    xmax = float(x[imax])
    if imax == 0 or imax == len(x) - 1:
        gap = 0.0
    else:
        x_eval = min(float(x[imax - 1]), float(x[imax + 1]))
        y_up = _interp_on_segment(x_eval, x[imax - 1], y[imax - 1], x[imax], y[imax])
        y_down = _interp_on_segment(x_eval, x[imax + 1], y[imax + 1], x[imax], y[imax])
        gap = abs(y_up - y_down)
    return PinchReport(
        origin_population=xmin,
        origin_outputs=origin_outputs,
        origin_pinched=pinched,
        peak_population=xmax,
        peak_gap=gap,
    )


def _interp_on_segment(x_eval, x0, y0, x1, y1) -> float:
    if x1 == x0:
        return float(y0)
    t = (x_eval - x0) / (x1 - x0)
    return float(y0 + t * (y1 - y0))


def sweep_windows(
    base: ChainConfig,
    windows: Sequence[Union[float, Sequence[float]]],
    drive: SignalSpec,
    grid: SamplingGrid,
    backend: str | None = None,
    node_output: int = -1,
) -> list[SweepResult]:
    """Loop area per integration-window configuration.

    Each entry is either one window applied to every node of the base
    chain, or a sequence of windows defining a chain of that length (nodes
    templated on the base chain's first node), which covers heterogeneous
    staircase profiles like T_k = k * f * period.
    """
    results = []
    for cid, entry in enumerate(windows):
        if isinstance(entry, (int, float)):
            profile = tuple(float(entry) for _ in base.nodes)
            nodes = tuple(
                _with_window(p, float(entry)) for p in base.nodes
            )
        else:
            profile = tuple(float(w) for w in entry)
            if len(profile) == len(base.nodes):
                nodes = tuple(
                    _with_window(p, w) for p, w in zip(base.nodes, profile)
                )
            else:
                template = base.nodes[0]
                nodes = tuple(_with_window(template, w) for w in profile)
        det = base.detection
        if isinstance(det, tuple) and len(det) != len(nodes):
            det = det[0]
        config = ChainConfig(nodes=nodes, detection=det)
        trace = run_chain(config, drive, grid, backend=backend)
        loop = extract_loop(trace, drive.period_s, node_output=node_output)
        results.append(SweepResult(cid, profile, loop.area, loop))
    return results


def _with_window(params: MemristorParams, window_s: float) -> MemristorParams:
    return MemristorParams(
        integration_window_s=window_s,
        exposure_s=params.exposure_s,
        latency_s=params.latency_s,
        init_policy=params.init_policy,
    )


# ---------------------------------------------------------------------------
# Series (time-bin) versus parallel (spatial) equivalence
# ---------------------------------------------------------------------------

_LONG_ARM = 1
_SHORT_ARM = 2


def _route_correctly(state):
    """Correct-routing-conditioned first splitter of the unbalanced
    interferometer: the early pulse mode is sent to the delay arm and the
    late pulse mode to the direct arm, each as a whole wavepacket (vacuum
    component included), at unit weight. Conditioning this way divides out
    the routing probability coherently, which is what makes the time-bin
    chain reproduce the parallel-rail layout exactly."""

    def sub(m: fock.ModeLabel):
        if m.spatial == fock.RAIL and m.time_bin == 0:
            return [(1.0, fock.ModeLabel(_LONG_ARM, 0, m.internal))]
        if m.spatial == fock.RAIL and m.time_bin == 1:
            return [(1.0, fock.ModeLabel(_SHORT_ARM, 1, m.internal))]
        return [(1.0, m)]

    components = [
        (w, fock.apply_substitution(k, sub)) for w, k in fock._components(state)
    ]
    return fock.MixedState(components)


def series_parallel_equivalence(
    reflectivities: Sequence[float],
    source,
    mzi_phase: float,
    eta: float = 1.0,
) -> EquivalenceResult:
    """Compare the time-bin layout (two consecutive pulses through one
    chain snapshot, then the delay-unbalanced interferometer, conditioned
    on correct routing) against the spatial layout (two parallel copies of
    the chain, one pulse each, then a balanced splitter).

    Returns the joint click/no-click distributions over the two output
    detectors at the interference bin and their maximum absolute
    difference.
    """
    n = len(reflectivities)
    if n not in (0, 1, 2):
        raise ValueError("equivalence check supports chains of length 0, 1 or 2")

    # series: both pulses on the source rail, one chain, router, delay, splitter
    state = fock.prepare_two_pulse_source(source, mzi_phase)
    for i, r in enumerate(reflectivities):
        state = fock.apply_element(state, fock.MemristorTap(fock.RAIL, 10 + i, r))
    state = _route_correctly(state)
    state = fock.apply_element(state, fock.Delay(_LONG_ARM, 1))
    state = fock.apply_element(state, fock.BeamSplitter(_LONG_ARM, _SHORT_ARM, 0.5))
    detectors = [(_LONG_ARM, 1), (_SHORT_ARM, 1)]
    dist_series = fock.joint_click_distribution(state, detectors, eta)

    # parallel: one pulse per rail, a chain copy per rail, align, splitter
    state_p = fock.prepare_two_pulse_source(
        source, mzi_phase, rails=(_LONG_ARM, _SHORT_ARM)
    )
    for i, r in enumerate(reflectivities):
        state_p = fock.apply_element(state_p, fock.MemristorTap(_LONG_ARM, 20 + i, r))
        state_p = fock.apply_element(state_p, fock.MemristorTap(_SHORT_ARM, 30 + i, r))
    state_p = fock.apply_element(state_p, fock.Delay(_LONG_ARM, 1))
    state_p = fock.apply_element(state_p, fock.BeamSplitter(_LONG_ARM, _SHORT_ARM, 0.5))
    dist_parallel = fock.joint_click_distribution(state_p, detectors, eta)

    keys = set(dist_series) | set(dist_parallel)
    diff = max(abs(dist_series.get(k, 0.0) - dist_parallel.get(k, 0.0)) for k in keys)
    return EquivalenceResult(dist_series, dist_parallel, diff)
