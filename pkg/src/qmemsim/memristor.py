"""Single quantum-memristor state machine.

The device is a beam splitter whose reflectivity tracks the sliding-window
average of the mean photon number it has seen: photon counts collected over
one exposure form one input estimate, the window keeps the estimates of the
last integration window, and the new reflectivity (the window mean, clamped
to [0, 1]) takes effect one feedback latency after the exposure boundary.
With the neutral starting point R = 0.5, a constant drive of 0.5 is the
fixed point and a drive averaging 0.5 over the window leaves the device
linear.
"""

from __future__ import annotations

import enum
import math
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InitPolicy",
    "MemristorParams",
    "DetectionModel",
    "MemristorState",
    "make_state",
    "step",
    "reflectivity_from_window",
    "estimate_input",
    "estimate_input_combined",
    "sample_counts",
    "R_FLOOR",
]

# Below this reflectivity the reflected-arm estimate would divide by an
# unusably small acceptance; the previous estimate is held instead.
R_FLOOR = 1e-3


class InitPolicy(enum.Enum):
    # window pre-filled with the neutral value 0.5 (the feedback fixed point)
    NEUTRAL_HALF = "neutral_half"
    # window starts empty and averages whatever estimates exist so far
    GROWING_WINDOW = "growing_window"


@dataclass(frozen=True)
class MemristorParams:
    """Feedback configuration. ``integration_window_s`` is the span of the
    sliding average, ``exposure_s`` the counting time behind one estimate.
    Latencies above exposure/20 are allowed but flagged, since the feedback
    then lags a noticeable fraction of an exposure."""

    integration_window_s: float
    exposure_s: float
    latency_s: float = 0.0
    init_policy: InitPolicy = InitPolicy.NEUTRAL_HALF

    def __post_init__(self):
        if not self.integration_window_s > 0:
            raise ValueError("integration_window_s must be > 0")
        if not self.exposure_s > 0:
            raise ValueError("exposure_s must be > 0")
        if self.exposure_s > self.integration_window_s * (1 + 1e-9):
            raise ValueError(
                "exposure_s must not exceed integration_window_s "
                f"({self.exposure_s} > {self.integration_window_s})"
            )
        if self.latency_s < 0:
            raise ValueError("latency_s must be >= 0")
        if self.latency_s > self.exposure_s / 20.0:
            warnings.warn(
                f"latency {self.latency_s}s exceeds exposure/20; "
                "outside the experiment-faithful regime",
                stacklevel=2,
            )

    @property
    def window_len(self) -> int:
        """Number of exposures spanned by the integration window."""
        return max(1, int(math.floor(self.integration_window_s / self.exposure_s + 1e-9)))


@dataclass(frozen=True)
class DetectionModel:
    """Counting model of the monitor detector: overall efficiency, pump
    pulse rate, and whether counts fluctuate binomially (shot noise) or sit
    at their rounded expectation. ``combined_estimator`` additionally uses
    the transmitted-arm counts so the input estimate needs no division by
    the instantaneous reflectivity; it is an optional variant, not the
    default reconstruction."""

    efficiency: float = 1.0
    pulse_rate_hz: float = 79.0e6
    shot_noise: bool = False
    seed: int = 0
    combined_estimator: bool = False

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must be in [0, 1]")
        if not self.pulse_rate_hz > 0:
            raise ValueError("pulse_rate_hz must be > 0")

    def trials(self, tau: float) -> int:
        return max(1, int(round(self.pulse_rate_hz * tau)))


@dataclass
class MemristorState:
    """Mutable device state: reflectivity in force, the bounded history of
    (timestamp, input estimate) pairs spanning the window, queued updates
    waiting out the feedback latency, and the running exposure."""

    reflectivity: float = 0.5
    history: deque = field(default_factory=deque)
    pending: deque = field(default_factory=deque)
    clock: float = 0.0
    prev_estimate: float = 0.5
    acc_input: float = 0.0
    acc_reflectivity: float = 0.0
    acc_time: float = 0.0

    def copy(self) -> "MemristorState":
        return MemristorState(
            reflectivity=self.reflectivity,
            history=deque(self.history),
            pending=deque(self.pending),
            clock=self.clock,
            prev_estimate=self.prev_estimate,
            acc_input=self.acc_input,
            acc_reflectivity=self.acc_reflectivity,
            acc_time=self.acc_time,
        )


def make_state(params: MemristorParams, start_time: float = 0.0) -> MemristorState:
    state = MemristorState(clock=start_time)
    if params.init_policy is InitPolicy.NEUTRAL_HALF:
        w = params.window_len
        for k in range(w):
            t = start_time - (w - k) * params.exposure_s
            state.history.append((t, 0.5))
    return state


def reflectivity_from_window(values, init_value: float = 0.5) -> float:
    """Window mean of the stored estimates, clamped to [0, 1]; each stored
    sample stands for one exposure, so the plain mean is the rectangle-rule
    time average. An empty window falls back to the init value."""
    values = list(values)
    if not values:
        return init_value
    total = 0.0
    for v in values:
        total += v
    return min(1.0, max(0.0, total / len(values)))


def sample_counts(
    n_in: float,
    reflectivity: float,
    model: DetectionModel,
    tau: float,
    rng: np.random.Generator | None = None,
) -> int:
    """Reflected-arm counts over one exposure: binomial over the pump pulses
    with per-pulse success efficiency * R * n_in. Without shot noise the
    rounded expectation is returned. Deterministic for a fixed seed."""
    if not 0.0 <= n_in <= 1.0:
        raise ValueError("n_in must be in [0, 1]")
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError("reflectivity must be in [0, 1]")
    if not tau > 0:
        raise ValueError("tau must be > 0")
    trials = model.trials(tau)
    p = min(1.0, max(0.0, model.efficiency * reflectivity * n_in))
    if not model.shot_noise:
        return int(round(trials * p))
    if rng is None:
        rng = np.random.default_rng(model.seed)
    return int(rng.binomial(trials, p))


def estimate_input(
    counts_reflected: int,
    model: DetectionModel,
    r_current: float,
    tau: float,
    previous_estimate: float = 0.5,
) -> float:
    """Invert reflected counts to the mean input photon number, clamped to
    [0, 1] so statistical overshoot cannot claim more than one photon per
    pulse. Below R_FLOOR the inversion is numerically meaningless and the
    previous estimate is held."""
    if counts_reflected < 0:
        raise ValueError("counts must be >= 0")
    if not tau > 0:
        raise ValueError("tau must be > 0")
    if r_current < R_FLOOR:
        return previous_estimate
    denom = model.pulse_rate_hz * tau * model.efficiency * r_current
    if denom <= 0.0:
        return previous_estimate
    return min(1.0, max(0.0, counts_reflected / denom))


def estimate_input_combined(
    counts_reflected: int,
    counts_transmitted: int,
    model: DetectionModel,
    tau: float,
) -> float:
    """Variant estimator using both arms: total counts over the exposure
    normalized by the pulse budget, independent of the reflectivity split."""
    if counts_reflected < 0 or counts_transmitted < 0:
        raise ValueError("counts must be >= 0")
    denom = model.pulse_rate_hz * tau * model.efficiency
    if denom <= 0.0:
        return 0.0
    return min(1.0, max(0.0, (counts_reflected + counts_transmitted) / denom))


def step(
    state: MemristorState,
    params: MemristorParams,
    n_in: float,
    dt: float,
    detection: DetectionModel | None = None,
    rng: np.random.Generator | None = None,
    n_in_estimate: float | None = None,
):
    """Advance the device by one step of duration dt.

    The split uses the reflectivity in force at the step's start; updates
    whose latency has elapsed are applied first. The exposure accumulates
    the step's contribution to the next input estimate; ``n_in_estimate``
    can supply a better sample of the underlying continuous drive (for
    example its mid-step value) while ``n_in`` remains the population that
    is actually split. When the accumulated exposure reaches one exposure
    time, an estimate is formed (exactly, or through counts when a
    detection model with shot noise is given), the window and reflectivity
    update, and the new value is queued behind the feedback latency.

    Returns (n_transmitted, n_reflected, state); the state object is
    advanced in place, use ``state.copy()`` beforehand for a snapshot.
    """
    if not 0.0 <= n_in <= 1.0:
        raise ValueError(f"n_in must be in [0, 1], got {n_in}")
    if not 0.0 < dt <= params.exposure_s * (1 + 1e-9):
        raise ValueError(f"dt must be in (0, exposure_s], got {dt}")
    tol = 1e-9 * params.exposure_s

    while state.pending and state.pending[0][0] <= state.clock + tol:
        _, new_r = state.pending.popleft()
        state.reflectivity = new_r

    r = state.reflectivity
    n_reflected = r * n_in
    n_transmitted = n_in - n_reflected

    acc_val = n_in if n_in_estimate is None else n_in_estimate
    state.acc_input += acc_val * dt
    state.acc_reflectivity += r * dt
    state.acc_time += dt
    state.clock += dt

    if state.acc_time >= params.exposure_s - tol:
        mean_input = state.acc_input / state.acc_time
        mean_r = state.acc_reflectivity / state.acc_time
        estimate = _form_estimate(mean_input, mean_r, params, detection, rng, state)
        state.prev_estimate = estimate
        state.history.append((state.clock, estimate))
        while len(state.history) > params.window_len:
            state.history.popleft()
        new_r = reflectivity_from_window(v for _, v in state.history)
        state.pending.append((state.clock + params.latency_s, new_r))
        state.acc_input = 0.0
        state.acc_reflectivity = 0.0
        state.acc_time = 0.0

    return n_transmitted, n_reflected, state


def _form_estimate(mean_input, mean_r, params, detection, rng, state):
    if detection is None or not detection.shot_noise:
        # exact expectation of the exposure average
        return min(1.0, max(0.0, mean_input))
    tau = params.exposure_s
    counts_r = sample_counts(mean_input, mean_r, detection, tau, rng=rng)
    if detection.combined_estimator:
        counts_t = sample_counts(mean_input, 1.0 - mean_r, detection, tau, rng=rng)
        return estimate_input_combined(counts_r, counts_t, detection, tau)
    return estimate_input(counts_r, detection, mean_r, tau, state.prev_estimate)
