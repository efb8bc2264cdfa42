"""Time-dependent one-photon-population drives.

The chain input is the mean photon number of a vacuum-one-photon qubit, so
every waveform here is a probability: values stay in [0, 1] and repeat with
the configured period. The reference drive is the squared sine,
``sin^2(pi * t / period)``, which sweeps the population smoothly between the
vacuum and the pi-pulse; the other shapes are alternative always-positive
periodic drives for gallery runs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Waveform",
    "SignalSpec",
    "SamplingGrid",
    "sample",
    "sample_array",
    "discretize",
    "pulse_area_to_population",
]


class Waveform(enum.Enum):
    SIN_SQUARED = "sin_squared"
    ABS_SIN = "abs_sin"
    TRIANGLE = "triangle"
    SAWTOOTH = "sawtooth"
    RAISED_COSINE = "raised_cosine"
    CONSTANT = "constant"


@dataclass(frozen=True)
class SignalSpec:
    """Periodic population drive.

    ``phase_offset_s`` shifts every waveform identically; ``level`` is only
    used by ``CONSTANT``. Triangle and sawtooth start at 0 and peak at 1;
    the raised cosine starts at its peak.
    """

    waveform: Waveform
    period_s: float = 1.0
    phase_offset_s: float = 0.0
    level: float = 0.5

    def __post_init__(self):
        if not self.period_s > 0:
            raise ValueError(f"period_s must be > 0, got {self.period_s}")
        if self.waveform is Waveform.CONSTANT and not 0.0 <= self.level <= 1.0:
            raise ValueError(f"constant level must be in [0, 1], got {self.level}")


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform time grid: samples at origin + k*dt for k = 0..floor(duration/dt)."""

    dt_s: float
    duration_s: float
    origin_s: float = 0.0

    def __post_init__(self):
        if not self.dt_s > 0:
            raise ValueError(f"dt_s must be > 0, got {self.dt_s}")
        if not self.duration_s > 0:
            raise ValueError(f"duration_s must be > 0, got {self.duration_s}")
        if self.duration_s < self.dt_s:
            raise ValueError("grid must contain at least 2 samples (duration >= dt)")

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.duration_s / self.dt_s + 1e-9)) + 1

    def times(self) -> np.ndarray:
        return self.origin_s + self.dt_s * np.arange(self.n_samples)


def _phase(spec: SignalSpec, t: float) -> float:
    # fmod keeps the reduction exact, so sample(t) == sample(t + period)
    # bit-for-bit whenever t + period is itself exactly representable.
    u = math.fmod(t - spec.phase_offset_s, spec.period_s)
    if u < 0.0:
        u += spec.period_s
    return u / spec.period_s


def sample(spec: SignalSpec, t: float) -> float:
    """Evaluate the drive at time ``t`` (seconds). Result is in [0, 1]."""
    w = spec.waveform
    if w is Waveform.CONSTANT:
        return spec.level
    x = _phase(spec, t)
    if w is Waveform.SIN_SQUARED:
        return math.sin(math.pi * x) ** 2
    if w is Waveform.ABS_SIN:
        return abs(math.sin(math.pi * x))
    if w is Waveform.TRIANGLE:
        return 2.0 * x if x <= 0.5 else 2.0 - 2.0 * x
    if w is Waveform.SAWTOOTH:
        return x
    if w is Waveform.RAISED_COSINE:
        return 0.5 * (1.0 + math.cos(2.0 * math.pi * x))
    raise ValueError(f"unhandled waveform {w}")


def sample_array(spec: SignalSpec, times: np.ndarray) -> np.ndarray:
    """Vectorized :func:`sample` over an array of times."""
    t = np.asarray(times, dtype=float)
    w = spec.waveform
    if w is Waveform.CONSTANT:
        return np.full(t.shape, spec.level)
    u = np.fmod(t - spec.phase_offset_s, spec.period_s)
    u = np.where(u < 0.0, u + spec.period_s, u)
    x = u / spec.period_s
    if w is Waveform.SIN_SQUARED:
        return np.sin(np.pi * x) ** 2
    if w is Waveform.ABS_SIN:
        return np.abs(np.sin(np.pi * x))
    if w is Waveform.TRIANGLE:
        return np.where(x <= 0.5, 2.0 * x, 2.0 - 2.0 * x)
    if w is Waveform.SAWTOOTH:
        return x
    if w is Waveform.RAISED_COSINE:
        return 0.5 * (1.0 + np.cos(2.0 * np.pi * x))
    raise ValueError(f"unhandled waveform {w}")


def discretize(spec: SignalSpec, grid: SamplingGrid) -> list[tuple[float, float]]:
    """Sample the drive on a grid, returning (time, population) pairs."""
    times = grid.times()
    values = sample_array(spec, times)
    return list(zip(times.tolist(), values.tolist()))


def pulse_area_to_population(area: float) -> float:
    """Map an excitation pulse area in [0, pi] to the one-photon population.

    Ideal two-level Rabi rotation: population = sin^2(area / 2), monotone
    from 0 (no excitation) to 1 (pi pulse).
    """
    if not 0.0 <= area <= math.pi:
        raise ValueError(f"pulse area must be in [0, pi], got {area}")
    return math.sin(area / 2.0) ** 2
