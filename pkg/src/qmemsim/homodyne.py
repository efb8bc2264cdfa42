"""Self-homodyne visibility models and the purity-extraction fit.

Interfering two consecutive pulses from the same source in a path-unbalanced
interferometer turns the qubit coherence into a fringe visibility. For an
ideal source and unit detection efficiency the visibility after a memristor
of net transmissivity T is (4 - 4*b) / (4 - b*T) with b the one-photon
population; after two memristors T is replaced by the product T1*T2. With
heavy photon loss the device dependence drops out and the visibility tends
to the line purity**2 * (1 - b) * sqrt(v_hom), which is what makes the
visibility-vs-population fit a loss-insensitive purity measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import fock

__all__ = [
    "SourceModel",
    "VisibilityCurve",
    "PurityFit",
    "visibility_single",
    "visibility_double",
    "visibility_realistic",
    "fit_purity",
    "fringe_trace",
    "visibility_loop_width",
]


@dataclass(frozen=True)
class SourceModel:
    """Emitted qubit ensemble: one-photon population beta_sq, conditional
    purity (weight of the coherent component; insensitive to photon loss)
    and two-photon interference visibility v_hom."""

    beta_sq: float
    purity: float = 1.0
    v_hom: float = 1.0

    def __post_init__(self):
        for name in ("beta_sq", "purity", "v_hom"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {val}")

    def with_population(self, beta_sq: float) -> "SourceModel":
        return SourceModel(beta_sq, self.purity, self.v_hom)


@dataclass(frozen=True)
class VisibilityCurve:
    """Visibility samples versus one-photon population, optional 1-sigma
    uncertainties."""

    beta_sq: tuple[float, ...]
    visibility: tuple[float, ...]
    sigma: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.beta_sq) != len(self.visibility):
            raise ValueError("beta_sq and visibility lengths differ")
        if self.sigma is not None and len(self.sigma) != len(self.beta_sq):
            raise ValueError("sigma length differs from data length")
        if len(set(self.beta_sq)) != len(self.beta_sq):
            raise ValueError("beta_sq values must be distinct")
        for b in self.beta_sq:
            if not 0.0 <= b <= 1.0:
                raise ValueError(f"beta_sq must be in [0, 1], got {b}")


@dataclass(frozen=True)
class PurityFit:
    purity: float
    purity_se: float
    slope: float            # constrained model: visibility = slope * (1 - beta_sq)
    residual_norm: float
    slope_affine: float     # unconstrained diagnostic fit in beta_sq
    intercept_affine: float


def visibility_single(beta_sq: float, t_net: float) -> float:
    """Ideal lossless fringe visibility after one memristor of
    transmissivity t_net: (4 - 4*beta_sq) / (4 - beta_sq * t_net)."""
    _check_unit("beta_sq", beta_sq)
    _check_unit("t_net", t_net)
    return (4.0 - 4.0 * beta_sq) / (4.0 - beta_sq * t_net)


def visibility_double(beta_sq: float, t1: float, t2: float) -> float:
    """Two cascaded memristors: only the product t1*t2 enters."""
    _check_unit("beta_sq", beta_sq)
    _check_unit("t1", t1)
    _check_unit("t2", t2)
    return (4.0 - 4.0 * beta_sq) / (4.0 - beta_sq * t1 * t2)


def visibility_realistic(source: SourceModel, t_net: float, eta: float) -> float:
    """Fringe contrast including detection efficiency, conditional purity and
    partial distinguishability, via the exact interference engine.

    The fringe extremes sit at relative phase pi (top) and 0 (bottom). At
    eta = 0 the closed loss-limit form purity**2 * (1 - beta_sq) *
    sqrt(v_hom) is returned directly.
    """
    _check_unit("t_net", t_net)
    _check_unit("eta", eta)
    if eta == 0.0:
        return source.purity**2 * (1.0 - source.beta_sq) * math.sqrt(source.v_hom)
    chain = [1.0 - t_net]
    p_max = fock.two_pulse_pipeline(source, chain, math.pi, eta)[(1, 1)]
    p_min = fock.two_pulse_pipeline(source, chain, 0.0, eta)[(1, 1)]
    if p_max + p_min == 0.0:
        return 0.0
    return (p_max - p_min) / (p_max + p_min)


def fit_purity(curve: VisibilityCurve, v_hom: float) -> PurityFit:
    """Extract the conditional purity from a visibility-vs-population curve.

    Model: visibility = purity**2 * sqrt(v_hom) * (1 - beta_sq), a
    through-origin line in the coordinate u = 1 - beta_sq. The slope is the
    weighted least-squares estimate; purity = sqrt(slope / sqrt(v_hom))
    projected onto [0, 1], with its standard error from linear-regression
    error propagation. An unconstrained affine fit in beta_sq is reported
    alongside as a diagnostic.
    """
    if not 0.0 < v_hom <= 1.0:
        raise ValueError(f"v_hom must be in (0, 1], got {v_hom}")
    n = len(curve.beta_sq)
    if n < 3:
        raise ValueError(f"need at least 3 points to fit, got {n}")
    u = 1.0 - np.asarray(curve.beta_sq)
    v = np.asarray(curve.visibility)
    if np.allclose(u, u[0]):
        raise ValueError("degenerate design: all beta_sq values equal")
    if curve.sigma is not None:
        wgt = 1.0 / np.asarray(curve.sigma) ** 2
    else:
        wgt = np.ones(n)

    denom = float(np.sum(wgt * u * u))
    slope = float(np.sum(wgt * u * v)) / denom
    resid = v - slope * u
    residual_norm = float(np.sqrt(np.sum(resid**2)))
    # residual variance with one fitted parameter
    sigma2 = float(np.sum(wgt * resid**2)) / max(n - 1, 1)
    slope_se = math.sqrt(sigma2 / denom)

    root_v = math.sqrt(v_hom)
    purity = math.sqrt(min(max(slope / root_v, 0.0), 1.0))
    if purity > 1e-9:
        purity_se = slope_se / (2.0 * purity * root_v)
    else:
        purity_se = math.sqrt(slope_se / root_v)

    b = np.asarray(curve.beta_sq)
    aff = np.polyfit(b, v, 1, w=np.sqrt(wgt))
    return PurityFit(
        purity=purity,
        purity_se=purity_se,
        slope=slope,
        residual_norm=residual_norm,
        slope_affine=float(aff[0]),
        intercept_affine=float(aff[1]),
    )


def fringe_trace(
    source: SourceModel,
    reflectivities: Sequence[float],
    phase_schedule: Sequence[float],
    eta: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Click-probability series at the two interferometer outputs while the
    fringe phase is scanned. The two channels are complementary: their sum
    is phase-independent because the single-photon fringes are exactly
    opposite and the two-photon terms carry no phase."""
    ch1 = np.empty(len(phase_schedule))
    ch2 = np.empty(len(phase_schedule))
    for i, phi in enumerate(phase_schedule):
        probs = fock.two_pulse_pipeline(source, reflectivities, phi, eta)
        ch1[i] = probs[(1, 1)]
        ch2[i] = probs[(2, 1)]
    return ch1, ch2


def visibility_loop_width(
    beta_sq_series: np.ndarray,
    t_net_series: np.ndarray,
    source: SourceModel,
    eta: float,
) -> float:
    """Width of the hysteresis loop traced by the fringe visibility while
    the drive cycles.

    Inputs are one steady-state period of the drive population and of the
    chain's net transmissivity. The width is the largest gap in visibility
    between the rising and falling branches at matched population, from
    linear interpolation on a common population grid.
    """
    b = np.asarray(beta_sq_series, dtype=float)
    t = np.asarray(t_net_series, dtype=float)
    if b.shape != t.shape or b.size < 4:
        raise ValueError("need matched series with at least 4 samples")
    vis = np.empty(b.size)
    for i in range(b.size):
        vis[i] = visibility_realistic(source.with_population(b[i]), t[i], eta)
    imax = int(np.argmax(b))
    up_b, up_v = b[: imax + 1], vis[: imax + 1]
    down_b, down_v = b[imax:][::-1], vis[imax:][::-1]
    if up_b.size < 2 or down_b.size < 2:
        return 0.0
    lo = max(up_b.min(), down_b.min())
    hi = min(up_b.max(), down_b.max())
    if hi <= lo:
        return 0.0
    grid = np.linspace(lo, hi, 201)
    up_i = np.interp(grid, *_monotone(up_b, up_v))
    down_i = np.interp(grid, *_monotone(down_b, down_v))
    return float(np.max(np.abs(up_i - down_i)))


def _monotone(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(x, kind="stable")
    return x[order], y[order]


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")
