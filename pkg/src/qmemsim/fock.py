"""Exact few-photon interference on labeled bosonic modes.

States are superpositions of occupation configurations over modes labeled by
(spatial index, time bin, internal tag). Optical elements act by linear
substitution on creation operators, which reproduces one- and two-photon
interference (fringes, Hong-Ou-Mandel suppression, bunching) exactly rather
than perturbatively. Threshold detection with per-photon efficiency eta is
evaluated on the detector-marginal photon-count distribution, so a k-photon
occupation clicks with probability 1 - (1 - eta)**k.

Internal tags: tag 0 is the principal internal state shared by all
emissions; a nonzero tag marks an internal state orthogonal to everything
else, one fresh tag per emission. Writing each emitted photon as
sqrt(x) * principal + sqrt(1 - x) * own-orthogonal gives any two emissions a
mutual amplitude overlap of x, which is how partial distinguishability
enters the fringes.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

__all__ = [
    "PRINCIPAL",
    "ModeLabel",
    "FockKet",
    "MixedState",
    "BeamSplitter",
    "PhaseShift",
    "Delay",
    "MemristorTap",
    "apply_element",
    "threshold_click_probability",
    "joint_click_distribution",
    "mean_photon_number",
    "prepare_two_pulse_source",
    "two_pulse_pipeline",
    "dump_state",
    "CapacityError",
]

PRINCIPAL = 0

PRUNE_EPS = 1e-15


class CapacityError(ValueError):
    """A configuration exceeded the enumeration's photon-number cap."""


@dataclass(frozen=True, order=True)
class ModeLabel:
    """One optical mode: spatial path, time bin (units of the pulse delay),
    internal tag. Labels are totally ordered so configurations canonicalize."""

    spatial: int
    time_bin: int
    internal: int = PRINCIPAL


Config = tuple  # sorted tuple of ModeLabel, one entry per photon


def _canon(labels: Iterable[ModeLabel]) -> Config:
    return tuple(sorted(labels))


def _occupations(config: Config) -> Counter:
    return Counter(config)


def _norm_factor(config: Config) -> float:
    # sqrt(prod n_m!) converts monomial coefficients to normalized amplitudes
    f = 1.0
    for n in _occupations(config).values():
        f *= math.factorial(n)
    return math.sqrt(f)


class FockKet:
    """Pure state: map from photon configurations to complex amplitudes.

    Amplitudes are in the normalized Fock basis. The vacuum is the empty
    configuration. Total photon number per configuration is capped at
    ``n_max``; elements never change photon number, so the cap is enforced
    at construction and on tensor products.
    """

    __slots__ = ("amps", "n_max")

    def __init__(self, amps: Mapping[Config, complex] | None = None, n_max: int = 2):
        self.n_max = n_max
        self.amps: dict[Config, complex] = {}
        if amps:
            for config, a in amps.items():
                config = _canon(config)
                if len(config) > n_max:
                    raise CapacityError(
                        f"configuration with {len(config)} photons exceeds n_max={n_max}"
                    )
                if abs(a) > PRUNE_EPS:
                    self.amps[config] = self.amps.get(config, 0.0) + complex(a)

    @classmethod
    def vacuum(cls, n_max: int = 2) -> "FockKet":
        return cls({(): 1.0}, n_max=n_max)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amps.values()))

    def normalized(self) -> "FockKet":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a null state")
        return FockKet({c: a / n for c, a in self.amps.items()}, n_max=self.n_max)

    def amplitude(self, labels: Iterable[ModeLabel]) -> complex:
        return self.amps.get(_canon(labels), 0.0)

    def tensor(self, other: "FockKet") -> "FockKet":
        n_max = max(self.n_max, other.n_max)
        out: dict[Config, complex] = {}
        for c1, a1 in self.amps.items():
            for c2, a2 in other.amps.items():
                config = _canon(c1 + c2)
                if len(config) > n_max:
                    raise CapacityError(
                        f"tensor product exceeds n_max={n_max}"
                    )
                out[config] = out.get(config, 0.0) + a1 * a2
        return FockKet(out, n_max=n_max)

    def scaled(self, factor: complex) -> "FockKet":
        return FockKet({c: a * factor for c, a in self.amps.items()}, n_max=self.n_max)


@dataclass
class MixedState:
    """Convex mixture of pure states; weights sum to 1 within 1e-12."""

    components: list[tuple[float, FockKet]] = field(default_factory=list)

    def validate(self) -> None:
        total = sum(w for w, _ in self.components)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total}, expected 1")
        for w, _ in self.components:
            if w < -1e-15:
                raise ValueError(f"negative mixture weight {w}")


StateLike = Union[FockKet, MixedState]


@dataclass(frozen=True)
class BeamSplitter:
    """Two-port coupler with the real orthogonal convention
    a -> sqrt(1-R) a + sqrt(R) b,  b -> sqrt(R) a - sqrt(1-R) b."""

    a: int
    b: int
    reflectivity: float


@dataclass(frozen=True)
class PhaseShift:
    spatial: int
    phase: float


@dataclass(frozen=True)
class Delay:
    spatial: int
    bins: int


@dataclass(frozen=True)
class MemristorTap:
    """Feedback coupler of one memristor at a frozen reflectivity: the input
    path keeps sqrt(1-R), the monitored (reflected) arm gets sqrt(R). The
    feedback mode is never detected downstream, so leaving it occupied in
    the configuration is equivalent to tracing it out."""

    spatial: int
    feedback: int
    reflectivity: float


Element = Union[BeamSplitter, PhaseShift, Delay, MemristorTap]


def _substitution(element: Element):
    """Return a function ModeLabel -> list[(coeff, ModeLabel)]."""
    if isinstance(element, BeamSplitter) or isinstance(element, MemristorTap):
        if isinstance(element, BeamSplitter):
            a, b = element.a, element.b
        else:
            a, b = element.spatial, element.feedback
        r = element.reflectivity
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"reflectivity must be in [0, 1], got {r}")
        t_amp = math.sqrt(1.0 - r)
        r_amp = math.sqrt(r)
        two_sided = isinstance(element, BeamSplitter)

        def sub(m: ModeLabel):
            if m.spatial == a:
                return [
                    (t_amp, m),
                    (r_amp, ModeLabel(b, m.time_bin, m.internal)),
                ]
            if two_sided and m.spatial == b:
                return [
                    (r_amp, ModeLabel(a, m.time_bin, m.internal)),
                    (-t_amp, m),
                ]
            return [(1.0, m)]

        return sub

    if isinstance(element, PhaseShift):
        factor = cmath.exp(1j * element.phase)

        def sub(m: ModeLabel):
            if m.spatial == element.spatial:
                return [(factor, m)]
            return [(1.0, m)]

        return sub

    if isinstance(element, Delay):
        if element.bins < 0:
            raise ValueError("delay must be a nonnegative number of bins")

        def sub(m: ModeLabel):
            if m.spatial == element.spatial:
                return [(1.0, ModeLabel(m.spatial, m.time_bin + element.bins, m.internal))]
            return [(1.0, m)]

        return sub

    raise TypeError(f"unknown element {element!r}")


def apply_substitution(ket: FockKet, sub) -> FockKet:
    """Apply a linear creation-operator substitution to every configuration.

    Works on monomial coefficients (normalized amplitude divided by
    sqrt(prod n!)) so that repeated modes expand with the correct bosonic
    multinomial weights, then converts back.
    """
    out: dict[Config, complex] = {}
    for config, amp in ket.amps.items():
        mono = amp / _norm_factor(config)
        # expand photon by photon
        terms: dict[Config, complex] = {(): mono}
        for label in config:
            new_terms: dict[Config, complex] = {}
            for partial, c in terms.items():
                for coeff, new_label in sub(label):
                    key = _canon(partial + (new_label,))
                    new_terms[key] = new_terms.get(key, 0.0) + c * coeff
            terms = new_terms
        for new_config, c in terms.items():
            out[new_config] = out.get(new_config, 0.0) + c * _norm_factor(new_config)
    pruned = {c: a for c, a in out.items() if abs(a) > PRUNE_EPS}
    return FockKet(pruned, n_max=ket.n_max)


def apply_element(state: StateLike, element: Element) -> StateLike:
    """Propagate a state through one optical element."""
    sub = _substitution(element)
    if isinstance(state, FockKet):
        return apply_substitution(state, sub)
    return MixedState([(w, apply_substitution(k, sub)) for w, k in state.components])


def _count_at(config: Config, spatial: int, time_bin: int) -> int:
    return sum(1 for m in config if m.spatial == spatial and m.time_bin == time_bin)


def _marginal_counts(ket: FockKet, spatial: int, time_bin: int) -> dict[int, float]:
    """Photon-count distribution at one (spatial, bin) slot, internal tags
    summed over; different configurations are orthogonal so they add
    incoherently."""
    dist: dict[int, float] = {}
    for config, amp in ket.amps.items():
        k = _count_at(config, spatial, time_bin)
        dist[k] = dist.get(k, 0.0) + abs(amp) ** 2
    return dist


def _components(state: StateLike) -> list[tuple[float, FockKet]]:
    if isinstance(state, FockKet):
        return [(1.0, state)]
    return state.components


def threshold_click_probability(
    state: StateLike, detector_mode: tuple[int, int], eta: float
) -> float:
    """Click probability of a threshold detector on (spatial, time_bin).

    Each photon is detected independently with probability eta, so a
    k-photon occupation clicks with probability 1 - (1 - eta)**k; the
    bunched two-photon case gives the eta*(2 - eta) enhancement.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"efficiency must be in [0, 1], got {eta}")
    spatial, time_bin = detector_mode
    p = 0.0
    for w, ket in _components(state):
        for k, pk in _marginal_counts(ket, spatial, time_bin).items():
            p += w * pk * (1.0 - (1.0 - eta) ** k)
    return p


def joint_click_distribution(
    state: StateLike, detector_modes: Sequence[tuple[int, int]], eta: float
) -> dict[tuple[bool, ...], float]:
    """Joint click/no-click probabilities over several threshold detectors."""
    n_det = len(detector_modes)
    out: dict[tuple[bool, ...], float] = {}
    for w, ket in _components(state):
        # joint count distribution over the detector slots
        joint: dict[tuple[int, ...], float] = {}
        for config, amp in ket.amps.items():
            counts = tuple(_count_at(config, s, b) for s, b in detector_modes)
            joint[counts] = joint.get(counts, 0.0) + abs(amp) ** 2
        for counts, pc in joint.items():
            p_click = [1.0 - (1.0 - eta) ** k for k in counts]
            for pattern in range(2**n_det):
                bits = tuple(bool(pattern >> i & 1) for i in range(n_det))
                prob = pc * w
                for bit, pcl in zip(bits, p_click):
                    prob *= pcl if bit else (1.0 - pcl)
                if prob:
                    out[bits] = out.get(bits, 0.0) + prob
    return out


def mean_photon_number(state: StateLike, spatial: int, time_bin: int) -> float:
    n = 0.0
    for w, ket in _components(state):
        for k, pk in _marginal_counts(ket, spatial, time_bin).items():
            n += w * k * pk
    return n


def dump_state(state: StateLike) -> str:
    """Debug dump, one configuration per line:
    ``spatial:bin:internal^count ... amplitude_re amplitude_im``."""
    lines = []
    for w, ket in _components(state):
        if isinstance(state, MixedState):
            lines.append(f"component weight={w!r}")
        for config in sorted(ket.amps):
            amp = ket.amps[config]
            occ = _occupations(config)
            slots = " ".join(
                f"{m.spatial}:{m.time_bin}:{m.internal}^{n}" for m, n in sorted(occ.items())
            )
            if not slots:
                slots = "vacuum"
            lines.append(f"{slots} {amp.real!r} {amp.imag!r}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Two-pulse self-homodyne layout
# ---------------------------------------------------------------------------

# Spatial indices of the standard layout. The source rail doubles as the
# interferometer output port that carries the sin^2(phi/2) fringe.
RAIL = 0
AUX_ARM = 1
FEEDBACK_BASE = 10


def _pulse_operator(rail: int, time_bin: int, ortho_tag: int, x_overlap: float):
    """Creation-operator terms of one emission on the given rail."""
    sx = math.sqrt(x_overlap)
    s1x = math.sqrt(1.0 - x_overlap)
    terms = []
    if sx > 0.0:
        terms.append((sx, ModeLabel(rail, time_bin, PRINCIPAL)))
    if s1x > 0.0:
        terms.append((s1x, ModeLabel(rail, time_bin, ortho_tag)))
    return terms


def _pulse_kets(beta_sq: float, purity: float, phase: float, rail: int, time_bin: int,
                ortho_tag: int, x_overlap: float, n_max: int):
    """Weighted pure components of one emitted qubit.

    The source density matrix is purity * |psi><psi| plus (1 - purity) times
    the populations-only diagonal; the diagonal splits into a vacuum branch
    and a one-photon branch.
    """
    alpha = math.sqrt(1.0 - beta_sq)
    beta = math.sqrt(beta_sq)
    op = _pulse_operator(rail, time_bin, ortho_tag, x_overlap)
    rot = cmath.exp(1j * phase)

    one_photon = {(m,): complex(c) for c, m in op}
    branches = []
    if purity > 0.0:
        coherent = {(): complex(alpha)}
        for c, m in op:
            coherent[(m,)] = beta * rot * c
        branches.append((purity, FockKet(coherent, n_max=n_max)))
    w_mixed = 1.0 - purity
    if w_mixed > 0.0:
        if alpha > 0.0:
            branches.append((w_mixed * alpha**2, FockKet.vacuum(n_max)))
        if beta > 0.0:
            branches.append((w_mixed * beta_sq, FockKet(one_photon, n_max=n_max)))
    return branches


def prepare_two_pulse_source(
    source, relative_phase: float, n_max: int = 2, rails: tuple[int, int] = (RAIL, RAIL)
) -> MixedState:
    """Two consecutive emissions (bins 0 and 1) from the same qubit source.

    ``source`` provides beta_sq (one-photon population), purity (weight of
    the coherent component) and v_hom (two-photon interference visibility).
    The relative phase multiplies the one-photon amplitude of the later
    pulse. Distinguishability: each emission is written with amplitude
    sqrt(x) on the shared principal internal state and sqrt(1-x) on its own
    orthogonal tag, with x = sqrt(v_hom), so the mutual overlap of the two
    photons is sqrt(v_hom) and their two-photon interference visibility is
    v_hom. ``rails`` places the early and late pulse on separate spatial
    modes for parallel-rail layouts; the default puts both on the source
    rail as consecutive time bins.
    """
    beta_sq = source.beta_sq
    purity = source.purity
    v_hom = source.v_hom
    for name, val in (("beta_sq", beta_sq), ("purity", purity), ("v_hom", v_hom)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {val}")
    x = math.sqrt(v_hom)
    early = _pulse_kets(beta_sq, purity, 0.0, rails[0], 0, ortho_tag=1, x_overlap=x, n_max=n_max)
    late = _pulse_kets(beta_sq, purity, relative_phase, rails[1], 1, ortho_tag=2, x_overlap=x, n_max=n_max)
    components = []
    for w1, k1 in early:
        for w2, k2 in late:
            components.append((w1 * w2, k1.tensor(k2)))
    mixed = MixedState(components)
    mixed.validate()
    return mixed


def two_pulse_pipeline(
    source,
    reflectivities: Sequence[float],
    mzi_phase: float,
    eta: float,
    n_max: int = 2,
) -> dict[tuple[int, int], float]:
    """Full self-homodyne layout: source, memristor taps, path-unbalanced
    interferometer (balanced splitter, one-bin delay, balanced splitter),
    threshold detection.

    Returns click probabilities keyed by (detector, time_bin) with detector
    1 the output port whose single-photon fringe goes as sin^2(phi/2) and
    detector 2 its complement. Time bins 0, 1, 2 are in units of the pulse
    separation; the interference bin is 1.
    """
    if len(reflectivities) > 2:
        raise ValueError("pipeline supports chains of at most two memristors")
    state: StateLike = prepare_two_pulse_source(source, mzi_phase, n_max=n_max)
    for i, r in enumerate(reflectivities):
        state = apply_element(state, MemristorTap(RAIL, FEEDBACK_BASE + i, r))
    state = apply_element(state, BeamSplitter(RAIL, AUX_ARM, 0.5))
    state = apply_element(state, Delay(AUX_ARM, 1))
    # ordering (AUX_ARM, RAIL) puts the minus sign on the direct arm, which
    # makes the rail output port the sin^2(phi/2) fringe
    state = apply_element(state, BeamSplitter(AUX_ARM, RAIL, 0.5))
    out: dict[tuple[int, int], float] = {}
    for time_bin in (0, 1, 2):
        out[(1, time_bin)] = threshold_click_probability(state, (RAIL, time_bin), eta)
        out[(2, time_bin)] = threshold_click_probability(state, (AUX_ARM, time_bin), eta)
    return out
