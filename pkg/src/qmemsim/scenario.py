"""Declarative scenario files: parsing, validation, normalization.

Scenarios are YAML documents with nested key-value blocks (see the README
for the grammar). Validation collects every violation with a path-qualified
message instead of stopping at the first, and produces the typed objects
the simulation modules consume. Times are seconds; integration windows may
alternatively be given as ``window_fraction`` (a fraction of the drive
period), matching how the regimes are usually discussed.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from .memristor import DetectionModel, InitPolicy, MemristorParams
from .network import ChainConfig
from .signals import SamplingGrid, SignalSpec, Waveform

__all__ = [
    "Experiment",
    "HomodyneStudy",
    "SweepSpec",
    "Scenario",
    "ScenarioError",
    "parse_scenario",
    "scenario_from_dict",
]


class ScenarioError(ValueError):
    """Carries the full list of validation problems."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid scenario:\n" + "\n".join(f"  - {e}" for e in self.errors))


class Experiment(enum.Enum):
    SINGLE_MEMRISTOR = "single_memristor"
    CASCADE = "cascade"
    WINDOW_SWEEP = "window_sweep"
    WAVEFORM_GALLERY = "waveform_gallery"
    VISIBILITY_STUDY = "visibility_study"
    PURITY_FIT_STUDY = "purity_fit_study"
    ORACLE_CROSS_CHECK = "oracle_cross_check"
    SERIES_PARALLEL_CHECK = "series_parallel_check"


_SIM_EXPERIMENTS = {
    Experiment.SINGLE_MEMRISTOR,
    Experiment.CASCADE,
    Experiment.WINDOW_SWEEP,
    Experiment.WAVEFORM_GALLERY,
}


@dataclass(frozen=True)
class HomodyneStudy:
    beta_sq: tuple[float, ...] = tuple(round(0.05 + 0.1 * k, 2) for k in range(10))
    eta: float = 1.0
    purity: float = 1.0
    v_hom: float = 1.0
    t_net: float = 0.5
    noise_sigma: float = 0.01
    phase_steps: int = 100


@dataclass(frozen=True)
class SweepSpec:
    windows: tuple
    fractions: bool = True


@dataclass(frozen=True)
class Scenario:
    experiment: Experiment
    seed: int
    output_dir: str | None
    signal: SignalSpec | None
    grid: SamplingGrid | None
    chain: ChainConfig | None
    homodyne: HomodyneStudy
    sweep: SweepSpec | None
    normalized: dict

    def content_hash(self) -> str:
        canon = json.dumps(self.normalized, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


class _Collector:
    def __init__(self):
        self.errors: list[str] = []

    def error(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def check(self):
        if self.errors:
            raise ScenarioError(self.errors)


def _enum_by_value(enum_cls, value, path, errs):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        errs.error(path, f"unknown value {value!r}; allowed: {allowed}")
        return None


def _number(block, key, path, errs, default=None, required=False, minimum=None,
            maximum=None, strict_min=False):
    if key not in block:
        if required:
            errs.error(f"{path}.{key}", "required key missing")
        return default
    val = block[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errs.error(f"{path}.{key}", f"expected a number, got {val!r}")
        return default
    val = float(val)
    if minimum is not None and (val <= minimum if strict_min else val < minimum):
        op = ">" if strict_min else ">="
        errs.error(f"{path}.{key}", f"must be {op} {minimum}, got {val}")
        return default
    if maximum is not None and val > maximum:
        errs.error(f"{path}.{key}", f"must be <= {maximum}, got {val}")
        return default
    return val


def parse_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario file. Raises ScenarioError listing every
    problem found, or FileNotFoundError / yaml errors for unreadable input."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"scenario file not found: {p}")
    with open(p) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ScenarioError([f"{p}: not well-formed YAML ({exc})"]) from exc
    if not isinstance(data, dict):
        raise ScenarioError([f"{p}: top level must be a mapping"])
    return scenario_from_dict(data)


def scenario_from_dict(data: dict) -> Scenario:
    errs = _Collector()

    experiment = None
    if "experiment" not in data:
        errs.error("experiment", "required key missing")
    else:
        experiment = _enum_by_value(Experiment, data["experiment"], "experiment", errs)

    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        errs.error("seed", f"expected an integer, got {seed!r}")
        seed = 0

    output_dir = data.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        errs.error("output_dir", "expected a string path")
        output_dir = None

    signal = _parse_signal(data.get("signal"), errs)
    grid = _parse_grid(data.get("grid"), errs)
    chain = _parse_chain(data.get("chain"), signal, grid, seed, errs)
    homodyne = _parse_homodyne(data.get("homodyne"), errs)
    sweep = _parse_sweep(data.get("sweep"), errs)

    if experiment in _SIM_EXPERIMENTS:
        for name, block in (("signal", signal), ("grid", grid), ("chain", chain)):
            if block is None and not any(e.startswith(name) for e in errs.errors):
                errs.error(name, f"required for experiment {experiment.value}")
    if experiment is Experiment.WINDOW_SWEEP and sweep is None:
        errs.error("sweep", "required for experiment window_sweep")
    if experiment is Experiment.CASCADE and chain is not None and chain.n_nodes < 2:
        errs.error("chain.nodes", "cascade needs at least 2 nodes")

    errs.check()
    normalized = _normalize(experiment, seed, output_dir, signal, grid, chain, homodyne, sweep)
    return Scenario(
        experiment=experiment,
        seed=seed,
        output_dir=output_dir,
        signal=signal,
        grid=grid,
        chain=chain,
        homodyne=homodyne,
        sweep=sweep,
        normalized=normalized,
    )


def _parse_signal(block, errs) -> SignalSpec | None:
    if block is None:
        return None
    if not isinstance(block, dict):
        errs.error("signal", "expected a mapping")
        return None
    wf = None
    if "waveform" not in block:
        errs.error("signal.waveform", "required key missing")
    else:
        wf = _enum_by_value(Waveform, block["waveform"], "signal.waveform", errs)
    period = _number(block, "period_s", "signal", errs, default=1.0,
                     required=(wf is not Waveform.CONSTANT), minimum=0.0, strict_min=True)
    offset = _number(block, "phase_offset_s", "signal", errs, default=0.0)
    level = _number(block, "level", "signal", errs, default=0.5, minimum=0.0, maximum=1.0)
    if wf is None or period is None or offset is None or level is None:
        return None
    try:
        return SignalSpec(wf, period_s=period, phase_offset_s=offset, level=level)
    except ValueError as exc:
        errs.error("signal", str(exc))
        return None


def _parse_grid(block, errs) -> SamplingGrid | None:
    if block is None:
        return None
    if not isinstance(block, dict):
        errs.error("grid", "expected a mapping")
        return None
    dt = _number(block, "dt_s", "grid", errs, required=True, minimum=0.0, strict_min=True)
    dur = _number(block, "duration_s", "grid", errs, required=True, minimum=0.0, strict_min=True)
    origin = _number(block, "origin_s", "grid", errs, default=0.0)
    if dt is None or dur is None or origin is None:
        return None
    try:
        return SamplingGrid(dt_s=dt, duration_s=dur, origin_s=origin)
    except ValueError as exc:
        errs.error("grid", str(exc))
        return None


def _parse_chain(block, signal, grid, default_seed, errs) -> ChainConfig | None:
    if block is None:
        return None
    if not isinstance(block, dict):
        errs.error("chain", "expected a mapping")
        return None
    nodes_raw = block.get("nodes")
    if not isinstance(nodes_raw, list) or not nodes_raw:
        errs.error("chain.nodes", "expected a non-empty list of node mappings")
        return None
    nodes = []
    for i, nb in enumerate(nodes_raw):
        path = f"chain.nodes[{i}]"
        if not isinstance(nb, dict):
            errs.error(path, "expected a mapping")
            continue
        exposure = _number(nb, "exposure_s", path, errs, required=True,
                           minimum=0.0, strict_min=True)
        window = _number(nb, "integration_window_s", path, errs, minimum=0.0, strict_min=True)
        fraction = _number(nb, "window_fraction", path, errs, minimum=0.0, strict_min=True)
        if fraction is not None:
            if signal is None:
                errs.error(f"{path}.window_fraction", "needs signal.period_s to resolve")
                continue
            window = fraction * signal.period_s
        if window is None:
            errs.error(f"{path}.integration_window_s",
                       "required (or give window_fraction)")
            continue
        latency = _number(nb, "latency_s", path, errs, default=0.0, minimum=0.0)
        policy = InitPolicy.NEUTRAL_HALF
        if "init_policy" in nb:
            policy = _enum_by_value(InitPolicy, nb["init_policy"], f"{path}.init_policy", errs)
        if exposure is None or latency is None or policy is None:
            continue
        if exposure > window * (1 + 1e-9):
            errs.error(f"{path}.exposure_s",
                       f"exposure_s={exposure} exceeds the integration window {window}")
            continue
        if grid is not None:
            m = round(exposure / grid.dt_s)
            if m < 1 or abs(m * grid.dt_s - exposure) > 1e-9 * max(exposure, 1.0):
                errs.error(f"{path}.exposure_s",
                           f"must be an integer multiple of grid.dt_s={grid.dt_s}")
        try:
            nodes.append(MemristorParams(window, exposure, latency, policy))
        except ValueError as exc:
            errs.error(path, str(exc))
    det_block = block.get("detection", {})
    detection = _parse_detection(det_block, default_seed, errs)
    if len(nodes) != len(nodes_raw) or detection is None:
        return None
    return ChainConfig(nodes=tuple(nodes), detection=detection)


def _parse_detection(block, default_seed, errs) -> DetectionModel | None:
    if not isinstance(block, dict):
        errs.error("chain.detection", "expected a mapping")
        return None
    eff = _number(block, "efficiency", "chain.detection", errs, default=1.0,
                  minimum=0.0, maximum=1.0)
    rate = _number(block, "pulse_rate_hz", "chain.detection", errs, default=79.0e6,
                   minimum=0.0, strict_min=True)
    noise = block.get("shot_noise", False)
    combined = block.get("combined_estimator", False)
    seed = block.get("seed", default_seed)
    for key, val in (("shot_noise", noise), ("combined_estimator", combined)):
        if not isinstance(val, bool):
            errs.error(f"chain.detection.{key}", f"expected a boolean, got {val!r}")
            return None
    if isinstance(seed, bool) or not isinstance(seed, int):
        errs.error("chain.detection.seed", f"expected an integer, got {seed!r}")
        return None
    if eff is None or rate is None:
        return None
    return DetectionModel(efficiency=eff, pulse_rate_hz=rate, shot_noise=noise,
                          seed=seed, combined_estimator=combined)


def _parse_homodyne(block, errs) -> HomodyneStudy:
    if block is None:
        return HomodyneStudy()
    if not isinstance(block, dict):
        errs.error("homodyne", "expected a mapping")
        return HomodyneStudy()
    defaults = HomodyneStudy()
    beta = block.get("beta_sq", list(defaults.beta_sq))
    if not isinstance(beta, list) or not all(isinstance(b, (int, float)) for b in beta):
        errs.error("homodyne.beta_sq", "expected a list of numbers")
        beta = list(defaults.beta_sq)
    for b in beta:
        if not 0.0 <= float(b) <= 1.0:
            errs.error("homodyne.beta_sq", f"values must be in [0, 1], got {b}")
    if len(set(beta)) != len(beta):
        errs.error("homodyne.beta_sq", "values must be distinct")
    eta = _number(block, "eta", "homodyne", errs, default=defaults.eta,
                  minimum=0.0, maximum=1.0)
    purity = _number(block, "purity", "homodyne", errs, default=defaults.purity,
                     minimum=0.0, maximum=1.0)
    v_hom = _number(block, "v_hom", "homodyne", errs, default=defaults.v_hom,
                    minimum=0.0, maximum=1.0)
    t_net = _number(block, "t_net", "homodyne", errs, default=defaults.t_net,
                    minimum=0.0, maximum=1.0)
    sigma = _number(block, "noise_sigma", "homodyne", errs, default=defaults.noise_sigma,
                    minimum=0.0)
    steps = block.get("phase_steps", defaults.phase_steps)
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        errs.error("homodyne.phase_steps", f"expected an integer >= 2, got {steps!r}")
        steps = defaults.phase_steps
    return HomodyneStudy(
        beta_sq=tuple(float(b) for b in beta),
        eta=eta if eta is not None else defaults.eta,
        purity=purity if purity is not None else defaults.purity,
        v_hom=v_hom if v_hom is not None else defaults.v_hom,
        t_net=t_net if t_net is not None else defaults.t_net,
        noise_sigma=sigma if sigma is not None else defaults.noise_sigma,
        phase_steps=steps,
    )


def _parse_sweep(block, errs) -> SweepSpec | None:
    if block is None:
        return None
    if not isinstance(block, dict):
        errs.error("sweep", "expected a mapping")
        return None
    windows = block.get("windows")
    if not isinstance(windows, list) or not windows:
        errs.error("sweep.windows", "expected a non-empty list")
        return None
    parsed = []
    for i, w in enumerate(windows):
        if isinstance(w, (int, float)) and not isinstance(w, bool):
            parsed.append(float(w))
        elif isinstance(w, list) and w and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in w
        ):
            parsed.append(tuple(float(v) for v in w))
        else:
            errs.error(f"sweep.windows[{i}]", f"expected a number or list of numbers, got {w!r}")
    fractions = block.get("fractions", True)
    if not isinstance(fractions, bool):
        errs.error("sweep.fractions", "expected a boolean")
        fractions = True
    return SweepSpec(windows=tuple(parsed), fractions=fractions)


def _normalize(experiment, seed, output_dir, signal, grid, chain, homodyne, sweep) -> dict:
    out: dict = {"experiment": experiment.value, "seed": seed}
    if signal is not None:
        out["signal"] = {
            "waveform": signal.waveform.value,
            "period_s": signal.period_s,
            "phase_offset_s": signal.phase_offset_s,
            "level": signal.level,
        }
    if grid is not None:
        out["grid"] = {"dt_s": grid.dt_s, "duration_s": grid.duration_s,
                       "origin_s": grid.origin_s}
    if chain is not None:
        det = chain.detection if isinstance(chain.detection, DetectionModel) else None
        out["chain"] = {
            "nodes": [
                {
                    "integration_window_s": p.integration_window_s,
                    "exposure_s": p.exposure_s,
                    "latency_s": p.latency_s,
                    "init_policy": p.init_policy.value,
                }
                for p in chain.nodes
            ],
            "detection": {
                "efficiency": det.efficiency,
                "pulse_rate_hz": det.pulse_rate_hz,
                "shot_noise": det.shot_noise,
                "seed": det.seed,
                "combined_estimator": det.combined_estimator,
            },
        }
    out["homodyne"] = {
        "beta_sq": list(homodyne.beta_sq),
        "eta": homodyne.eta,
        "purity": homodyne.purity,
        "v_hom": homodyne.v_hom,
        "t_net": homodyne.t_net,
        "noise_sigma": homodyne.noise_sigma,
        "phase_steps": homodyne.phase_steps,
    }
    if sweep is not None:
        out["sweep"] = {
            "windows": [list(w) if isinstance(w, tuple) else w for w in sweep.windows],
            "fractions": sweep.fractions,
        }
    return out
