"""qmemsim: quantum-memristor chain simulator and verification suite.

A quantum memristor here is a beam splitter acting on vacuum-one-photon
qubits whose reflectivity follows the sliding-window average of the mean
photon number passing through it. The package simulates single devices and
cascades (hysteresis loops, asymptotic regimes), provides an exact
few-photon interference oracle for the self-homodyne readout, and closed
forms for fringe visibility and conditional-purity extraction.
"""

from ._kernels import DEFAULT_BACKEND, available_backends
from .homodyne import (
    PurityFit,
    SourceModel,
    VisibilityCurve,
    fit_purity,
    fringe_trace,
    visibility_double,
    visibility_realistic,
    visibility_single,
)
from .memristor import (
    DetectionModel,
    InitPolicy,
    MemristorParams,
    MemristorState,
    estimate_input,
    make_state,
    reflectivity_from_window,
    sample_counts,
    step,
)
from .network import (
    ChainConfig,
    EquivalenceResult,
    HysteresisLoop,
    InsufficientDataError,
    PinchReport,
    SweepResult,
    Trace,
    extract_loop,
    loop_areas,
    pinch_check,
    run_chain,
    series_parallel_equivalence,
    sweep_windows,
)
from .signals import (
    SamplingGrid,
    SignalSpec,
    Waveform,
    discretize,
    pulse_area_to_population,
    sample,
    sample_array,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DEFAULT_BACKEND",
    "available_backends",
    # signals
    "Waveform",
    "SignalSpec",
    "SamplingGrid",
    "sample",
    "sample_array",
    "discretize",
    "pulse_area_to_population",
    # memristor
    "InitPolicy",
    "MemristorParams",
    "DetectionModel",
    "MemristorState",
    "make_state",
    "step",
    "reflectivity_from_window",
    "estimate_input",
    "sample_counts",
    # network
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
    # homodyne
    "SourceModel",
    "VisibilityCurve",
    "PurityFit",
    "visibility_single",
    "visibility_double",
    "visibility_realistic",
    "fit_purity",
    "fringe_trace",
]
