"""Superconducting-nanowire relaxation oscillators: simulation + analysis.

The package models shunted nanowire oscillators as piecewise-linear
hybrid systems — exponential current ramps punctuated by hysteretic
phase switches — and layers on top of the simulator the measurements
those circuits are known for: free-running frequency against bias,
injection locking against tone amplitude and frequency (with direct and
element-coupled drive), and mutual synchronization of a coupled pair.

Typical use::

    from scnosc import (
        default_scenario, build_system, scenario_settings, integrate,
    )

    scn = default_scenario().with_key("solver.tstop_ns", 100.0)
    trace = integrate(build_system(scn), scenario_settings(scn))
"""

from .device import (
    FreeRunningPeriod,
    NanowireParams,
    NanowirePhase,
    OscillatorParams,
    dc_iv_curve,
    free_running_period,
    nanowire_resistance,
    oscillation_condition,
    phase_transition,
)
from .circuits import (
    CouplingElement,
    CouplingKind,
    InjectionMode,
    InjectionSpec,
    SystemModel,
    build_injected,
    build_pair,
    build_standalone,
    build_system,
    coupler_current,
    derivatives,
    output_voltage,
)
from .solver import SolverSettings, Trace, integrate, scenario_settings
from .analysis import (
    LockResult,
    Spectrum,
    WindowKind,
    detect_lock,
    dominant_peak,
    event_periods,
    fft_spectrum,
    phase_difference,
    trace_spectrum,
)
from .scenario import (
    Scenario,
    default_scenario,
    parse_scenario,
    parse_scenario_file,
    render_scenario,
    render_svg_plot,
    trace_table,
    write_csv,
)
from .sweep import (
    LockRange,
    SweepSpec,
    find_lock_range,
    lock_map,
    sweep_1d,
    sweep_values,
)
from .errors import (
    AnalysisError,
    InsufficientEventsError,
    MissingInjectionError,
    NonFiniteStateError,
    NotOscillatingError,
    ScenarioError,
    ScnoscError,
    SolverError,
    StepSizeError,
    SweepError,
    UnsynchronizedPairError,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # device
    "NanowirePhase",
    "NanowireParams",
    "OscillatorParams",
    "FreeRunningPeriod",
    "nanowire_resistance",
    "phase_transition",
    "oscillation_condition",
    "free_running_period",
    "dc_iv_curve",
    # circuits
    "CouplingKind",
    "CouplingElement",
    "InjectionMode",
    "InjectionSpec",
    "SystemModel",
    "build_standalone",
    "build_injected",
    "build_pair",
    "build_system",
    "derivatives",
    "output_voltage",
    "coupler_current",
    # solver
    "SolverSettings",
    "Trace",
    "integrate",
    "scenario_settings",
    # analysis
    "WindowKind",
    "Spectrum",
    "LockResult",
    "fft_spectrum",
    "dominant_peak",
    "trace_spectrum",
    "event_periods",
    "detect_lock",
    "phase_difference",
    # scenario
    "Scenario",
    "parse_scenario",
    "parse_scenario_file",
    "default_scenario",
    "render_scenario",
    "write_csv",
    "render_svg_plot",
    "trace_table",
    # sweep
    "LockRange",
    "SweepSpec",
    "sweep_values",
    "find_lock_range",
    "sweep_1d",
    "lock_map",
    # errors
    "ScnoscError",
    "NotOscillatingError",
    "ScenarioError",
    "SolverError",
    "StepSizeError",
    "NonFiniteStateError",
    "AnalysisError",
    "InsufficientEventsError",
    "MissingInjectionError",
    "UnsynchronizedPairError",
    "SweepError",
]
