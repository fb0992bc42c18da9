"""Parameter sweeps: lock ranges, 1-D metric sweeps, lock maps.

All sweeps re-run the same deterministic pipeline (scenario -> model ->
fixed-step integration -> event analysis) per grid point, so results are
reproducible bit for bit and independent of the worker count: points are
distributed over a thread pool (the integrator kernel releases the GIL)
and collected by index.

Per-point failures never abort a sweep; they land in the table as status
markers so a scan across a regime boundary stays useful.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .analysis import detect_lock, phase_difference
from .circuits import build_system
from .device import free_running_period
from .errors import AnalysisError, ScenarioError, ScnoscError, SweepError
from .scenario import _KIND_VALUE_KEY, Scenario
from .solver import integrate, scenario_settings

__all__ = [
    "LockRange",
    "SweepSpec",
    "sweep_values",
    "find_lock_range",
    "sweep_1d",
    "lock_map",
    "SWEEP_METRICS",
]

DEFAULT_COARSE_STEPS = 64
MIN_COARSE_STEPS = 16
DEFAULT_LOCK_BRACKET = 0.2


@dataclass(frozen=True)
class LockRange:
    """A contiguous band of injection frequencies that lock the oscillator.

    f_low/f_high are the certified-locked endpoints in Hz (None when
    empty). multiple_intervals flags a coarse scan that saw more than one
    locked run; the reported band is then the widest one.
    """

    f_low: float | None
    f_high: float | None
    empty: bool
    multiple_intervals: bool = False

    @property
    def width(self) -> float:
        if self.empty:
            return 0.0
        return self.f_high - self.f_low


def sweep_values(
    start: float, stop: float, steps: int, scale: str = "linear"
) -> np.ndarray:
    """Deterministic sweep grid: linear or logarithmic spacing."""
    if not (isinstance(steps, int) and steps >= 2):
        raise SweepError(f"steps must be an integer >= 2, got {steps}")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise SweepError("sweep endpoints must be finite")
    if scale == "linear":
        return np.linspace(start, stop, steps)
    if scale == "log":
        if start <= 0.0 or stop <= 0.0:
            raise SweepError("log-scale sweeps need positive endpoints")
        return np.geomspace(start, stop, steps)
    raise SweepError(f"scale must be 'linear' or 'log', got {scale!r}")


def _run_indexed(jobs: Sequence[Callable], workers: int) -> list:
    """Run jobs, return results ordered by job index regardless of workers."""
    if workers <= 1:
        return [job() for job in jobs]
    results = [None] * len(jobs)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        for i, fut in enumerate(futures):
            results[i] = fut.result()
    return results


def _simulate(scn: Scenario):
    model = build_system(scn)
    return integrate(model, scenario_settings(scn))


def _lock_verdict(scn: Scenario, f_hz: float) -> bool:
    """True when the scenario, retuned to f_hz, is certified locked.

    Analysis shortfalls (too few events, and so on) count as not locked;
    solver failures propagate.
    """
    try:
        point = scn.with_key("injection.freq_MHz", f_hz * 1e-6)
        trace = _simulate(point)
        return bool(detect_lock(trace).locked)
    except AnalysisError:
        return False


def find_lock_range(
    scenario: Scenario,
    f_min_hz: float,
    f_max_hz: float,
    coarse_steps: int = DEFAULT_COARSE_STEPS,
    refine_tol_hz: float | None = None,
    workers: int = 1,
) -> LockRange:
    """Locked-frequency band inside [f_min_hz, f_max_hz].

    A coarse scan of coarse_steps points (>= 16) finds locked runs; the
    widest run's edges are then bisected down to refine_tol_hz (default:
    1e-4 of the free-running frequency), always keeping the locked side,
    so the reported endpoints were themselves simulated and certified.
    """
    if scenario.topology != "injected":
        raise SweepError(
            f"lock ranges need an injected scenario, got {scenario.topology}"
        )
    if not (0.0 < f_min_hz < f_max_hz and math.isfinite(f_max_hz)):
        raise SweepError(
            f"need 0 < f_min < f_max, got {f_min_hz} and {f_max_hz}"
        )
    if coarse_steps < MIN_COARSE_STEPS:
        raise SweepError(
            f"coarse_steps must be at least {MIN_COARSE_STEPS}, got {coarse_steps}"
        )
    if refine_tol_hz is None:
        f_osc = free_running_period(scenario.oscillator_params()).frequency
        refine_tol_hz = 1e-4 * f_osc
    if not (refine_tol_hz > 0.0):
        raise SweepError(f"refine_tol_hz must be positive, got {refine_tol_hz}")

    grid = np.linspace(f_min_hz, f_max_hz, coarse_steps)
    verdicts = _run_indexed(
        [lambda f=float(f): _lock_verdict(scenario, f) for f in grid], workers
    )

    runs: list[tuple[int, int]] = []  # [first, last] inclusive
    start = None
    for i, ok in enumerate(verdicts):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(verdicts) - 1))

    if not runs:
        return LockRange(f_low=None, f_high=None, empty=True)

    widest = max(runs, key=lambda r: (grid[r[1]] - grid[r[0]], -r[0]))
    lo_idx, hi_idx = widest

    f_low = float(grid[lo_idx])
    if lo_idx > 0:
        lo, hi = float(grid[lo_idx - 1]), f_low  # lo unlocked, hi locked
        while hi - lo > refine_tol_hz:
            mid = 0.5 * (lo + hi)
            if _lock_verdict(scenario, mid):
                hi = mid
            else:
                lo = mid
        f_low = hi

    f_high = float(grid[hi_idx])
    if hi_idx < grid.size - 1:
        lo, hi = f_high, float(grid[hi_idx + 1])  # lo locked, hi unlocked
        while hi - lo > refine_tol_hz:
            mid = 0.5 * (lo + hi)
            if _lock_verdict(scenario, mid):
                lo = mid
            else:
                hi = mid
        f_high = lo

    return LockRange(
        f_low=f_low,
        f_high=f_high,
        empty=False,
        multiple_intervals=len(runs) > 1,
    )


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep request.

    param is a dotted scenario key path ('injection.amp_uA'); values are
    the grid in that key's units; metric is one of SWEEP_METRICS.
    """

    param: str
    values: tuple[float, ...]
    metric: str

    def __post_init__(self):
        if self.metric not in SWEEP_METRICS:
            raise SweepError(
                f"unknown metric {self.metric!r}; choose from "
                + ", ".join(sorted(SWEEP_METRICS))
            )
        if len(self.values) == 0:
            raise SweepError("sweep needs at least one value")
        for v in self.values:
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise SweepError(f"sweep values must be finite numbers, got {v!r}")


def _metric_f_osc(scn: Scenario, _opts) -> tuple:
    f = free_running_period(scn.oscillator_params()).frequency
    return (f * 1e-6,)


def _metric_lock_range(scn: Scenario, opts) -> tuple:
    f_osc = free_running_period(scn.oscillator_params()).frequency
    bracket = opts["lock_bracket"]
    rng = find_lock_range(
        scn,
        f_osc * (1.0 - bracket),
        f_osc * (1.0 + bracket),
        coarse_steps=opts["coarse_steps"],
        workers=1,
    )
    if rng.empty:
        return ("", "", "", "empty")
    status = "multiple_intervals" if rng.multiple_intervals else "ok"
    return (rng.f_low * 1e-6, rng.f_high * 1e-6, rng.width * 1e-6, status)


def _metric_lock_delay(scn: Scenario, _opts) -> tuple:
    result = detect_lock(_simulate(scn))
    if not result.locked:
        return ("", "unlocked")
    return (result.locking_delay * 1e9, "ok")


def _metric_locked_amplitude(scn: Scenario, _opts) -> tuple:
    result = detect_lock(_simulate(scn))
    return (result.locked_amplitude * 1e3, "ok" if result.locked else "unlocked")


def _metric_phase_diff(scn: Scenario, _opts) -> tuple:
    return (phase_difference(_simulate(scn)),)


#: metric name -> (value column headers, worker, emits own status flag)
SWEEP_METRICS: dict[str, tuple[tuple[str, ...], Callable, bool]] = {
    "f_osc": (("f_osc_MHz",), _metric_f_osc, False),
    "lock_range": (
        ("f_low_MHz", "f_high_MHz", "width_MHz"),
        _metric_lock_range,
        True,
    ),
    "lock_delay": (("delay_ns",), _metric_lock_delay, True),
    "locked_amplitude": (("amplitude_mV",), _metric_locked_amplitude, True),
    "phase_diff": (("delta_phi_deg",), _metric_phase_diff, False),
}


def sweep_1d(
    scenario: Scenario,
    spec: SweepSpec,
    workers: int = 1,
    lock_bracket: float = DEFAULT_LOCK_BRACKET,
    coarse_steps: int = 48,
) -> tuple[list[str], list[tuple]]:
    """Evaluate one metric over a grid of one scenario key.

    Returns (headers, rows): one row per grid value, ending with a status
    column ('ok', 'unlocked', 'empty', 'multiple_intervals', or the error
    type that killed that point). Cells of failed points are empty
    strings. lock_bracket sets the search band of the lock_range metric
    (f_osc*(1 +/- bracket), recomputed per point).
    """
    columns, worker_fn, has_status = SWEEP_METRICS[spec.metric]
    opts = {"lock_bracket": lock_bracket, "coarse_steps": coarse_steps}

    def job_for(value: float) -> Callable:
        def job() -> tuple:
            try:
                point = scenario.with_key(spec.param, float(value))
            except (ValueError, ScenarioError) as exc:
                raise SweepError(
                    f"cannot set {spec.param}={value!r}: {exc}"
                ) from exc
            cells = worker_fn(point, opts)
            if has_status:
                return cells
            return cells + ("ok",)

        def guarded() -> tuple:
            try:
                return job()
            except SweepError:
                raise
            except ScnoscError as exc:
                return ("",) * len(columns) + (type(exc).__name__,)

        return guarded

    rows_raw = _run_indexed([job_for(v) for v in spec.values], workers)
    headers = [spec.param, *columns, "status"]
    rows = [
        (float(v), *cells) for v, cells in zip(spec.values, rows_raw)
    ]
    return headers, rows


def lock_map(
    scenario: Scenario,
    coupling_values: Sequence[float],
    f_values_hz: Sequence[float],
    workers: int = 1,
) -> tuple[list[str], list[tuple]]:
    """Boolean lock matrix over (coupling value, injection frequency).

    The scenario must use element-coupled injection; rows scan the
    coupling element value (in its scenario key units), columns the
    injection frequency. Cells are 1 (locked), 0 (not locked) or 'error'.
    """
    if scenario.topology != "injected" or scenario.mode != "coupled":
        raise SweepError("lock maps need coupled-mode injected scenarios")
    if len(coupling_values) == 0 or len(f_values_hz) == 0:
        raise SweepError("lock maps need at least one row and one column")
    value_key = _KIND_VALUE_KEY[scenario.kind]
    param = f"coupling.{value_key}"

    def job_for(cv: float, f_hz: float) -> Callable:
        def job():
            try:
                point = scenario.with_key(param, float(cv))
                return 1 if _lock_verdict(point, float(f_hz)) else 0
            except ScnoscError:
                return "error"

        return job

    jobs = [job_for(cv, f) for cv in coupling_values for f in f_values_hz]
    flat = _run_indexed(jobs, workers)

    n_cols = len(f_values_hz)
    headers = [value_key, *(repr(float(f) * 1e-6) for f in f_values_hz)]
    rows = []
    for i, cv in enumerate(coupling_values):
        rows.append((float(cv), *flat[i * n_cols : (i + 1) * n_cols]))
    return headers, rows
