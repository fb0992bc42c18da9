"""Hybrid fixed-step integrator for the piecewise-linear oscillator models.

integrate() drives the compiled RK4/bisection kernel and packages the
result as a Trace: uniformly sampled series plus exact per-nanowire event
timestamps. Sampling is denser than the step (record_stride samples per
step, linearly interpolated) so that spectra and peak-to-peak statistics
have comfortable resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._kernel import integrate_core
from .circuits import CouplingElement, CouplingKind, InjectionSpec, SystemModel
from .device import OscillatorParams, free_running_period, oscillation_condition
from .errors import NonFiniteStateError, SolverError, StepSizeError

__all__ = ["SolverSettings", "Trace", "integrate", "scenario_settings"]

#: samples recorded per free-running period when the scenario does not say
DEFAULT_POINTS_PER_PERIOD = 2000


@dataclass(frozen=True)
class SolverSettings:
    """Fixed-step integration settings.

    dt: integration step (s).
    t_stop: end of the simulated window (s).
    event_tol: bisection window for event times (s), 0 < event_tol < dt.
    record_stride: uniform samples recorded per integration step, >= 1.
    """

    dt: float
    t_stop: float
    event_tol: float
    record_stride: int = 1

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not (self.t_stop > 0.0 and math.isfinite(self.t_stop)):
            raise ValueError(f"t_stop must be positive and finite, got {self.t_stop}")
        if not (0.0 < self.event_tol < self.dt):
            raise ValueError(
                f"event_tol must satisfy 0 < event_tol < dt, got {self.event_tol}"
            )
        if not (isinstance(self.record_stride, int) and self.record_stride >= 1):
            raise ValueError(
                f"record_stride must be an integer >= 1, got {self.record_stride}"
            )

    @property
    def dt_record(self) -> float:
        return self.dt / self.record_stride


@dataclass
class Trace:
    """Simulation record on the uniform grid t = k*dt_record.

    Series are row-per-oscillator (or row-per-nanowire) 2-D arrays.
    events_up[k] / events_down[k] hold nanowire k's superconducting->normal
    and normal->superconducting transition times; within one nanowire the
    two alternate, starting with an up transition.
    """

    dt_record: float
    t_stop: float
    kind: str
    i_nw: np.ndarray
    phases: np.ndarray
    v_out: np.ndarray
    injection: np.ndarray | None
    i_coupler: np.ndarray | None
    v_capacitor: np.ndarray | None
    events_up: tuple[np.ndarray, ...]
    events_down: tuple[np.ndarray, ...]
    oscillators: tuple[OscillatorParams, ...]
    injection_spec: InjectionSpec | None
    coupling: CouplingElement | None

    @cached_property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt_record

    @property
    def n_samples(self) -> int:
        return self.i_nw.shape[1]

    @property
    def n_nanowires(self) -> int:
        return self.i_nw.shape[0]


def _step_bounds(model: SystemModel) -> list[tuple[str, float]]:
    """Named upper bounds on dt; the smallest one is the binding constraint."""
    bounds = []
    for k, op in enumerate(model.oscillators, start=1):
        bounds.append((f"tau_normal/10 of oscillator {k}", op.tau_normal / 10.0))
        bounds.append((f"tau_super/10 of oscillator {k}", op.tau_super / 10.0))
    if model.injection is not None:
        bounds.append(
            (
                "1/(50*f_inj)/10 for the injection frequency",
                1.0 / (500.0 * model.injection.f_inj),
            )
        )
    return bounds


def integrate(model: SystemModel, settings: SolverSettings) -> Trace:
    """Integrate the model over [0, t_stop].

    Rejects dt above min(tau_normal, tau_super, 1/(50*f_inj))/10 with a
    StepSizeError naming the binding constraint. Raises
    NonFiniteStateError at the first NaN/Inf in the state.
    """
    name, bound = min(_step_bounds(model), key=lambda nb: nb[1])
    if settings.dt > bound:
        raise StepSizeError(
            f"dt={settings.dt:.6e} s exceeds the {name} limit of {bound:.6e} s"
        )

    dt_rec = settings.dt_record
    n_rec = int(math.floor(settings.t_stop / dt_rec + 1e-9))
    if n_rec < 1:
        raise SolverError("t_stop shorter than one record interval")

    # generous event capacity: ~2 events per nanowire per period, 8x margin
    f_est = 0.0
    for op in model.oscillators:
        if oscillation_condition(op):
            f_est = max(f_est, free_running_period(op).frequency)
    if model.injection is not None:
        f_est = max(f_est, model.injection.f_inj)
    max_events = int(16 * model.n_nanowires * settings.t_stop * f_est) + 4096

    inj = model.injection
    amp = inj.amplitude if inj is not None else 0.0
    om = 2.0 * math.pi * inj.f_inj if inj is not None else 0.0
    ph = inj.phase0 if inj is not None else 0.0

    status, t_last, rec_x, rec_cfg, ev_t, ev_nw, ev_up, n_ev = integrate_core(
        np.ascontiguousarray(model.a_mats),
        np.ascontiguousarray(model.b_vecs),
        np.ascontiguousarray(model.g_vecs),
        np.ascontiguousarray(model.nw_state_index),
        np.array([op.nw.i_c for op in model.oscillators]),
        np.array([op.nw.i_r for op in model.oscillators]),
        amp,
        om,
        ph,
        np.ascontiguousarray(model.x0, dtype=np.float64),
        0,
        settings.dt,
        settings.event_tol,
        dt_rec,
        n_rec,
        max_events,
    )
    if status == 2:
        raise NonFiniteStateError(t_last)
    if status == 3:
        raise SolverError(
            f"event capacity {max_events} exhausted at t={t_last:.6e} s; "
            "the system is switching far faster than the free-running estimate"
        )

    times = np.arange(n_rec + 1) * dt_rec
    u = inj.waveform(times) if inj is not None else None

    vout = rec_x @ model.p_vout.T + model.q_vout
    if u is not None:
        vout = vout + np.outer(u, model.s_vout)
    vout = np.ascontiguousarray(vout.T)

    i_cpl = None
    v_cap = None
    if model.p_cpl is not None:
        i_cpl = rec_x @ model.p_cpl + model.q_cpl
        if u is not None:
            i_cpl = i_cpl + model.s_cpl * u
    if model.cap_state_index is not None:
        v_cap = np.ascontiguousarray(rec_x[:, model.cap_state_index])

    n_nw = model.n_nanowires
    i_nw = np.ascontiguousarray(rec_x[:, model.nw_state_index].T)
    phases = np.empty((n_nw, n_rec + 1), dtype=np.uint8)
    for k in range(n_nw):
        phases[k] = (rec_cfg >> k) & 1

    ev_t = ev_t[:n_ev]
    ev_nw = ev_nw[:n_ev]
    ev_up = ev_up[:n_ev]
    events_up = tuple(
        np.ascontiguousarray(ev_t[(ev_nw == k) & (ev_up == 1)]) for k in range(n_nw)
    )
    events_down = tuple(
        np.ascontiguousarray(ev_t[(ev_nw == k) & (ev_up == 0)]) for k in range(n_nw)
    )

    return Trace(
        dt_record=dt_rec,
        t_stop=n_rec * dt_rec,
        kind=model.kind,
        i_nw=i_nw,
        phases=phases,
        v_out=vout,
        injection=u,
        i_coupler=i_cpl,
        v_capacitor=v_cap,
        events_up=events_up,
        events_down=events_down,
        oscillators=model.oscillators,
        injection_spec=inj,
        coupling=model.coupling,
    )


def scenario_settings(scn) -> SolverSettings:
    """SolverSettings for a resolved Scenario (key units -> SI)."""
    dt = scn.dt_ps * 1e-12
    t_stop = scn.tstop_ns * 1e-9
    op = scn.oscillator_params()
    if oscillation_condition(op):
        t_ref = free_running_period(op).period
    elif scn.freq_MHz is not None:
        t_ref = 1.0 / (scn.freq_MHz * 1e6)
    else:
        t_ref = 10.0 * op.tau_super
    stride = max(1, math.ceil(scn.points * dt / t_ref))
    return SolverSettings(
        dt=dt, t_stop=t_stop, event_tol=dt * 1e-6, record_stride=stride
    )
