"""Circuit topologies built from shunted nanowire oscillators.

Every supported topology — a standalone oscillator, an oscillator with an
injected tone (added to the bias current directly, or driven through a
series coupling element), and a pair of oscillators joined by a coupling
element — is piecewise linear: between switching events the state obeys

    dx/dt = A(phases) @ x + b(phases) + g(phases) * u(t)

with u(t) = amplitude * sin(2*pi*f*t + phase0) the injection waveform (a
current for direct injection, a source voltage otherwise; zero when there
is no injection). Node voltages and the coupler current are affine in the
state and in u, with coefficients independent of the phases because a
nanowire's resistance never appears in its node's KCL.

The builders precompute A/b/g for every phase configuration (a bitmask,
bit k set when nanowire k is normal) plus the affine output maps, which is
all the solver kernel needs.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .device import (
    NanowirePhase,
    OscillatorParams,
    nanowire_resistance,
    oscillation_condition,
)

__all__ = [
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
]


class CouplingKind(enum.Enum):
    CAPACITIVE = "capacitive"
    RESISTIVE = "resistive"
    INDUCTIVE = "inductive"


@dataclass(frozen=True)
class CouplingElement:
    """A two-terminal linear coupling element.

    value is farads, ohms or henries depending on kind; always > 0.
    """

    kind: CouplingKind
    value: float

    def __post_init__(self):
        if not (self.value > 0.0 and math.isfinite(self.value)):
            raise ValueError(f"coupling value must be positive and finite, got {self.value}")


class InjectionMode(enum.Enum):
    DIRECT = "direct"
    COUPLED = "coupled"


@dataclass(frozen=True)
class InjectionSpec:
    """Sinusoidal injection: amplitude*sin(2*pi*f_inj*t + phase0).

    amplitude is amperes for DIRECT mode and volts for COUPLED mode, >= 0.
    element is required exactly when mode is COUPLED.
    """

    mode: InjectionMode
    amplitude: float
    f_inj: float
    phase0: float = 0.0
    element: CouplingElement | None = None

    def __post_init__(self):
        if not (self.amplitude >= 0.0 and math.isfinite(self.amplitude)):
            raise ValueError(f"amplitude must be >= 0 and finite, got {self.amplitude}")
        if not (self.f_inj > 0.0 and math.isfinite(self.f_inj)):
            raise ValueError(f"f_inj must be positive and finite, got {self.f_inj}")
        if not math.isfinite(self.phase0):
            raise ValueError(f"phase0 must be finite, got {self.phase0}")
        if self.mode is InjectionMode.COUPLED and self.element is None:
            raise ValueError("coupled injection requires a coupling element")
        if self.mode is InjectionMode.DIRECT and self.element is not None:
            raise ValueError("direct injection takes no coupling element")

    def waveform(self, t):
        """Injection waveform at time(s) t; ndarray in, ndarray out."""
        return self.amplitude * np.sin(2.0 * math.pi * self.f_inj * t + self.phase0)


@dataclass
class SystemModel:
    """Precompiled piecewise-linear system, ready for the solver kernel.

    a_mats[cfg], b_vecs[cfg], g_vecs[cfg] define dx/dt for phase bitmask
    cfg.  p_vout/q_vout/s_vout map (x, u) to per-oscillator node voltages:
    v = p_vout @ x + q_vout + s_vout*u.  p_cpl/q_cpl/s_cpl do the same for
    the coupler current when a coupling element is present.
    """

    kind: str
    oscillators: tuple[OscillatorParams, ...]
    injection: InjectionSpec | None
    coupling: CouplingElement | None
    state_labels: tuple[str, ...]
    nw_state_index: np.ndarray
    x0: np.ndarray
    a_mats: np.ndarray
    b_vecs: np.ndarray
    g_vecs: np.ndarray
    p_vout: np.ndarray
    q_vout: np.ndarray
    s_vout: np.ndarray
    p_cpl: np.ndarray | None = None
    q_cpl: float = 0.0
    s_cpl: float = 0.0
    cap_state_index: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n_states(self) -> int:
        return self.x0.shape[0]

    @property
    def n_nanowires(self) -> int:
        return self.nw_state_index.shape[0]

    def phase_config(self, phases: Sequence[NanowirePhase]) -> int:
        if len(phases) != self.n_nanowires:
            raise ValueError(
                f"expected {self.n_nanowires} phases, got {len(phases)}"
            )
        cfg = 0
        for k, ph in enumerate(phases):
            if ph is NanowirePhase.NORMAL:
                cfg |= 1 << k
        return cfg

    def drive(self, t):
        """Injection waveform value(s) at t (0 when no injection)."""
        if self.injection is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return self.injection.waveform(t)


def _warn_if_not_oscillating(ops: Sequence[OscillatorParams]) -> None:
    for k, op in enumerate(ops):
        if not oscillation_condition(op):
            warnings.warn(
                f"oscillator {k + 1} parameters do not free-run "
                "(forced/static response only)",
                UserWarning,
                stacklevel=3,
            )


def _assemble(
    ops: Sequence[OscillatorParams],
    nw_rows: Sequence[int],
    vout_maps: Sequence[tuple[np.ndarray, float, float]],
    extra_rows: Sequence[tuple[int, np.ndarray, float, float, float]],
    n: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Build per-configuration (A, b, g).

    vout_maps[k] = (pv, qv, sv): node voltage of oscillator k.
    extra_rows: (row, pr, qr, sr, scale) meaning d(state[row])/dt =
    scale * (pr @ x + qr + sr*u); used for coupler states.
    """
    n_nw = len(ops)
    ncfg = 1 << n_nw
    a = np.zeros((ncfg, n, n))
    b = np.zeros((ncfg, n))
    g = np.zeros((ncfg, n))
    for cfg in range(ncfg):
        for k, op in enumerate(ops):
            phase = (
                NanowirePhase.NORMAL
                if (cfg >> k) & 1
                else NanowirePhase.SUPERCONDUCTING
            )
            r = nanowire_resistance(phase, op.nw)
            l = op.nw.l_nw
            row = nw_rows[k]
            pv, qv, sv = vout_maps[k]
            for j in range(n):
                a[cfg, row, j] = pv[j] / l
            a[cfg, row, row] = (pv[row] - r) / l
            b[cfg, row] = qv / l
            g[cfg, row] = sv / l
        for row, pr, qr, sr, scale in extra_rows:
            for j in range(n):
                a[cfg, row, j] = pr[j] * scale
            b[cfg, row] = qr * scale
            g[cfg, row] = sr * scale
    return a, b, g


def build_standalone(op: OscillatorParams) -> SystemModel:
    """Single shunted oscillator; state is the nanowire current."""
    _warn_if_not_oscillating([op])
    pv = np.array([-op.r_s])
    qv = op.r_s * op.i_bias
    a, b, g = _assemble([op], [0], [(pv, qv, 0.0)], [], 1)
    return SystemModel(
        kind="standalone",
        oscillators=(op,),
        injection=None,
        coupling=None,
        state_labels=("i_nw",),
        nw_state_index=np.array([0], dtype=np.int64),
        x0=np.zeros(1),
        a_mats=a,
        b_vecs=b,
        g_vecs=g,
        p_vout=pv.reshape(1, 1).copy(),
        q_vout=np.array([qv]),
        s_vout=np.array([0.0]),
    )


def build_injected(op: OscillatorParams, inj: InjectionSpec) -> SystemModel:
    """Oscillator with a sinusoidal injection.

    DIRECT mode adds the tone to the bias current. COUPLED mode places a
    voltage source u(t) in series with the coupling element, driving the
    output node.
    """
    _warn_if_not_oscillating([op])
    rs = op.r_s
    ib = op.i_bias

    if inj.mode is InjectionMode.DIRECT:
        pv = np.array([-rs])
        qv = rs * ib
        sv = rs
        a, b, g = _assemble([op], [0], [(pv, qv, sv)], [], 1)
        return SystemModel(
            kind="injected",
            oscillators=(op,),
            injection=inj,
            coupling=None,
            state_labels=("i_nw",),
            nw_state_index=np.array([0], dtype=np.int64),
            x0=np.zeros(1),
            a_mats=a,
            b_vecs=b,
            g_vecs=g,
            p_vout=pv.reshape(1, 1).copy(),
            q_vout=np.array([qv]),
            s_vout=np.array([sv]),
        )

    element = inj.element
    assert element is not None
    if element.kind is CouplingKind.CAPACITIVE:
        # x = [i_nw, v_cap]; node voltage pinned by source minus capacitor.
        c = element.value
        pv = np.array([0.0, -1.0])
        qv, sv = 0.0, 1.0
        # i_cpl = i_nw + (u - v_cap)/r_s - i_bias
        pc = np.array([1.0, -1.0 / rs])
        qc, sc = -ib, 1.0 / rs
        extra = [(1, pc, qc, sc, 1.0 / c)]
        a, b, g = _assemble([op], [0], [(pv, qv, sv)], extra, 2)
        return SystemModel(
            kind="injected",
            oscillators=(op,),
            injection=inj,
            coupling=element,
            state_labels=("i_nw", "v_cap"),
            nw_state_index=np.array([0], dtype=np.int64),
            x0=np.zeros(2),
            a_mats=a,
            b_vecs=b,
            g_vecs=g,
            p_vout=pv.reshape(1, 2).copy(),
            q_vout=np.array([qv]),
            s_vout=np.array([sv]),
            p_cpl=pc,
            q_cpl=qc,
            s_cpl=sc,
            cap_state_index=1,
        )
    if element.kind is CouplingKind.INDUCTIVE:
        # x = [i_nw, i_cpl]; coupler inductor integrates u - v_out.
        lc = element.value
        pv = np.array([-rs, rs])
        qv, sv = rs * ib, 0.0
        extra = [(1, np.array([rs, -rs]), -qv, 1.0, 1.0 / lc)]
        a, b, g = _assemble([op], [0], [(pv, qv, sv)], extra, 2)
        return SystemModel(
            kind="injected",
            oscillators=(op,),
            injection=inj,
            coupling=element,
            state_labels=("i_nw", "i_cpl"),
            nw_state_index=np.array([0], dtype=np.int64),
            x0=np.zeros(2),
            a_mats=a,
            b_vecs=b,
            g_vecs=g,
            p_vout=pv.reshape(1, 2).copy(),
            q_vout=np.array([qv]),
            s_vout=np.array([sv]),
            p_cpl=np.array([0.0, 1.0]),
            q_cpl=0.0,
            s_cpl=0.0,
        )
    # Resistive: purely algebraic divider between shunt and coupler.
    rc = element.value
    beta = rc / (rc + rs)
    pv = np.array([-beta * rs])
    qv = beta * rs * ib
    sv = beta * rs / rc
    a, b, g = _assemble([op], [0], [(pv, qv, sv)], [], 1)
    return SystemModel(
        kind="injected",
        oscillators=(op,),
        injection=inj,
        coupling=element,
        state_labels=("i_nw",),
        nw_state_index=np.array([0], dtype=np.int64),
        x0=np.zeros(1),
        a_mats=a,
        b_vecs=b,
        g_vecs=g,
        p_vout=pv.reshape(1, 1).copy(),
        q_vout=np.array([qv]),
        s_vout=np.array([sv]),
        p_cpl=(-pv / rc).copy(),
        q_cpl=-qv / rc,
        s_cpl=(1.0 - sv) / rc,
    )


def build_pair(
    op1: OscillatorParams,
    op2: OscillatorParams,
    element: CouplingElement,
    i_nw2_initial: float | None = None,
) -> SystemModel:
    """Two oscillators joined output-node to output-node by one element.

    The coupler current i_cpl flows from node 1 into node 2. Oscillator 2
    starts at i_nw2_initial (default 0.5*i_c of oscillator 2) to break the
    symmetric initial condition; oscillator 1 starts at zero current.

    The affine maps are written so that identical oscillators produce
    mirror-identical coefficients bit for bit, keeping an exactly symmetric
    start exactly symmetric for all time.
    """
    _warn_if_not_oscillating([op1, op2])
    if i_nw2_initial is None:
        i_nw2_initial = 0.5 * op2.nw.i_c
    g1 = 1.0 / op1.r_s
    g2 = 1.0 / op2.r_s
    ib1 = op1.i_bias
    ib2 = op2.i_bias

    if element.kind is CouplingKind.RESISTIVE:
        # x = [i1, i2]; both node voltages solve a 2x2 conductance system.
        gc = 1.0 / element.value
        a1 = g1 + gc
        a2 = g2 + gc
        det = a1 * a2 - gc * gc
        w11 = a2 / det
        w12 = gc / det
        w21 = gc / det
        w22 = a1 / det
        pv1 = np.array([-w11, -w12])
        qv1 = w11 * ib1 + w12 * ib2
        pv2 = np.array([-w21, -w22])
        qv2 = w21 * ib1 + w22 * ib2
        pc = np.array([gc * (pv1[0] - pv2[0]), gc * (pv1[1] - pv2[1])])
        qc = gc * (qv1 - qv2)
        a, b, g = _assemble([op1, op2], [0, 1], [(pv1, qv1, 0.0), (pv2, qv2, 0.0)], [], 2)
        n = 2
        labels = ("i_nw1", "i_nw2")
        x0 = np.array([0.0, i_nw2_initial])
        cap_idx = None
        extra_pc, extra_qc = pc, qc
        p_vout = np.stack([pv1, pv2])
        q_vout = np.array([qv1, qv2])
    elif element.kind is CouplingKind.CAPACITIVE:
        # x = [i1, i2, v_cap] with v_cap = v1 - v2; i_cpl = C dv_cap/dt.
        c = element.value
        gsum = g1 + g2
        pv1 = np.array([-1.0 / gsum, -1.0 / gsum, g2 / gsum])
        pv2 = np.array([-1.0 / gsum, -1.0 / gsum, -g1 / gsum])
        qv1 = (ib1 + ib2) / gsum
        qv2 = (ib1 + ib2) / gsum
        # symmetrized coupler current: mean of the two KCL expressions
        pc = np.array(
            [
                0.5 * (-1.0 - g1 * pv1[0] + g2 * pv2[0]),
                0.5 * (1.0 - g1 * pv1[1] + g2 * pv2[1]),
                0.5 * (-g1 * pv1[2] + g2 * pv2[2]),
            ]
        )
        qc = 0.5 * ((ib1 - g1 * qv1) - (ib2 - g2 * qv2))
        extra = [(2, pc, qc, 0.0, 1.0 / c)]
        a, b, g = _assemble(
            [op1, op2], [0, 1], [(pv1, qv1, 0.0), (pv2, qv2, 0.0)], extra, 3
        )
        n = 3
        labels = ("i_nw1", "i_nw2", "v_cap")
        x0 = np.array([0.0, i_nw2_initial, 0.0])
        cap_idx = 2
        extra_pc, extra_qc = pc, qc
        p_vout = np.stack([pv1, pv2])
        q_vout = np.array([qv1, qv2])
    else:
        # x = [i1, i2, i_cpl]; coupler inductor integrates v1 - v2.
        lc = element.value
        rs1 = op1.r_s
        rs2 = op2.r_s
        pv1 = np.array([-rs1, 0.0, -rs1])
        qv1 = rs1 * ib1
        pv2 = np.array([0.0, -rs2, rs2])
        qv2 = rs2 * ib2
        pr = np.array([pv1[0] - pv2[0], pv1[1] - pv2[1], pv1[2] - pv2[2]])
        extra = [(2, pr, qv1 - qv2, 0.0, 1.0 / lc)]
        a, b, g = _assemble(
            [op1, op2], [0, 1], [(pv1, qv1, 0.0), (pv2, qv2, 0.0)], extra, 3
        )
        n = 3
        labels = ("i_nw1", "i_nw2", "i_cpl")
        x0 = np.array([0.0, i_nw2_initial, 0.0])
        cap_idx = None
        extra_pc = np.array([0.0, 0.0, 1.0])
        extra_qc = 0.0
        p_vout = np.stack([pv1, pv2])
        q_vout = np.array([qv1, qv2])

    return SystemModel(
        kind="pair",
        oscillators=(op1, op2),
        injection=None,
        coupling=element,
        state_labels=labels,
        nw_state_index=np.array([0, 1], dtype=np.int64),
        x0=x0,
        a_mats=a,
        b_vecs=b,
        g_vecs=g,
        p_vout=p_vout,
        q_vout=q_vout,
        s_vout=np.zeros(len(p_vout)),
        p_cpl=extra_pc,
        q_cpl=extra_qc,
        s_cpl=0.0,
        cap_state_index=cap_idx,
    )


def build_system(config) -> SystemModel:
    """Build the SystemModel described by a resolved Scenario."""
    op = config.oscillator_params()
    if config.topology == "standalone":
        return build_standalone(op)
    if config.topology == "injected":
        return build_injected(op, config.injection_spec())
    if config.topology == "pair":
        element = config.coupling_element()
        init2 = config.init_inw2_frac * op.nw.i_c
        return build_pair(op, op, element, init2)
    raise ValueError(f"unknown topology {config.topology!r}")


def derivatives(
    model: SystemModel,
    state: np.ndarray,
    phases: Sequence[NanowirePhase],
    t: float,
) -> np.ndarray:
    """Right-hand side dx/dt for the given phases at time t."""
    state = np.asarray(state, dtype=float)
    if state.shape != (model.n_states,):
        raise ValueError(f"state must have shape ({model.n_states},), got {state.shape}")
    cfg = model.phase_config(phases)
    u = float(model.drive(t))
    return model.a_mats[cfg] @ state + model.b_vecs[cfg] + model.g_vecs[cfg] * u


def output_voltage(
    model: SystemModel,
    state: np.ndarray,
    phases: Sequence[NanowirePhase],
    t: float,
) -> np.ndarray:
    """Per-oscillator output-node voltages for the given state.

    The phases argument is accepted for signature symmetry with
    derivatives(); node voltages are KCL quantities and do not depend on
    the wires' internal resistance.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (model.n_states,):
        raise ValueError(f"state must have shape ({model.n_states},), got {state.shape}")
    model.phase_config(phases)  # validates length
    u = float(model.drive(t))
    return model.p_vout @ state + model.q_vout + model.s_vout * u


def coupler_current(model: SystemModel, state: np.ndarray, t: float) -> float:
    """Current through the coupling element (node 1 toward node 2)."""
    if model.p_cpl is None:
        raise ValueError("model has no coupling element")
    state = np.asarray(state, dtype=float)
    u = float(model.drive(t))
    return float(model.p_cpl @ state + model.q_cpl + model.s_cpl * u)
