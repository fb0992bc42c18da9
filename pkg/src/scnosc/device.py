"""Lumped hysteretic model of a current-biased superconducting nanowire.

The nanowire is a series inductance/resistance branch whose resistance
switches between zero (superconducting) and a fixed normal-state value.
The branch switches up when its current reaches the critical current i_c
and back down when the current falls to the retrapping current i_r < i_c.
Shunted with a resistor and biased above i_c, the hysteresis gap turns the
circuit into a relaxation oscillator whose period has a closed form used
throughout the test suite as an independent oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import NotOscillatingError

__all__ = [
    "NanowirePhase",
    "NanowireParams",
    "OscillatorParams",
    "FreeRunningPeriod",
    "nanowire_resistance",
    "phase_transition",
    "oscillation_condition",
    "free_running_period",
    "dc_iv_curve",
]


class NanowirePhase(enum.Enum):
    SUPERCONDUCTING = "superconducting"
    NORMAL = "normal"


@dataclass(frozen=True)
class NanowireParams:
    """Static nanowire parameters, SI units.

    i_c: critical current (A); switching threshold out of the superconducting phase.
    i_r: retrapping current (A); must satisfy 0 < i_r < i_c.
    r_nw: normal-state resistance (ohm), > 0.
    l_nw: nanowire (kinetic) inductance (H), > 0.
    """

    i_c: float
    i_r: float
    r_nw: float
    l_nw: float

    def __post_init__(self):
        if not (self.i_c > 0.0 and math.isfinite(self.i_c)):
            raise ValueError(f"i_c must be positive and finite, got {self.i_c}")
        if not (0.0 < self.i_r < self.i_c):
            raise ValueError(
                f"i_r must satisfy 0 < i_r < i_c, got i_r={self.i_r}, i_c={self.i_c}"
            )
        if not (self.r_nw > 0.0 and math.isfinite(self.r_nw)):
            raise ValueError(f"r_nw must be positive and finite, got {self.r_nw}")
        if not (self.l_nw > 0.0 and math.isfinite(self.l_nw)):
            raise ValueError(f"l_nw must be positive and finite, got {self.l_nw}")


@dataclass(frozen=True)
class OscillatorParams:
    """A nanowire with its shunt resistor and DC bias current.

    r_s: shunt resistance (ohm), > 0.
    i_bias: DC bias current (A), > 0.
    """

    nw: NanowireParams
    r_s: float
    i_bias: float

    def __post_init__(self):
        if not (self.r_s > 0.0 and math.isfinite(self.r_s)):
            raise ValueError(f"r_s must be positive and finite, got {self.r_s}")
        if not (self.i_bias > 0.0 and math.isfinite(self.i_bias)):
            raise ValueError(f"i_bias must be positive and finite, got {self.i_bias}")

    @property
    def tau_normal(self) -> float:
        """Current relaxation time constant while the wire is normal."""
        return self.nw.l_nw / (self.r_s + self.nw.r_nw)

    @property
    def tau_super(self) -> float:
        """Current recovery time constant while the wire is superconducting."""
        return self.nw.l_nw / self.r_s

    @property
    def i_settle(self) -> float:
        """Asymptotic nanowire current if the wire stayed normal forever."""
        return self.r_s * self.i_bias / (self.r_s + self.nw.r_nw)


def nanowire_resistance(phase: NanowirePhase, p: NanowireParams) -> float:
    """Resistance of the wire in the given phase: 0 when superconducting."""
    return 0.0 if phase is NanowirePhase.SUPERCONDUCTING else p.r_nw


def phase_transition(
    phase: NanowirePhase, i_nw: float, p: NanowireParams
) -> NanowirePhase:
    """Next phase for a wire carrying current i_nw.

    Thresholds are inclusive: i_nw >= i_c switches up, i_nw <= i_r retraps.
    Currents strictly inside the hysteresis band leave the phase unchanged,
    so the map is idempotent for any fixed current.
    """
    if phase is NanowirePhase.SUPERCONDUCTING:
        if i_nw >= p.i_c:
            return NanowirePhase.NORMAL
        return phase
    if i_nw <= p.i_r:
        return NanowirePhase.SUPERCONDUCTING
    return phase


def oscillation_condition(op: OscillatorParams) -> bool:
    """True when the shunted wire free-runs.

    Two strict inequalities must hold: the bias must exceed the critical
    current (the superconducting recovery can always re-arm the switch), and
    the normal-phase settling current r_s*i_bias/(r_s+r_nw) must stay below
    the retrapping current (the normal phase can always end).
    """
    return op.i_bias > op.nw.i_c and op.i_settle < op.nw.i_r


class FreeRunningPeriod(NamedTuple):
    period: float
    frequency: float
    t_rise: float
    t_fall: float


def free_running_period(op: OscillatorParams) -> FreeRunningPeriod:
    """Closed-form free-running period of the relaxation oscillation.

    The two dwell times follow from the piecewise-exponential nanowire
    current. Normal phase (output voltage rising): current decays from i_c
    toward i_settle with tau = l_nw/(r_s+r_nw), ending at i_r. Superconducting
    phase (voltage falling): current recovers from i_r toward i_bias with
    tau = l_nw/r_s, ending at i_c.

    Raises NotOscillatingError when oscillation_condition fails, naming the
    violated inequality.
    """
    nw = op.nw
    if op.i_bias <= nw.i_c:
        raise NotOscillatingError(
            f"bias current {op.i_bias} A does not exceed critical current "
            f"{nw.i_c} A; the superconducting phase never re-arms the switch"
        )
    if op.i_settle >= nw.i_r:
        raise NotOscillatingError(
            f"normal-phase settling current {op.i_settle} A is not below the "
            f"retrapping current {nw.i_r} A; the normal phase never ends"
        )
    i_inf = op.i_settle
    t_rise = op.tau_normal * math.log((nw.i_c - i_inf) / (nw.i_r - i_inf))
    t_fall = op.tau_super * math.log((op.i_bias - nw.i_r) / (op.i_bias - nw.i_c))
    period = t_rise + t_fall
    return FreeRunningPeriod(period, 1.0 / period, t_rise, t_fall)


def _validate_ramp(i_points: Sequence[float]) -> None:
    """Reject anything that is not a monotone up-then-down ramp."""
    descending = False
    prev = None
    for k, i in enumerate(i_points):
        if not math.isfinite(i):
            raise ValueError(f"ramp point {k} is not finite: {i}")
        if prev is not None:
            if i < prev:
                descending = True
            elif i > prev and descending:
                raise ValueError(
                    f"ramp rises again at point {k}; expected a monotone "
                    "up-then-down sequence"
                )
        prev = i


def dc_iv_curve(
    p: NanowireParams,
    i_points: Sequence[float],
    r_s: float | None = None,
) -> list[tuple[float, float]]:
    """Quasi-static I-V response to a monotone up-then-down current ramp.

    The wire starts superconducting. On the ascending half it switches
    normal at the first point with I >= i_c; on the descending half it
    retraps once, which is where a swept measurement observes it: bare
    wires retrap at I <= i_r, shunted wires at I <= i_r*(r_s+r_nw)/r_s
    (bias level at which the wire's share of the current falls to i_r).
    One transition per ramp direction: the curve is the classic hysteresis
    loop, not a re-entrant flicker. Voltages: 0 while superconducting;
    r_nw*I bare; I*(r_s*r_nw/(r_s+r_nw)) shunted (the wire in parallel
    with its shunt).

    Returns a list of (I, V) pairs, one per ramp point.
    """
    if len(i_points) < 2:
        raise ValueError("ramp needs at least two points")
    _validate_ramp(i_points)
    if r_s is not None and not (r_s > 0.0 and math.isfinite(r_s)):
        raise ValueError(f"r_s must be positive and finite, got {r_s}")

    if r_s is None:
        r_normal = p.r_nw
        i_retrap = p.i_r
    else:
        r_normal = r_s * p.r_nw / (r_s + p.r_nw)
        i_retrap = p.i_r * (r_s + p.r_nw) / r_s

    phase = NanowirePhase.SUPERCONDUCTING
    out: list[tuple[float, float]] = []
    prev = None
    descending = False
    for i in i_points:
        if prev is not None and i < prev:
            descending = True
        if phase is NanowirePhase.SUPERCONDUCTING:
            if not descending and i >= p.i_c:
                phase = NanowirePhase.NORMAL
        elif descending and i <= i_retrap:
            phase = NanowirePhase.SUPERCONDUCTING
        v = 0.0 if phase is NanowirePhase.SUPERCONDUCTING else r_normal * i
        out.append((float(i), v))
        prev = i
    return out
