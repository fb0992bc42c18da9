"""Trace post-processing: spectra, locking verdicts, pair phase offsets.

Frequency estimates come from a power-of-two FFT over a trailing,
decimated analysis window; locking verdicts come from the exact event
timestamps, which are far sharper than any bin width. The two routes are
deliberately independent and the tests lean on that.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AnalysisError,
    InsufficientEventsError,
    MissingInjectionError,
    UnsynchronizedPairError,
)
from .solver import Trace

__all__ = [
    "WindowKind",
    "Spectrum",
    "LockResult",
    "fft_spectrum",
    "dominant_peak",
    "trace_spectrum",
    "event_periods",
    "detect_lock",
    "phase_difference",
]

DEFAULT_N_POINTS = 1024
DEFAULT_SETTLE_FRACTION = 0.5
DEFAULT_TOL_F = 1e-3
DEFAULT_TOL_DRIFT_DEG = 1.0
DEFAULT_BAND_HALF_WIDTH_DEG = 5.0
MIN_LOCK_EVENTS = 20
MIN_PAIR_EVENTS = 10
PAIR_PERIOD_TOL = 5e-3
MIN_SAMPLES_PER_CYCLE = 8


class WindowKind(enum.Enum):
    RECTANGULAR = "rectangular"
    HANN = "hann"


@dataclass(frozen=True)
class Spectrum:
    """Two-sided magnitude spectrum of a real, uniformly sampled series.

    magnitudes[k] = |X_k| of the raw (unnormalized) transform, k in
    [0, n_points); bin_width = 1/(n_points*dt_sample) in Hz.
    """

    n_points: int
    bin_width: float
    window: WindowKind
    magnitudes: np.ndarray

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.n_points) * self.bin_width


def _hann(n: int) -> np.ndarray:
    # periodic form, the usual choice for spectral estimation
    return 0.5 - 0.5 * np.cos(2.0 * math.pi * np.arange(n) / n)


def fft_spectrum(
    samples: np.ndarray,
    dt_sample: float,
    window: WindowKind = WindowKind.HANN,
) -> Spectrum:
    """Radix-2 transform magnitudes of a uniformly sampled series.

    The length must be a power of two (>= 2). The window (rectangular or
    periodic Hann) is applied before the transform; magnitudes are the raw
    |X_k| so Parseval's identity sum(|w*x|^2) == sum(|X|^2)/n holds
    exactly up to rounding.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1:
        raise AnalysisError("samples must be a 1-D series")
    n = x.shape[0]
    if n < 2 or (n & (n - 1)) != 0:
        raise AnalysisError(f"sample count must be a power of two >= 2, got {n}")
    if not (dt_sample > 0.0 and math.isfinite(dt_sample)):
        raise AnalysisError(f"dt_sample must be positive and finite, got {dt_sample}")
    if not np.all(np.isfinite(x)):
        raise AnalysisError("samples contain non-finite values")
    if window is WindowKind.HANN:
        x = x * _hann(n)
    mags = np.abs(np.fft.fft(x))
    return Spectrum(
        n_points=n, bin_width=1.0 / (n * dt_sample), window=window, magnitudes=mags
    )


def dominant_peak(
    spectrum: Spectrum, exclude_dc: bool = True
) -> tuple[float, float]:
    """(frequency, magnitude) of the dominant spectral line.

    Searches bins up to Nyquist (the series is real, the upper half
    mirrors), ties broken toward lower frequency. When the maximum has two
    positive neighbours the bin frequency is refined by parabolic
    interpolation on the log-magnitudes of the three bins around it; an
    isolated single-bin line is returned at its exact bin frequency.
    """
    m = spectrum.magnitudes
    n = spectrum.n_points
    lo = 1 if exclude_dc else 0
    hi = n // 2  # inclusive
    if hi < lo:
        raise AnalysisError("spectrum too short for a peak search")
    seg = m[lo : hi + 1]
    if not np.any(seg > 0.0):
        raise AnalysisError("all-zero spectrum has no dominant peak")
    k = lo + int(np.argmax(seg))
    mag = float(m[k])
    f = k * spectrum.bin_width
    if 1 <= k <= n - 2 and m[k - 1] > 0.0 and m[k + 1] > 0.0:
        la = math.log(m[k - 1])
        lb = math.log(m[k])
        lg = math.log(m[k + 1])
        den = la - 2.0 * lb + lg
        if den < 0.0:
            p = 0.5 * (la - lg) / den
            if p > 0.5:
                p = 0.5
            elif p < -0.5:
                p = -0.5
            f = (k + p) * spectrum.bin_width
            mag = float(math.exp(lb - 0.25 * (la - lg) * p))
    return f, mag


def _decimation(trace: Trace, osc: int, n_points: int, f_ref: float | None) -> int:
    n = trace.n_samples
    if f_ref is None:
        if trace.injection_spec is not None:
            f_ref = trace.injection_spec.f_inj
        else:
            ev = trace.events_up[osc]
            if ev.size >= 3:
                f_ref = 1.0 / float(np.mean(np.diff(ev)))
    if f_ref is None:
        return max(1, (n // 2) // n_points)
    return max(
        1, int(math.floor(1.0 / (MIN_SAMPLES_PER_CYCLE * f_ref * trace.dt_record)))
    )


def trace_spectrum(
    trace: Trace,
    osc: int = 0,
    n_points: int = DEFAULT_N_POINTS,
    window: WindowKind = WindowKind.HANN,
    f_ref: float | None = None,
) -> Spectrum:
    """Spectrum of the trailing portion of an output-voltage series.

    The series is decimated so that at least MIN_SAMPLES_PER_CYCLE samples
    cover each reference period (injection frequency when present, else
    the measured event rate), the trailing n_points survivors form the
    analysis window, and their mean is removed so the oscillation line is
    not buried under the DC skirt of the window.
    """
    if not 0 <= osc < trace.v_out.shape[0]:
        raise AnalysisError(f"oscillator index {osc} out of range")
    v = trace.v_out[osc]
    m = _decimation(trace, osc, n_points, f_ref)
    start = trace.n_samples - 1 - m * (n_points - 1)
    if start < 0:
        raise AnalysisError(
            f"trace too short for a {n_points}-point window at decimation {m}"
        )
    win = v[start :: m][:n_points]
    win = win - np.mean(win)
    return fft_spectrum(win, m * trace.dt_record, window)


def event_periods(trace: Trace, nanowire: int = 0) -> np.ndarray:
    """Successive differences of one nanowire's up-transition times."""
    if not 0 <= nanowire < trace.n_nanowires:
        raise AnalysisError(f"nanowire index {nanowire} out of range")
    ev = trace.events_up[nanowire]
    if ev.size < 3:
        raise InsufficientEventsError(
            f"need at least 3 up transitions for periods, have {ev.size}"
        )
    return np.diff(ev)


@dataclass(frozen=True)
class LockResult:
    """Verdict of detect_lock.

    locking_delay and mean_phase_offset are None unless locked.
    locked_amplitude is the mean per-cycle peak-to-peak output voltage
    over the settled window; f_dominant the refined spectral peak.
    """

    locked: bool
    f_dominant: float
    locking_delay: float | None
    locked_amplitude: float
    mean_phase_offset: float | None


def _wrap_deg(a):
    """Wrap angle(s) to [0, 360)."""
    return np.mod(a, 360.0)


def _circ_diff_deg(a, b):
    """Signed circular difference a-b wrapped to (-180, 180]."""
    d = np.mod(a - b + 180.0, 360.0) - 180.0
    return np.where(d == -180.0, 180.0, d) if isinstance(d, np.ndarray) else (
        180.0 if d == -180.0 else d
    )


def _circ_mean_deg(angles: np.ndarray) -> float:
    rad = np.deg2rad(angles)
    z = complex(np.mean(np.cos(rad)), np.mean(np.sin(rad)))
    return float(_wrap_deg(math.degrees(math.atan2(z.imag, z.real))))


def detect_lock(
    trace: Trace,
    f_inj: float | None = None,
    settle_fraction: float = DEFAULT_SETTLE_FRACTION,
    tol_f: float = DEFAULT_TOL_F,
    tol_drift: float = DEFAULT_TOL_DRIFT_DEG,
    band_half_width: float = DEFAULT_BAND_HALF_WIDTH_DEG,
    osc: int = 0,
) -> LockResult:
    """Injection-locking verdict for an injected trace.

    Locked means both: every settled event period equals 1/f_inj within
    relative tol_f, and the event phase offset against the injection's
    ascending zero crossings drifts less than tol_drift degrees per cycle.
    The locking delay is the time of the first event after which the
    offset stays inside +/- band_half_width degrees of the settled mean
    all the way to the end of the trace (time measured from t=0).
    """
    spec = trace.injection_spec
    if spec is None:
        raise MissingInjectionError(
            "trace has no injection reference; lock detection is undefined"
        )
    if f_inj is None:
        f_inj = spec.f_inj
    if not 0.0 < settle_fraction < 1.0:
        raise AnalysisError(f"settle_fraction must be in (0, 1), got {settle_fraction}")

    ev = trace.events_up[osc]
    t_settle = settle_fraction * trace.t_stop
    settled = ev[ev >= t_settle]
    if settled.size < MIN_LOCK_EVENTS:
        raise InsufficientEventsError(
            f"need at least {MIN_LOCK_EVENTS} settled up transitions, "
            f"have {settled.size}"
        )

    t_inj = 1.0 / f_inj
    periods = np.diff(settled)
    period_ok = bool(np.all(np.abs(periods - t_inj) <= tol_f * t_inj))

    # event phase measured against the injection's ascending zero crossings
    phase0_deg = math.degrees(spec.phase0)
    phi_all = _wrap_deg(360.0 * ev * f_inj + phase0_deg)
    phi_settled = phi_all[ev >= t_settle]
    drift = np.abs(_circ_diff_deg(phi_settled[1:], phi_settled[:-1]))
    drift_ok = bool(np.all(drift < tol_drift))

    locked = period_ok and drift_ok

    f_dom, _ = dominant_peak(trace_spectrum(trace, osc=osc, f_ref=f_inj))

    # mean per-cycle peak-to-peak output over the settled window
    v = trace.v_out[osc]
    idx = np.minimum(
        (settled / trace.dt_record).astype(np.int64), trace.n_samples - 1
    )
    pps = []
    for a, bnd in zip(idx[:-1], idx[1:]):
        if bnd > a:
            seg = v[a : bnd + 1]
            pps.append(float(seg.max() - seg.min()))
    if not pps:
        raise InsufficientEventsError("no full settled cycle for amplitude")
    amplitude = float(np.mean(pps))

    delay = None
    mean_offset = None
    if locked:
        mean_offset = _circ_mean_deg(phi_settled)
        dev = np.abs(_circ_diff_deg(phi_all, mean_offset))
        in_band = dev <= band_half_width
        # earliest event from which the band holds through the end
        k0 = ev.size
        for k in range(ev.size - 1, -1, -1):
            if not in_band[k]:
                break
            k0 = k
        if k0 == ev.size:  # final event itself out of band: treat as end
            delay = float(ev[-1])
        else:
            delay = float(ev[k0])
    return LockResult(
        locked=locked,
        f_dominant=float(f_dom),
        locking_delay=delay,
        locked_amplitude=amplitude,
        mean_phase_offset=mean_offset,
    )


def phase_difference(
    trace: Trace, settle_fraction: float = DEFAULT_SETTLE_FRACTION
) -> float:
    """Steady-state phase difference of a synchronized pair, degrees.

    Uses each oscillator-1 up transition and its nearest oscillator-2 up
    transition: the circular mean of 360*dt/T folded to [0, 180]. Raises
    UnsynchronizedPairError when the two settled mean periods disagree by
    more than PAIR_PERIOD_TOL (relative), and InsufficientEventsError when
    either wire fired fewer than MIN_PAIR_EVENTS times after settling.
    """
    if trace.n_nanowires != 2:
        raise AnalysisError("phase_difference needs a two-oscillator trace")
    t_settle = settle_fraction * trace.t_stop
    ev1 = trace.events_up[0]
    ev2 = trace.events_up[1]
    ev1 = ev1[ev1 >= t_settle]
    ev2 = ev2[ev2 >= t_settle]
    if ev1.size < MIN_PAIR_EVENTS or ev2.size < MIN_PAIR_EVENTS:
        raise InsufficientEventsError(
            f"need at least {MIN_PAIR_EVENTS} settled up transitions per "
            f"oscillator, have {ev1.size} and {ev2.size}"
        )
    t1 = float(np.mean(np.diff(ev1)))
    t2 = float(np.mean(np.diff(ev2)))
    t_common = 0.5 * (t1 + t2)
    if abs(t1 - t2) > PAIR_PERIOD_TOL * t_common:
        raise UnsynchronizedPairError(
            f"pair periods differ by {abs(t1 - t2) / t_common:.3%} "
            f"(> {PAIR_PERIOD_TOL:.1%}): {t1:.6e} s vs {t2:.6e} s"
        )
    # nearest oscillator-2 event for each oscillator-1 event
    pos = np.searchsorted(ev2, ev1)
    pos_lo = np.clip(pos - 1, 0, ev2.size - 1)
    pos_hi = np.clip(pos, 0, ev2.size - 1)
    d_lo = ev1 - ev2[pos_lo]
    d_hi = ev1 - ev2[pos_hi]
    dt_nearest = np.where(np.abs(d_lo) <= np.abs(d_hi), d_lo, d_hi)
    theta = 360.0 * dt_nearest / t_common
    mean = _circ_mean_deg(theta)
    return float(mean if mean <= 180.0 else 360.0 - mean)
