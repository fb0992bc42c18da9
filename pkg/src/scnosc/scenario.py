"""Scenario files, CSV emission and SVG plots.

A scenario is a strict INI-flavoured text file with unit-suffixed keys:

    [device]
    ic_uA = 30.0        # critical current
    ir_uA = 10.0        # retrapping current
    rnw_ohm = 1000.0    # normal-state resistance
    lnw_nH = 71.4       # nanowire inductance

    [circuit]
    topology = injected   # standalone | injected | pair
    rs_ohm = 50.0
    ibias_uA = 35.0
    init_inw2_frac = 0.5  # pair only: i_nw2(0) as a fraction of i_c

    [injection]           # injected only
    mode = direct         # direct | coupled
    freq_MHz = 443.0
    amp_uA = 6.0          # direct mode amplitude
    amp_mV = 10.0         # coupled mode amplitude
    phase0_deg = 0.0

    [coupling]            # coupled injection and pair
    kind = capacitive     # capacitive | resistive | inductive
    cap_fF = 200.0        # exactly the value key matching kind
    res_ohm = 1000.0
    ind_nH = 20.0

    [solver]
    dt_ps = 3.4           # default: resolved from the time constants
    tstop_ns = 952.6      # default: 400 free-running periods
    points = 2000         # recorded samples per period, minimum

Whole-line # comments and blank lines are allowed; values are decimal
numbers or bare enum tokens; keys are case-sensitive; unknown or duplicate
keys, malformed numbers and keys inadmissible for the declared topology
are rejected with 1-based line numbers. Unspecified keys take the
defaults above; the parsed record echoes every resolved value, and
rendering it back to text reparses to an identical record.
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .device import NanowireParams, OscillatorParams, free_running_period, oscillation_condition
from .errors import ScenarioError

__all__ = [
    "Scenario",
    "parse_scenario",
    "parse_scenario_file",
    "default_scenario",
    "render_scenario",
    "write_csv",
    "render_svg_plot",
    "trace_table",
]

_SECTION_RE = re.compile(r"^\[([A-Za-z_][A-Za-z0-9_]*)\]$")
_KEYVAL_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S+)$")
_INLINE_COMMENT_RE = re.compile(r"\s#")
_NUMBER_RE = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")
_INT_RE = re.compile(r"^\d+$")

_ENUMS = {
    ("circuit", "topology"): ("standalone", "injected", "pair"),
    ("injection", "mode"): ("direct", "coupled"),
    ("coupling", "kind"): ("capacitive", "resistive", "inductive"),
}

# render order doubles as the key vocabulary
_SECTION_KEYS: dict[str, tuple[str, ...]] = {
    "device": ("ic_uA", "ir_uA", "rnw_ohm", "lnw_nH"),
    "circuit": ("topology", "rs_ohm", "ibias_uA", "init_inw2_frac"),
    "injection": ("mode", "freq_MHz", "amp_uA", "amp_mV", "phase0_deg"),
    "coupling": ("kind", "cap_fF", "res_ohm", "ind_nH"),
    "solver": ("dt_ps", "tstop_ns", "points"),
}

_INT_KEYS = {("solver", "points")}

_POSITIVE_KEYS = {
    ("device", "ic_uA"),
    ("device", "ir_uA"),
    ("device", "rnw_ohm"),
    ("device", "lnw_nH"),
    ("circuit", "rs_ohm"),
    ("circuit", "ibias_uA"),
    ("injection", "freq_MHz"),
    ("coupling", "cap_fF"),
    ("coupling", "res_ohm"),
    ("coupling", "ind_nH"),
    ("solver", "dt_ps"),
    ("solver", "tstop_ns"),
}

_KIND_VALUE_KEY = {
    "capacitive": "cap_fF",
    "resistive": "res_ohm",
    "inductive": "ind_nH",
}


@dataclass(frozen=True)
class Scenario:
    """A fully resolved scenario record (key units, not SI)."""

    topology: str
    ic_uA: float
    ir_uA: float
    rnw_ohm: float
    lnw_nH: float
    rs_ohm: float
    ibias_uA: float
    init_inw2_frac: float | None
    mode: str | None
    freq_MHz: float | None
    amp_uA: float | None
    amp_mV: float | None
    phase0_deg: float | None
    kind: str | None
    cap_fF: float | None
    res_ohm: float | None
    ind_nH: float | None
    dt_ps: float
    tstop_ns: float
    points: int
    explicit: frozenset = field(
        default_factory=frozenset, compare=False, repr=False
    )

    # -- unit conversions ------------------------------------------------
    def device_params(self) -> NanowireParams:
        return NanowireParams(
            i_c=self.ic_uA * 1e-6,
            i_r=self.ir_uA * 1e-6,
            r_nw=self.rnw_ohm,
            l_nw=self.lnw_nH * 1e-9,
        )

    def oscillator_params(self) -> OscillatorParams:
        return OscillatorParams(
            nw=self.device_params(), r_s=self.rs_ohm, i_bias=self.ibias_uA * 1e-6
        )

    def coupling_element(self):
        from .circuits import CouplingElement, CouplingKind

        if self.kind is None:
            return None
        value = {
            "capacitive": (self.cap_fF or 0.0) * 1e-15,
            "resistive": self.res_ohm or 0.0,
            "inductive": (self.ind_nH or 0.0) * 1e-9,
        }[self.kind]
        return CouplingElement(kind=CouplingKind(self.kind), value=value)

    def injection_spec(self):
        from .circuits import InjectionMode, InjectionSpec

        if self.topology != "injected":
            return None
        if self.mode == "direct":
            return InjectionSpec(
                mode=InjectionMode.DIRECT,
                amplitude=(self.amp_uA or 0.0) * 1e-6,
                f_inj=self.freq_MHz * 1e6,
                phase0=math.radians(self.phase0_deg or 0.0),
            )
        return InjectionSpec(
            mode=InjectionMode.COUPLED,
            amplitude=(self.amp_mV or 0.0) * 1e-3,
            f_inj=self.freq_MHz * 1e6,
            phase0=math.radians(self.phase0_deg or 0.0),
            element=self.coupling_element(),
        )

    def with_keys(self, updates: dict) -> "Scenario":
        """New Scenario with several keys overridden atomically.

        updates maps dotted 'section.key' paths to values. All updates are
        applied before re-resolution, so changes that only make sense
        together (switching topology and supplying the keys the new
        topology requires, say) go through in one call. Defaults that were
        never made explicit — the solver step and stop time in particular
        — are re-resolved for the new parameter values.
        """
        values = {pair: self._explicit_value(pair) for pair in self.explicit}
        for path, value in updates.items():
            section, _, key = path.partition(".")
            if (
                key == ""
                or section not in _SECTION_KEYS
                or key not in _SECTION_KEYS[section]
            ):
                raise ValueError(f"unknown scenario key path {path!r}")
            values[(section, key)] = value
        return _resolve(values, {}, {s for s, _ in values})

    def with_key(self, path: str, value) -> "Scenario":
        """New Scenario with one key overridden (dotted 'section.key' path)."""
        return self.with_keys({path: value})

    def _explicit_value(self, pair):
        section, key = pair
        return getattr(self, key)

    def render(self) -> str:
        return render_scenario(self)


def _fmt(value) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not scenario values")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_scenario(scn: Scenario) -> str:
    """Canonical text for a resolved scenario; reparses to the same record."""
    out = ["[device]"]
    for key in _SECTION_KEYS["device"]:
        out.append(f"{key} = {_fmt(getattr(scn, key))}")
    out.append("")
    out.append("[circuit]")
    out.append(f"topology = {scn.topology}")
    out.append(f"rs_ohm = {_fmt(scn.rs_ohm)}")
    out.append(f"ibias_uA = {_fmt(scn.ibias_uA)}")
    if scn.topology == "pair":
        out.append(f"init_inw2_frac = {_fmt(scn.init_inw2_frac)}")
    if scn.topology == "injected":
        out.append("")
        out.append("[injection]")
        out.append(f"mode = {scn.mode}")
        out.append(f"freq_MHz = {_fmt(scn.freq_MHz)}")
        if scn.mode == "direct":
            out.append(f"amp_uA = {_fmt(scn.amp_uA)}")
        else:
            out.append(f"amp_mV = {_fmt(scn.amp_mV)}")
        out.append(f"phase0_deg = {_fmt(scn.phase0_deg)}")
    if scn.kind is not None:
        out.append("")
        out.append("[coupling]")
        out.append(f"kind = {scn.kind}")
        vkey = _KIND_VALUE_KEY[scn.kind]
        out.append(f"{vkey} = {_fmt(getattr(scn, vkey))}")
    out.append("")
    out.append("[solver]")
    out.append(f"dt_ps = {_fmt(scn.dt_ps)}")
    out.append(f"tstop_ns = {_fmt(scn.tstop_ns)}")
    out.append(f"points = {scn.points}")
    out.append("")
    return "\n".join(out)


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text into a resolved record.

    Every rejection carries a 1-based line number pointing at the
    offending line (for structural problems, at the most relevant line
    that exists).
    """
    entries: dict[tuple[str, str], tuple[str, int]] = {}
    section_lines: dict[str, int] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r").strip()
        if not line or line.startswith("#"):
            continue
        cut = _INLINE_COMMENT_RE.search(line)
        if cut:
            line = line[: cut.start()].rstrip()
        m = _SECTION_RE.match(line)
        if m:
            name = m.group(1)
            if name not in _SECTION_KEYS:
                raise ScenarioError(f"unknown section [{name}]", lineno)
            if name not in section_lines:
                section_lines[name] = lineno
            current = name
            continue
        m = _KEYVAL_RE.match(line)
        if not m:
            raise ScenarioError(f"expected 'key = value', got {line!r}", lineno)
        key, value = m.group(1), m.group(2)
        if current is None:
            raise ScenarioError(f"key {key!r} appears before any section", lineno)
        if key not in _SECTION_KEYS[current]:
            raise ScenarioError(f"unknown key {key!r} in [{current}]", lineno)
        pair = (current, key)
        if pair in entries:
            raise ScenarioError(
                f"duplicate key {key!r} in [{current}] "
                f"(first set on line {entries[pair][1]})",
                lineno,
            )
        entries[pair] = (value, lineno)

    values: dict[tuple[str, str], object] = {}
    lines: dict[tuple[str, str], int] = {}
    for pair, (raw_value, lineno) in entries.items():
        values[pair] = _typed_value(pair, raw_value, lineno)
        lines[pair] = lineno
    return _resolve(values, lines, set(section_lines), section_lines)


def parse_scenario_file(path) -> Scenario:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ScenarioError(
            f"cannot read scenario file {str(path)!r}: {exc.strerror}"
        ) from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ScenarioError(f"scenario is not valid UTF-8: {exc}") from None
    return parse_scenario(text)


def default_scenario() -> Scenario:
    return _resolve({}, {}, set())


def _typed_value(pair, raw: str, lineno: int | None):
    section, key = pair
    if pair in _ENUMS:
        allowed = _ENUMS[pair]
        if raw not in allowed:
            raise ScenarioError(
                f"invalid value for {key!r}: {raw!r} (expected one of "
                + "|".join(allowed)
                + ")",
                lineno,
            )
        return raw
    if pair in _INT_KEYS:
        if not _INT_RE.match(raw):
            raise ScenarioError(
                f"malformed integer for {key!r}: {raw!r}", lineno
            )
        return int(raw)
    if not _NUMBER_RE.match(raw):
        raise ScenarioError(f"malformed number for {key!r}: {raw!r}", lineno)
    return float(raw)


def _err(message: str, line: int | None) -> ScenarioError:
    return ScenarioError(message, line)


def _resolve(
    values: dict[tuple[str, str], object],
    lines: dict[tuple[str, str], int],
    present_sections: set[str],
    section_lines: dict[str, int] | None = None,
) -> Scenario:
    section_lines = section_lines or {}

    def line_of(pair) -> int | None:
        return lines.get(pair)

    for pair, value in values.items():
        if not isinstance(value, (int, float, str)):
            raise _err(f"unsupported value type for {pair[1]!r}", line_of(pair))
        if isinstance(value, float) and not math.isfinite(value):
            raise _err(f"non-finite value for {pair[1]!r}", line_of(pair))

    topology = values.get(("circuit", "topology"), "standalone")
    topo_line = line_of(("circuit", "topology"))
    mode = values.get(("injection", "mode"), "direct")

    # admissibility, checked in file order for stable diagnostics
    def admissible(pair) -> str | None:
        section, key = pair
        if section == "injection" and topology != "injected":
            return f"[injection] keys need topology = injected, not {topology}"
        if section == "coupling" and not (
            topology == "pair" or (topology == "injected" and mode == "coupled")
        ):
            return (
                "[coupling] keys need topology = pair or coupled injection, "
                f"not {topology}"
            )
        if pair == ("circuit", "init_inw2_frac") and topology != "pair":
            return f"init_inw2_frac is only admissible for pair topology, not {topology}"
        if pair == ("injection", "amp_uA") and mode != "direct":
            return "amp_uA is the direct-mode amplitude; coupled mode takes amp_mV"
        if pair == ("injection", "amp_mV") and mode != "coupled":
            return "amp_mV is the coupled-mode amplitude; direct mode takes amp_uA"
        return None

    ordered = sorted(values, key=lambda p: lines.get(p, 0))
    for pair in ordered:
        problem = admissible(pair)
        if problem:
            raise _err(problem, line_of(pair))
    for section in ("injection", "coupling"):
        if section in present_sections:
            probe = admissible((section, "mode" if section == "injection" else "kind"))
            if probe:
                raise _err(probe, section_lines.get(section))

    # per-key numeric constraints, file order
    for pair in ordered:
        section, key = pair
        v = values[pair]
        if pair in _POSITIVE_KEYS and not (isinstance(v, (int, float)) and v > 0):
            raise _err(f"{key} must be positive, got {_fmt(v)}", line_of(pair))
        if key in ("amp_uA", "amp_mV") and isinstance(v, float) and v < 0:
            raise _err(f"{key} must be >= 0, got {_fmt(v)}", line_of(pair))
        if pair == ("circuit", "init_inw2_frac") and isinstance(v, float) and not (
            0.0 <= v < 1.0
        ):
            raise _err(
                f"init_inw2_frac must lie in [0, 1), got {_fmt(v)}", line_of(pair)
            )
        if pair == ("solver", "points") and isinstance(v, int) and v < 16:
            raise _err(f"points must be at least 16, got {v}", line_of(pair))

    ic = float(values.get(("device", "ic_uA"), 30.0))
    ir = float(values.get(("device", "ir_uA"), 10.0))
    rnw = float(values.get(("device", "rnw_ohm"), 1000.0))
    lnw = float(values.get(("device", "lnw_nH"), 71.4))
    if ir >= ic:
        bad = max(
            (lines.get(("device", "ir_uA"), 0), lines.get(("device", "ic_uA"), 0))
        )
        raise _err(
            f"ir_uA must be strictly below ic_uA, got ir_uA={_fmt(ir)} "
            f"ic_uA={_fmt(ic)}",
            bad or None,
        )
    rs = float(values.get(("circuit", "rs_ohm"), 50.0))
    ibias = float(values.get(("circuit", "ibias_uA"), 35.0))

    init_frac = None
    if topology == "pair":
        init_frac = float(values.get(("circuit", "init_inw2_frac"), 0.5))

    freq = values.get(("injection", "freq_MHz"))
    amp_uA = amp_mV = phase0 = None
    res_mode: str | None = None
    if topology == "injected":
        if "injection" not in present_sections and not any(
            p[0] == "injection" for p in values
        ):
            raise _err(
                "topology = injected requires an [injection] section", topo_line
            )
        if freq is None:
            raise _err(
                "injected topology requires freq_MHz",
                section_lines.get("injection", topo_line),
            )
        res_mode = str(mode)
        phase0 = float(values.get(("injection", "phase0_deg"), 0.0))
        if res_mode == "direct":
            amp_uA = float(values.get(("injection", "amp_uA"), 0.0))
        else:
            amp_mV = float(values.get(("injection", "amp_mV"), 0.0))
        freq = float(freq)
    else:
        freq = None

    kind = values.get(("coupling", "kind"))
    cap = res = ind = None
    needs_coupling = topology == "pair" or (
        topology == "injected" and res_mode == "coupled"
    )
    if needs_coupling:
        where = section_lines.get(
            "coupling",
            lines.get(("injection", "mode"), topo_line),
        )
        if kind is None:
            raise _err(
                "a [coupling] section with a kind is required here", where
            )
        vkey = _KIND_VALUE_KEY[str(kind)]
        value_pair = ("coupling", vkey)
        if value_pair not in values:
            raise _err(
                f"coupling kind {kind} requires {vkey}",
                lines.get(("coupling", "kind"), where),
            )
        for other_kind, other_key in _KIND_VALUE_KEY.items():
            if other_key != vkey and ("coupling", other_key) in values:
                raise _err(
                    f"{other_key} does not match coupling kind {kind}",
                    line_of(("coupling", other_key)),
                )
        val = float(values[value_pair])
        kind = str(kind)
        if kind == "capacitive":
            cap = val
        elif kind == "resistive":
            res = val
        else:
            ind = val
    else:
        kind = None

    # solver defaults from the resolved physics
    tau1 = (lnw * 1e-9) / (rs + rnw)
    tau2 = (lnw * 1e-9) / rs
    dt_bound = min(tau1, tau2) / 20.0
    if freq is not None:
        dt_bound = min(dt_bound, 1.0 / (1000.0 * freq * 1e6))
    if kind == "capacitive":
        dt_bound = min(dt_bound, rs * (cap * 1e-15) / 8.0)
    elif kind == "inductive":
        dt_bound = min(dt_bound, (ind * 1e-9) / (2.0 * rs) / 8.0)
    dt_ps = float(values.get(("solver", "dt_ps"), dt_bound * 1e12))

    op = OscillatorParams(
        nw=NanowireParams(i_c=ic * 1e-6, i_r=ir * 1e-6, r_nw=rnw, l_nw=lnw * 1e-9),
        r_s=rs,
        i_bias=ibias * 1e-6,
    )
    if oscillation_condition(op):
        t_ref = free_running_period(op).period
    elif freq is not None:
        t_ref = 1.0 / (freq * 1e6)
    else:
        t_ref = 10.0 * tau2
    tstop_ns = float(values.get(("solver", "tstop_ns"), 400.0 * t_ref * 1e9))
    points = int(values.get(("solver", "points"), 2000))

    if dt_ps * 1e-12 >= tstop_ns * 1e-9:
        raise _err(
            f"dt_ps={_fmt(dt_ps)} does not fit inside tstop_ns={_fmt(tstop_ns)}",
            lines.get(("solver", "dt_ps")),
        )

    return Scenario(
        topology=str(topology),
        ic_uA=ic,
        ir_uA=ir,
        rnw_ohm=rnw,
        lnw_nH=lnw,
        rs_ohm=rs,
        ibias_uA=ibias,
        init_inw2_frac=init_frac,
        mode=res_mode,
        freq_MHz=freq,
        amp_uA=amp_uA,
        amp_mV=amp_mV,
        phase0_deg=phase0,
        kind=kind,
        cap_fF=cap,
        res_ohm=res,
        ind_nH=ind,
        dt_ps=dt_ps,
        tstop_ns=tstop_ns,
        points=points,
        explicit=frozenset(values),
    )


# --- CSV ----------------------------------------------------------------


def _csv_cell(value) -> str:
    if isinstance(value, str):
        if any(c in value for c in ",\n\r\""):
            raise ValueError(f"CSV cell may not contain separators: {value!r}")
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not CSV cells")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"CSV cell must be finite, got {v}")
        return repr(v)
    raise TypeError(f"unsupported CSV cell type {type(value).__name__}")


def write_csv(headers: Sequence[str], rows: Iterable[Sequence], dest=None) -> bytes:
    """Emit a CSV table: comma-separated, LF line ends, UTF-8.

    Numbers render in shortest round-trip decimal form (repr), so reading
    the file back with float() reproduces the table exactly. dest may be a
    path or a binary file object; the encoded bytes are always returned.
    """
    headers = [str(h) for h in headers]
    for h in headers:
        if any(c in h for c in ",\n\r\""):
            raise ValueError(f"CSV header may not contain separators: {h!r}")
    buf = io.StringIO()
    buf.write(",".join(headers))
    buf.write("\n")
    width = len(headers)
    for row in rows:
        if len(row) != width:
            raise ValueError(
                f"row width {len(row)} does not match header width {width}"
            )
        buf.write(",".join(_csv_cell(c) for c in row))
        buf.write("\n")
    data = buf.getvalue().encode("utf-8")
    if dest is not None:
        if hasattr(dest, "write"):
            dest.write(data)
        else:
            Path(dest).write_bytes(data)
    return data


def trace_table(trace) -> tuple[list[str], list[tuple]]:
    """Display-unit table for a Trace: ns, mV, uA columns plus 0/1 phases."""
    t_ns = trace.times * 1e9
    cols: list[tuple[str, np.ndarray]] = [("t_ns", t_ns)]
    if trace.n_nanowires == 1:
        cols.append(("vout_mV", trace.v_out[0] * 1e3))
        cols.append(("inw_uA", trace.i_nw[0] * 1e6))
        cols.append(("phase", trace.phases[0].astype(np.int64)))
        if trace.injection_spec is not None:
            from .circuits import InjectionMode

            if trace.injection_spec.mode is InjectionMode.DIRECT:
                cols.append(("iinj_uA", trace.injection * 1e6))
            else:
                cols.append(("vinj_mV", trace.injection * 1e3))
                cols.append(("icpl_uA", trace.i_coupler * 1e6))
                if trace.v_capacitor is not None:
                    cols.append(("vcap_mV", trace.v_capacitor * 1e3))
    else:
        cols.append(("vout1_mV", trace.v_out[0] * 1e3))
        cols.append(("vout2_mV", trace.v_out[1] * 1e3))
        cols.append(("inw1_uA", trace.i_nw[0] * 1e6))
        cols.append(("inw2_uA", trace.i_nw[1] * 1e6))
        cols.append(("phase1", trace.phases[0].astype(np.int64)))
        cols.append(("phase2", trace.phases[1].astype(np.int64)))
        if trace.i_coupler is not None:
            cols.append(("icpl_uA", trace.i_coupler * 1e6))
        if trace.v_capacitor is not None:
            cols.append(("vcap_mV", trace.v_capacitor * 1e3))
    headers = [name for name, _ in cols]
    arrays = [arr for _, arr in cols]
    n = len(arrays[0])
    rows = [tuple(arr[i] for arr in arrays) for i in range(n)]
    return headers, rows


# --- SVG ----------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_MAX_POLYLINE_POINTS = 4000


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            return mult * mag
    return 10.0 * mag


def _ticks(lo: float, hi: float) -> list[float]:
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + step * 1e-9:
        out.append(0.0 if abs(v) < step * 1e-9 else v)
        v += step
    return out


def _fmt_tick(v: float) -> str:
    return f"{v:.6g}"


def render_svg_plot(
    series: Sequence[tuple[str, np.ndarray, np.ndarray]],
    x_label: str,
    y_label: str,
    title: str | None = None,
    width: int = 900,
    height: int = 560,
) -> str:
    """Deterministic standalone SVG line plot.

    series is a sequence of (label, x, y) arrays; every series needs at
    least two finite points. Long series are decimated to at most
    _MAX_POLYLINE_POINTS vertices, last point always kept.
    """
    if not series:
        raise ValueError("need at least one series to plot")
    cleaned = []
    for label, x, y in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise ValueError(f"series {label!r}: x and y must be equal-length 1-D")
        if x.shape[0] < 2:
            raise ValueError(f"series {label!r}: need at least two points")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError(f"series {label!r}: non-finite points")
        cleaned.append((str(label), x, y))

    x_lo = min(float(x.min()) for _, x, _ in cleaned)
    x_hi = max(float(x.max()) for _, x, _ in cleaned)
    y_lo = min(float(y.min()) for _, _, y in cleaned)
    y_hi = max(float(y.max()) for _, _, y in cleaned)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad_x = 0.04 * (x_hi - x_lo)
    pad_y = 0.06 * (y_hi - y_lo)
    x_lo -= pad_x
    x_hi += pad_x
    y_lo -= pad_y
    y_hi += pad_y

    ml, mr, mt, mb = 72, 24, 36 if title else 20, 56
    pw = width - ml - mr
    ph = height - mt - mb

    def px(x: float) -> float:
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y: float) -> float:
        return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>'
        )
    # frame
    parts.append(
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        'stroke="#333" stroke-width="1"/>'
    )
    for tx in _ticks(x_lo, x_hi):
        X = px(tx)
        parts.append(
            f'<line x1="{X:.2f}" y1="{mt + ph}" x2="{X:.2f}" '
            f'y2="{mt + ph + 5}" stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{X:.2f}" y="{mt + ph + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt_tick(tx)}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        Y = py(ty)
        parts.append(
            f'<line x1="{ml - 5}" y1="{Y:.2f}" x2="{ml}" y2="{Y:.2f}" '
            'stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{ml - 8}" y="{Y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt_tick(ty)}</text>'
        )
    parts.append(
        f'<text x="{ml + pw / 2:.1f}" y="{height - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{x_label}</text>'
    )
    parts.append(
        f'<text x="18" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {mt + ph / 2:.1f})">{y_label}</text>'
    )
    for idx, (label, x, y) in enumerate(cleaned):
        color = _PALETTE[idx % len(_PALETTE)]
        n = x.shape[0]
        stride = max(1, -(-n // _MAX_POLYLINE_POINTS))
        xi = x[::stride]
        yi = y[::stride]
        if (n - 1) % stride != 0:
            xi = np.append(xi, x[-1])
            yi = np.append(yi, y[-1])
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xi, yi))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.2" '
            f'points="{pts}"/>'
        )
        ly = mt + 16 + 16 * idx
        parts.append(
            f'<line x1="{ml + pw - 150}" y1="{ly - 4}" x2="{ml + pw - 122}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{ml + pw - 116}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
