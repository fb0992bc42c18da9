"""Command-line front end.

Subcommands:

    simulate   run a scenario, emit the trace as CSV (and optionally SVG)
    spectrum   trailing-window spectrum of a simulated trace
    lockcheck  injection-locking verdict for one scenario
    lockrange  locked-frequency band via coarse scan plus bisection
    sweep      one scenario key swept against one metric
    lockmap    lock verdict matrix over coupling value x frequency
    couple     synchronization verdict and phase offset of a pair
    iv         quasi-static DC current-voltage curve of the device

Exit codes: 0 success, 1 usage errors, 2 scenario file errors, 3
simulation/analysis errors. Tables go to --out when given, else to
stdout; human-readable key = value summaries go to stdout.
"""

from __future__ import annotations

import argparse
import functools
import sys

import numpy as np

from . import analysis, device, scenario as scenario_mod, sweep as sweep_mod
from .circuits import build_system
from .errors import ScenarioError, ScnoscError, UnsynchronizedPairError
from .scenario import (
    parse_scenario_file,
    render_svg_plot,
    trace_table,
    write_csv,
)
from .solver import integrate, scenario_settings

__all__ = ["main", "build_parser"]

_WIDTH = 96
_FMT = functools.partial(argparse.HelpFormatter, width=_WIDTH)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _say(key: str, value) -> None:
    if isinstance(value, bool):
        value = "yes" if value else "no"
    elif isinstance(value, float):
        value = repr(value)
    print(f"{key} = {value}")


def _emit_table(headers, rows, out_path) -> None:
    data = write_csv(headers, rows)
    if out_path:
        with open(out_path, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.flush()
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


def _load_and_run(path):
    scn = parse_scenario_file(path)
    trace = integrate(build_system(scn), scenario_settings(scn))
    return scn, trace


def _trace_svg(trace) -> str:
    t_ns = trace.times * 1e9
    series = []
    if trace.v_out.shape[0] == 1:
        series.append(("vout", t_ns, trace.v_out[0] * 1e3))
    else:
        series.append(("vout1", t_ns, trace.v_out[0] * 1e3))
        series.append(("vout2", t_ns, trace.v_out[1] * 1e3))
    return render_svg_plot(series, "t (ns)", "v_out (mV)")


def _cmd_simulate(args) -> int:
    scn, trace = _load_and_run(args.scenario)
    headers, rows = trace_table(trace)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(_trace_svg(trace))
    if args.out:
        _emit_table(headers, rows, args.out)
        _say("topology", scn.topology)
        _say("samples", trace.n_samples)
        _say("t_stop_ns", trace.t_stop * 1e9)
        for k in range(trace.n_nanowires):
            _say(f"events_up_{k + 1}", int(trace.events_up[k].size))
            _say(f"events_down_{k + 1}", int(trace.events_down[k].size))
            if trace.events_up[k].size >= 3:
                periods = np.diff(trace.events_up[k])
                _say(f"mean_period_ns_{k + 1}", float(np.mean(periods)) * 1e9)
    else:
        _emit_table(headers, rows, None)
    return 0


def _cmd_spectrum(args) -> int:
    _, trace = _load_and_run(args.scenario)
    window = analysis.WindowKind(args.window)
    spec = analysis.trace_spectrum(
        trace, osc=args.osc, n_points=args.points, window=window
    )
    f_peak, mag = analysis.dominant_peak(spec)
    half = spec.n_points // 2
    headers = ["f_MHz", "magnitude"]
    rows = [
        (spec.frequencies[k] * 1e-6, float(spec.magnitudes[k]))
        for k in range(half + 1)
    ]
    if args.out:
        _emit_table(headers, rows, args.out)
        _say("n_points", spec.n_points)
        _say("bin_width_MHz", spec.bin_width * 1e-6)
        _say("f_peak_MHz", f_peak * 1e-6)
        _say("peak_magnitude", mag)
    else:
        _emit_table(headers, rows, None)
        print(f"f_peak_MHz = {f_peak * 1e-6!r}", file=sys.stderr)
    return 0


def _cmd_lockcheck(args) -> int:
    scn, trace = _load_and_run(args.scenario)
    result = analysis.detect_lock(
        trace,
        settle_fraction=args.settle,
        tol_f=args.tol_f,
        tol_drift=args.tol_drift,
    )
    _say("locked", result.locked)
    _say("f_inj_MHz", scn.freq_MHz)
    _say("f_dominant_MHz", result.f_dominant * 1e-6)
    _say("locked_amplitude_mV", result.locked_amplitude * 1e3)
    if result.locked:
        _say("locking_delay_ns", result.locking_delay * 1e9)
        _say("mean_phase_offset_deg", result.mean_phase_offset)
    return 0


def _cmd_lockrange(args) -> int:
    scn = parse_scenario_file(args.scenario)
    refine = args.refine_tol_khz * 1e3 if args.refine_tol_khz else None
    rng = sweep_mod.find_lock_range(
        scn,
        args.fmin_mhz * 1e6,
        args.fmax_mhz * 1e6,
        coarse_steps=args.steps,
        refine_tol_hz=refine,
        workers=args.workers,
    )
    _say("empty", rng.empty)
    if not rng.empty:
        _say("f_low_MHz", rng.f_low * 1e-6)
        _say("f_high_MHz", rng.f_high * 1e-6)
        _say("width_MHz", rng.width * 1e-6)
        _say("multiple_intervals", rng.multiple_intervals)
    return 0


def _cmd_sweep(args) -> int:
    scn = parse_scenario_file(args.scenario)
    values = sweep_mod.sweep_values(args.start, args.stop, args.steps, args.scale)
    spec = sweep_mod.SweepSpec(
        param=args.param, values=tuple(float(v) for v in values), metric=args.metric
    )
    headers, rows = sweep_mod.sweep_1d(
        scn,
        spec,
        workers=args.workers,
        lock_bracket=args.lock_bracket,
        coarse_steps=args.coarse_steps,
    )
    if args.svg:
        ok = [r for r in rows if r[-1] in ("ok", "multiple_intervals")]
        if len(ok) >= 2:
            x = np.array([r[0] for r in ok])
            y = np.array([float(r[-2]) for r in ok])
            svg = render_svg_plot(
                [(args.metric, x, y)], spec.param, headers[-2]
            )
            with open(args.svg, "w", encoding="utf-8") as fh:
                fh.write(svg)
        else:
            print("svg skipped: fewer than two usable points", file=sys.stderr)
    _emit_table(headers, rows, args.out)
    return 0


def _cmd_lockmap(args) -> int:
    scn = parse_scenario_file(args.scenario)
    cvals = sweep_mod.sweep_values(args.cmin, args.cmax, args.csteps, args.cscale)
    fvals = sweep_mod.sweep_values(
        args.fmin_mhz * 1e6, args.fmax_mhz * 1e6, args.fsteps, "linear"
    )
    headers, rows = sweep_mod.lock_map(
        scn, [float(c) for c in cvals], [float(f) for f in fvals],
        workers=args.workers,
    )
    _emit_table(headers, rows, args.out)
    return 0


def _cmd_couple(args) -> int:
    _, trace = _load_and_run(args.scenario)
    try:
        dphi = analysis.phase_difference(trace, settle_fraction=args.settle)
    except UnsynchronizedPairError as exc:
        _say("synchronized", False)
        print(f"detail: {exc}", file=sys.stderr)
        return 0
    _say("synchronized", True)
    _say("delta_phi_deg", dphi)
    for k in range(2):
        ev = trace.events_up[k]
        if ev.size >= 3:
            _say(f"mean_period_ns_{k + 1}", float(np.mean(np.diff(ev))) * 1e9)
    return 0


def _cmd_iv(args) -> int:
    scn = parse_scenario_file(args.scenario)
    p = scn.device_params()
    imax = args.imax_ua * 1e-6 if args.imax_ua else 1.5 * p.i_c
    n = args.points
    up = np.linspace(0.0, imax, n)
    ramp = np.concatenate([up, up[::-1][1:]])
    r_s = None if args.bare else scn.rs_ohm
    curve = device.dc_iv_curve(p, ramp, r_s=r_s)
    branch = ["up"] * n + ["down"] * (n - 1)
    headers = ["branch", "i_uA", "v_mV"]
    rows = [
        (branch[k], float(i) * 1e6, float(v) * 1e3)
        for k, (i, v) in enumerate(curve)
    ]
    if args.svg:
        iu = np.array([r[1] for r in rows[:n]])
        vu = np.array([r[2] for r in rows[:n]])
        idn = np.array([r[1] for r in rows[n - 1 :]])
        vdn = np.array([r[2] for r in rows[n - 1 :]])
        svg = render_svg_plot(
            [("ramp up", iu, vu), ("ramp down", idn, vdn)],
            "i_bias (uA)",
            "v (mV)",
        )
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(svg)
    _emit_table(headers, rows, args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="scnosc",
        description="Relaxation oscillations, injection locking and mutual "
        "synchronization of shunted superconducting-nanowire circuits.",
        formatter_class=_FMT,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, help_text: str, func) -> argparse.ArgumentParser:
        sp = sub.add_parser(
            name, help=help_text, description=help_text, formatter_class=_FMT
        )
        sp.add_argument("scenario", help="scenario file path")
        sp.set_defaults(func=func)
        return sp

    sp = add("simulate", "integrate a scenario and emit the trace as CSV", _cmd_simulate)
    sp.add_argument("--out", help="write the CSV here instead of stdout")
    sp.add_argument("--svg", help="also write an output-voltage plot (SVG)")

    sp = add("spectrum", "trailing-window spectrum of the output voltage", _cmd_spectrum)
    sp.add_argument("--out", help="write the CSV here instead of stdout")
    sp.add_argument(
        "--points", type=int, default=analysis.DEFAULT_N_POINTS,
        help="analysis window length, a power of two (default 1024)",
    )
    sp.add_argument(
        "--window", choices=["hann", "rectangular"], default="hann",
        help="window applied before the transform (default hann)",
    )
    sp.add_argument("--osc", type=int, default=0, help="oscillator index (default 0)")

    sp = add("lockcheck", "injection-locking verdict for one scenario", _cmd_lockcheck)
    sp.add_argument(
        "--settle", type=float, default=analysis.DEFAULT_SETTLE_FRACTION,
        help="fraction of the trace treated as transient (default 0.5)",
    )
    sp.add_argument(
        "--tol-f", type=float, default=analysis.DEFAULT_TOL_F, dest="tol_f",
        help="relative period tolerance for the verdict (default 1e-3)",
    )
    sp.add_argument(
        "--tol-drift", type=float, default=analysis.DEFAULT_TOL_DRIFT_DEG,
        dest="tol_drift",
        help="phase drift tolerance, degrees per cycle (default 1.0)",
    )

    sp = add("lockrange", "locked-frequency band of an injected scenario", _cmd_lockrange)
    sp.add_argument("--fmin-MHz", type=float, required=True, dest="fmin_mhz",
                    help="scan start, MHz")
    sp.add_argument("--fmax-MHz", type=float, required=True, dest="fmax_mhz",
                    help="scan end, MHz")
    sp.add_argument("--steps", type=int, default=sweep_mod.DEFAULT_COARSE_STEPS,
                    help="coarse scan points, at least 16 (default 64)")
    sp.add_argument("--refine-tol-kHz", type=float, default=None,
                    dest="refine_tol_khz",
                    help="edge bisection tolerance, kHz (default f_osc*1e-4)")
    sp.add_argument("--workers", type=int, default=1,
                    help="parallel simulations (default 1)")

    sp = add("sweep", "sweep one scenario key against one metric", _cmd_sweep)
    sp.add_argument("--param", required=True,
                    help="dotted scenario key, e.g. injection.amp_uA")
    sp.add_argument("--from", type=float, required=True, dest="start",
                    help="first value (scenario key units)")
    sp.add_argument("--to", type=float, required=True, dest="stop",
                    help="last value (scenario key units)")
    sp.add_argument("--steps", type=int, required=True, help="grid size")
    sp.add_argument("--scale", choices=["linear", "log"], default="linear",
                    help="grid spacing (default linear)")
    sp.add_argument("--metric", required=True,
                    choices=sorted(sweep_mod.SWEEP_METRICS),
                    help="what to evaluate at each grid point")
    sp.add_argument("--out", help="write the CSV here instead of stdout")
    sp.add_argument("--svg", help="also plot the metric against the parameter")
    sp.add_argument("--workers", type=int, default=1,
                    help="parallel simulations (default 1)")
    sp.add_argument("--lock-bracket", type=float, default=sweep_mod.DEFAULT_LOCK_BRACKET,
                    dest="lock_bracket",
                    help="lock_range search band, fraction of f_osc (default 0.2)")
    sp.add_argument("--coarse-steps", type=int, default=48, dest="coarse_steps",
                    help="coarse points per lock_range search (default 48)")

    sp = add("lockmap", "lock matrix over coupling value x frequency", _cmd_lockmap)
    sp.add_argument("--cmin", type=float, required=True,
                    help="lowest coupling value (scenario key units)")
    sp.add_argument("--cmax", type=float, required=True,
                    help="highest coupling value (scenario key units)")
    sp.add_argument("--csteps", type=int, required=True, help="coupling grid size")
    sp.add_argument("--cscale", choices=["linear", "log"], default="linear",
                    help="coupling grid spacing (default linear)")
    sp.add_argument("--fmin-MHz", type=float, required=True, dest="fmin_mhz",
                    help="lowest injection frequency, MHz")
    sp.add_argument("--fmax-MHz", type=float, required=True, dest="fmax_mhz",
                    help="highest injection frequency, MHz")
    sp.add_argument("--fsteps", type=int, required=True, help="frequency grid size")
    sp.add_argument("--out", help="write the CSV here instead of stdout")
    sp.add_argument("--workers", type=int, default=1,
                    help="parallel simulations (default 1)")

    sp = add("couple", "synchronization verdict for a coupled pair", _cmd_couple)
    sp.add_argument(
        "--settle", type=float, default=analysis.DEFAULT_SETTLE_FRACTION,
        help="fraction of the trace treated as transient (default 0.5)",
    )

    sp = add("iv", "quasi-static DC current-voltage curve", _cmd_iv)
    sp.add_argument("--imax-uA", type=float, default=None, dest="imax_ua",
                    help="ramp apex, uA (default 1.5*ic)")
    sp.add_argument("--points", type=int, default=201,
                    help="points per ramp direction (default 201)")
    sp.add_argument("--bare", action="store_true",
                    help="sweep the bare nanowire without the shunt")
    sp.add_argument("--out", help="write the CSV here instead of stdout")
    sp.add_argument("--svg", help="also plot the curve (SVG)")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except ScnoscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
