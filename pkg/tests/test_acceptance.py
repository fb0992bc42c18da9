"""End-to-end acceptance gates.

Ten numbered criteria, each printing one PASS/FAIL line with its
measurements (run with -s to see them on success; -v shows the verdict
per test either way). Budgets are wall-clock seconds on one core.
Grids, horizons, and tolerances are fixed so reruns are comparable.
"""

import time

import numpy as np
import pytest

from scnosc import (
    ScenarioError,
    default_scenario,
    detect_lock,
    dominant_peak,
    fft_spectrum,
    find_lock_range,
    free_running_period,
    lock_map,
    parse_scenario,
    phase_difference,
    render_scenario,
    trace_spectrum,
    WindowKind,
)
from scnosc.solver import SolverSettings, integrate
from scnosc.circuits import build_standalone

from conftest import run_cli, simulate
from scenario_corpus import CORPUS, INVALID, VALID
from test_solver import OP, kcl_residual


def report(num, ok, detail):
    line = f"criterion {num:02d}: {'PASS' if ok else 'FAIL'} — {detail}"
    print(line, flush=True)
    return line


def injected(freq_mhz, amp_ua, tstop_ns=None):
    keys = {
        "circuit.topology": "injected",
        "injection.freq_MHz": freq_mhz,
        "injection.amp_uA": amp_ua,
    }
    if tstop_ns is not None:
        keys["solver.tstop_ns"] = tstop_ns
    return default_scenario().with_keys(keys)


def test_criterion_01_free_running_periods():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260822)
    deviations = []
    while len(deviations) < 25:
        ic = rng.uniform(5.0, 80.0)
        ir = ic * rng.uniform(0.15, 0.8)
        rnw = rng.uniform(200.0, 5000.0)
        rs = rng.uniform(20.0, 200.0)
        lnw = rng.uniform(20.0, 200.0)
        ib = ic * rng.uniform(1.07, 2.5)
        if not (ib > 1.05 * ic and rs * ib / (rs + rnw) < 0.9 * ir):
            continue
        scn = default_scenario().with_keys(
            {
                "device.ic_uA": ic,
                "device.ir_uA": ir,
                "device.rnw_ohm": rnw,
                "device.lnw_nH": lnw,
                "circuit.rs_ohm": rs,
                "circuit.ibias_uA": ib,
            }
        )
        oracle = free_running_period(scn.oscillator_params())
        trace = simulate(
            scn.with_key("solver.tstop_ns", 120.0 * oracle.period * 1e9)
        )
        periods = np.diff(trace.events_up[0])
        assert periods.size >= 100
        measured = float(np.mean(periods))
        deviations.append(abs(measured - oracle.period) / oracle.period)

    default_f = free_running_period(default_scenario().oscillator_params()).frequency
    default_dev = abs(default_f - 420e6) / 420e6
    elapsed = time.perf_counter() - t0
    worst = max(deviations)
    ok = worst <= 2e-3 and default_dev <= 0.01 and elapsed < 30.0
    report(
        1,
        ok,
        f"25 randomized sets event-vs-formula worst {worst:.2e} (gate 2e-3); "
        f"default {default_f / 1e6:.2f} MHz vs 420 MHz dev {default_dev:.2%} "
        f"(gate 1%); {elapsed:.1f}s (budget 30s)",
    )
    assert worst <= 2e-3
    assert default_dev <= 0.01
    assert elapsed < 30.0


def test_criterion_02_locking_spectra():
    t0 = time.perf_counter()
    f_osc = free_running_period(default_scenario().oscillator_params()).frequency
    f_inj = 1.05 * f_osc

    locked = simulate(injected(f_inj * 1e-6, 6.0, tstop_ns=340.0))
    res = detect_lock(locked)
    spec_locked = trace_spectrum(locked)
    f_peak_locked, _ = dominant_peak(spec_locked)
    locked_off = abs(f_peak_locked - f_inj)

    free = simulate(injected(f_inj * 1e-6, 0.0, tstop_ns=340.0))
    spec_free = trace_spectrum(free)
    f_peak_free, _ = dominant_peak(spec_free)
    free_off = abs(f_peak_free - f_osc)

    elapsed = time.perf_counter() - t0
    ok = (
        res.locked
        and locked_off <= spec_locked.bin_width
        and free_off <= spec_free.bin_width
        and elapsed < 10.0
    )
    report(
        2,
        ok,
        f"6 uA at 1.05 f_osc: locked={res.locked}, peak off f_inj by "
        f"{locked_off / 1e6:.3f} MHz (bin {spec_locked.bin_width / 1e6:.3f}); "
        f"0 uA peak off f_osc by {free_off / 1e6:.3f} MHz "
        f"(bin {spec_free.bin_width / 1e6:.3f}); {elapsed:.1f}s (budget 10s)",
    )
    assert res.locked
    assert locked_off <= spec_locked.bin_width
    assert free_off <= spec_free.bin_width
    assert elapsed < 10.0


def test_criterion_03_device_parameter_trends():
    t0 = time.perf_counter()
    base = injected(420.0, 6.0)  # tstop stays derived: it must track each point
    series = {}
    for param, grid in (
        ("circuit.rs_ohm", np.linspace(30.0, 80.0, 6)),
        ("device.lnw_nH", np.linspace(40.0, 115.0, 6)),
    ):
        lows, highs = [], []
        for v in grid:
            scn = base.with_key(param, float(v))
            f_osc = free_running_period(scn.oscillator_params()).frequency
            rng = find_lock_range(scn, 0.7 * f_osc, 1.3 * f_osc, coarse_steps=32)
            assert not rng.empty, f"{param}={v}: no locked band found"
            lows.append(rng.f_low)
            highs.append(rng.f_high)
        series[param] = (np.array(lows), np.array(highs))

    rs_lows, rs_highs = series["circuit.rs_ohm"]
    l_lows, l_highs = series["device.lnw_nH"]
    rs_ok = bool(np.all(np.diff(rs_lows) > 0) and np.all(np.diff(rs_highs) > 0))
    l_ok = bool(np.all(np.diff(l_lows) < 0) and np.all(np.diff(l_highs) < 0))
    elapsed = time.perf_counter() - t0
    ok = rs_ok and l_ok and elapsed < 300.0
    report(
        3,
        ok,
        "shunt 30->80 ohm: f_low "
        f"{rs_lows[0] / 1e6:.1f}->{rs_lows[-1] / 1e6:.1f}, f_high "
        f"{rs_highs[0] / 1e6:.1f}->{rs_highs[-1] / 1e6:.1f} MHz rising={rs_ok}; "
        "inductance 40->115 nH: f_low "
        f"{l_lows[0] / 1e6:.1f}->{l_lows[-1] / 1e6:.1f}, f_high "
        f"{l_highs[0] / 1e6:.1f}->{l_highs[-1] / 1e6:.1f} MHz falling={l_ok}; "
        f"{elapsed:.0f}s (budget 300s)",
    )
    assert rs_ok and l_ok
    assert elapsed < 300.0


def test_criterion_04_coupling_strength_broadens_lock():
    t0 = time.perf_counter()
    # rows ordered with nominal coupling strength ascending: capacitance
    # up, coupling resistance down, coupling inductance down
    cases = (
        ("capacitive", "cap_fF", [50.0, 100.0, 200.0, 400.0, 800.0], (390e6, 450e6)),
        (
            "resistive",
            "res_ohm",
            [16000.0, 8000.0, 4000.0, 2000.0, 1000.0],
            (380e6, 460e6),
        ),
        (
            "inductive",
            "ind_nH",
            [3200.0, 1600.0, 800.0, 400.0, 200.0],
            (380e6, 460e6),
        ),
    )
    all_widths = {}
    for kind, key, cvals, (f_lo, f_hi) in cases:
        scn = default_scenario().with_keys(
            {
                "circuit.topology": "injected",
                "injection.mode": "coupled",
                "injection.freq_MHz": 420.0,
                "injection.amp_mV": 10.0,
                "coupling.kind": kind,
                f"coupling.{key}": cvals[0],
                "solver.tstop_ns": 360.0,
            }
        )
        fgrid = [float(f) for f in np.linspace(f_lo, f_hi, 16)]
        _, rows = lock_map(scn, cvals, fgrid)
        assert not any(c == "error" for r in rows for c in r[1:])
        all_widths[kind] = [sum(1 for c in r[1:] if c == 1) for r in rows]

    monotone = {
        kind: bool(np.all(np.diff(w) >= 0)) for kind, w in all_widths.items()
    }
    elapsed = time.perf_counter() - t0
    ok = (
        all(monotone.values())
        and all_widths["capacitive"][-1] > 0
        and all_widths["resistive"][-1] > 0
        and elapsed < 600.0
    )
    report(
        4,
        ok,
        f"locked columns of 16 per row — capacitive {all_widths['capacitive']}, "
        f"resistive {all_widths['resistive']}, "
        f"inductive {all_widths['inductive']}; all non-decreasing with "
        f"strength={all(monotone.values())}; {elapsed:.0f}s (budget 600s)",
    )
    assert monotone["capacitive"] and all_widths["capacitive"][-1] > 0
    assert monotone["resistive"] and all_widths["resistive"][-1] > 0
    assert monotone["inductive"]
    assert elapsed < 600.0


def test_criterion_05_lock_range_grows_linearly_with_amplitude():
    t0 = time.perf_counter()
    # amplitudes 3..15 uA must sit in the small-signal regime, so the
    # device is bias-scaled tenfold; the dwell ratios, and therefore the
    # free-running period, are unchanged
    scaled = default_scenario().with_keys(
        {
            "device.ic_uA": 300.0,
            "device.ir_uA": 100.0,
            "circuit.ibias_uA": 350.0,
            "circuit.topology": "injected",
            "injection.freq_MHz": 420.0,
            "injection.amp_uA": 3.0,
            "solver.tstop_ns": 360.0,
        }
    )
    f0 = free_running_period(scaled.oscillator_params()).frequency
    amps = np.array([3.0, 6.0, 9.0, 12.0, 15.0])
    widths = []
    for a in amps:
        rng = find_lock_range(
            scaled.with_key("injection.amp_uA", float(a)),
            0.94 * f0,
            1.06 * f0,
            coarse_steps=48,
        )
        assert not rng.empty
        widths.append(rng.width / 1e6)
    widths = np.array(widths)

    slope, intercept = np.polyfit(amps, widths, 1)
    fitted = slope * amps + intercept
    r2 = 1.0 - np.sum((widths - fitted) ** 2) / np.sum((widths - widths.mean()) ** 2)
    increasing = bool(np.all(np.diff(widths) > 0))
    elapsed = time.perf_counter() - t0
    ok = increasing and r2 >= 0.98
    report(
        5,
        ok,
        f"widths {np.array2string(widths, precision=3)} MHz over 3..15 uA, "
        f"strictly increasing={increasing}, linear fit R^2={r2:.6f} "
        f"(gate 0.98); {elapsed:.0f}s",
    )
    assert increasing
    assert r2 >= 0.98


def test_criterion_06_locking_delay_shrinks_with_amplitude():
    t0 = time.perf_counter()
    amps = [1.0, 3.0, 6.0, 9.0, 12.0, 15.0]
    delays = []
    for a in amps:
        res = detect_lock(simulate(injected(429.0, a, tstop_ns=320.0)))
        assert res.locked, f"amp {a} uA failed to lock at 429 MHz"
        delays.append(res.locking_delay * 1e9)
    delays = np.array(delays)
    ratio = float(delays[-1] / delays[0])
    decreasing = bool(np.all(np.diff(delays) < 0))
    elapsed = time.perf_counter() - t0
    ok = decreasing and ratio <= 0.5
    report(
        6,
        ok,
        f"delays {np.array2string(delays, precision=3)} ns over 1..15 uA, "
        f"strictly decreasing={decreasing}, delay(15)/delay(1)={ratio:.4f} "
        f"(gate 0.5); {elapsed:.0f}s",
    )
    assert decreasing
    assert ratio <= 0.5


def test_criterion_07_pair_phase_falls_with_coupling_strength():
    t0 = time.perf_counter()
    cases = (
        ("capacitive", "cap_fF", np.geomspace(10.0, 100.0, 6)),
        ("resistive", "res_ohm", np.geomspace(32000.0, 1000.0, 6)),
        ("inductive", "ind_nH", np.geomspace(100.0, 3200.0, 6)),
    )
    results = {}
    for kind, key, values in cases:
        dphis = []
        for v in values:
            scn = default_scenario().with_keys(
                {
                    "circuit.topology": "pair",
                    "circuit.init_inw2_frac": 0.6359,
                    "coupling.kind": kind,
                    f"coupling.{key}": float(v),
                }
            )
            dphis.append(phase_difference(simulate(scn)))
        results[kind] = np.array(dphis)

    checks = {
        kind: (
            bool(np.all(np.diff(d) <= 0)),
            float(d.max()),
            float(d.min()),
        )
        for kind, d in results.items()
    }
    elapsed = time.perf_counter() - t0
    ok = all(mono and mx >= 150.0 and mn <= 60.0 for mono, mx, mn in checks.values())
    detail = "; ".join(
        f"{kind} {np.array2string(d, precision=1)} deg "
        f"(non-increasing={checks[kind][0]})"
        for kind, d in results.items()
    )
    report(7, ok, f"{detail}; {elapsed:.0f}s")
    for kind, (mono, mx, mn) in checks.items():
        assert mono, f"{kind}: phase difference not monotone non-increasing"
        assert mx >= 150.0, f"{kind}: weak-end max {mx:.1f} < 150"
        assert mn <= 60.0, f"{kind}: strong-end min {mn:.1f} > 60"


def test_criterion_08_numerical_fidelity():
    t0 = time.perf_counter()
    # Parseval, both windows
    rng = np.random.default_rng(7)
    x = rng.standard_normal(1024)
    parseval = []
    for window in (WindowKind.RECTANGULAR, WindowKind.HANN):
        spec = fft_spectrum(x, 1e-9, window=window)
        w = (
            0.5 - 0.5 * np.cos(2 * np.pi * np.arange(1024) / 1024)
            if window is WindowKind.HANN
            else np.ones(1024)
        )
        xt = x * w
        time_sum = float(np.sum(xt * xt))
        freq_sum = float(np.sum(spec.magnitudes**2)) / 1024
        parseval.append(abs(time_sum - freq_sum) / time_sum)
    parseval_worst = max(parseval)

    # step-halving convergence of the event period
    oracle = free_running_period(default_scenario().oscillator_params())
    short = default_scenario().with_key(
        "solver.tstop_ns", 120.0 * oracle.period * 1e9
    )
    coarse = np.diff(simulate(short).events_up[0]).mean()
    fine = np.diff(
        simulate(short.with_key("solver.dt_ps", short.dt_ps / 2.0)).events_up[0]
    ).mean()
    halving = abs(coarse - fine) / fine

    # inter-event exponentials on integration nodes
    trace = integrate(
        build_standalone(OP),
        SolverSettings(dt=3.4e-12, t_stop=30e-9, event_tol=3.4e-18, record_stride=1),
    )
    exp_worst = 0.0
    for t0_ev, t1_ev, tau, i_inf in (
        (trace.events_down[0][0], trace.events_up[0][1], OP.tau_super, OP.i_bias),
        (trace.events_up[0][1], trace.events_down[0][1], OP.tau_normal, OP.i_settle),
    ):
        sel = (trace.times > t0_ev + 2 * trace.dt_record) & (
            trace.times < t1_ev - 2 * trace.dt_record
        )
        t = trace.times[sel]
        i = trace.i_nw[0][sel]
        ref = i_inf + (i[0] - i_inf) * np.exp(-(t - t[0]) / tau)
        exp_worst = max(exp_worst, float(np.max(np.abs(i - ref) / np.abs(ref))))

    # output-node current balance on every topology family
    kcl_worst = 0.0
    for updates in (
        {},
        {
            "circuit.topology": "injected",
            "injection.freq_MHz": 420.0,
            "injection.amp_uA": 6.0,
        },
        {
            "circuit.topology": "injected",
            "injection.mode": "coupled",
            "injection.freq_MHz": 420.0,
            "injection.amp_mV": 10.0,
            "coupling.kind": "capacitive",
            "coupling.cap_fF": 200.0,
        },
        {
            "circuit.topology": "pair",
            "coupling.kind": "resistive",
            "coupling.res_ohm": 1000.0,
        },
    ):
        scn = default_scenario().with_keys({**updates, "solver.tstop_ns": 60.0})
        kcl_worst = max(kcl_worst, kcl_residual(simulate(scn), scn))

    elapsed = time.perf_counter() - t0
    ok = (
        parseval_worst <= 1e-9
        and halving < 2e-4
        and exp_worst <= 1e-6
        and kcl_worst <= 1e-12
    )
    report(
        8,
        ok,
        f"Parseval {parseval_worst:.2e} (gate 1e-9); dt-halving period shift "
        f"{halving:.2e} (gate 2e-4); exponential fit {exp_worst:.2e} "
        f"(gate 1e-6); node-current residual {kcl_worst:.2e} (gate 1e-12); "
        f"{elapsed:.0f}s",
    )
    assert parseval_worst <= 1e-9
    assert halving < 2e-4
    assert exp_worst <= 1e-6
    assert kcl_worst <= 1e-12


def test_criterion_09_cli_reproducibility(tmp_path):
    t0 = time.perf_counter()

    def put(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    free = put("free.scn", "")
    short = put("short.scn", "[solver]\ntstop_ns = 60\n")
    spec80 = put("spec80.scn", "[solver]\ntstop_ns = 80\n")
    direct = put(
        "direct.scn",
        "[circuit]\ntopology = injected\n"
        "[injection]\nmode = direct\nfreq_MHz = 420\namp_uA = 6\n"
        "[solver]\ntstop_ns = 300\n",
    )
    coupled = put(
        "coupled.scn",
        "[circuit]\ntopology = injected\n"
        "[injection]\nmode = coupled\nfreq_MHz = 420\namp_mV = 10\n"
        "[coupling]\nkind = capacitive\ncap_fF = 200\n"
        "[solver]\ntstop_ns = 300\n",
    )
    pair = put(
        "pair.scn",
        "[circuit]\ntopology = pair\n"
        "[coupling]\nkind = resistive\nres_ohm = 1000\n"
        "[solver]\ntstop_ns = 300\n",
    )

    commands = {
        "simulate": ["simulate", short],
        "spectrum": ["spectrum", spec80, "--points", "256"],
        "lockcheck": ["lockcheck", direct],
        "lockrange": [
            "lockrange", direct,
            "--fmin-MHz", "380", "--fmax-MHz", "480", "--steps", "16",
        ],
        "sweep": [
            "sweep", free,
            "--param", "circuit.rs_ohm", "--from", "40", "--to", "60",
            "--steps", "3", "--metric", "f_osc",
        ],
        "lockmap": [
            "lockmap", coupled,
            "--cmin", "200", "--cmax", "800", "--csteps", "2",
            "--fmin-MHz", "410", "--fmax-MHz", "430", "--fsteps", "3",
        ],
        "couple": ["couple", pair],
        "iv": ["iv", free],
    }
    workered = {"lockrange", "sweep", "lockmap"}

    rerun_ok, workers_ok = {}, {}
    for name, argv in commands.items():
        code_a, out_a, err_a = run_cli(argv)
        code_b, out_b, err_b = run_cli(argv)
        assert code_a == 0, f"{name} exited {code_a}: {err_a}"
        rerun_ok[name] = (code_a, out_a, err_a) == (code_b, out_b, err_b)
        if name in workered:
            _, out_1, _ = run_cli(argv + ["--workers", "1"])
            _, out_8, _ = run_cli(argv + ["--workers", "8"])
            workers_ok[name] = out_1 == out_8

    elapsed = time.perf_counter() - t0
    ok = all(rerun_ok.values()) and all(workers_ok.values())
    report(
        9,
        ok,
        f"{len(commands)} commands byte-identical on rerun "
        f"({sum(rerun_ok.values())}/{len(rerun_ok)}); workers 1 vs 8 identical "
        f"for {sorted(workered)} ({sum(workers_ok.values())}/{len(workers_ok)}); "
        f"{elapsed:.0f}s",
    )
    for name, same in rerun_ok.items():
        assert same, f"{name}: rerun output differs"
    for name, same in workers_ok.items():
        assert same, f"{name}: --workers 1 vs 8 output differs"


def test_criterion_10_parser_corpus():
    t0 = time.perf_counter()
    assert len(CORPUS) >= 20

    fixpoints = 0
    for entry in VALID:
        first = parse_scenario(entry.text)
        assert parse_scenario(render_scenario(first)) == first, entry.name
        fixpoints += 1

    exact = 0
    for entry in INVALID:
        line, message = entry.error
        with pytest.raises(ScenarioError) as err:
            parse_scenario(entry.text)
        assert err.value.line == line, entry.name
        expected = message if line is None else f"line {line}: {message}"
        assert str(err.value) == expected, entry.name
        exact += 1

    elapsed = time.perf_counter() - t0
    ok = len(CORPUS) >= 20 and fixpoints == len(VALID) and exact == len(INVALID)
    report(
        10,
        ok,
        f"{len(CORPUS)} corpus files: {fixpoints} valid round-trip fixpoints, "
        f"{exact} rejections with exact line+message; {elapsed:.1f}s",
    )
    assert ok
