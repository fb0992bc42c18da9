"""Command-line interface: output pins, exit codes, reproducibility.

Tables are captured as raw bytes because byte-for-byte identical output
across reruns and worker counts is part of the contract. The summary
values are pinned at full repr precision: the kernel is deterministic,
so these strings must never drift on their own.
"""

import subprocess
import sys

import numpy as np
import pytest

from scnosc import parse_scenario

from conftest import run_cli, simulate


@pytest.fixture(scope="module")
def scn_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("scenarios")

    def put(name, text):
        p = d / name
        p.write_text(text, encoding="utf-8")
        return p

    put("free.scn", "")
    put("short.scn", "[solver]\ntstop_ns = 60\n")
    put(
        "locked.scn",
        "[circuit]\ntopology = injected\n"
        "[injection]\nmode = direct\nfreq_MHz = 440.9\namp_uA = 6\n",
    )
    put(
        "unlocked.scn",
        "[circuit]\ntopology = injected\n"
        "[injection]\nmode = direct\nfreq_MHz = 440.9\namp_uA = 0\n"
        "[solver]\ntstop_ns = 300\n",
    )
    put(
        "pair.scn",
        "[circuit]\ntopology = pair\n[coupling]\nkind = resistive\nres_ohm = 1000\n",
    )
    put(
        "coupled.scn",
        "[circuit]\ntopology = injected\n"
        "[injection]\nmode = coupled\nfreq_MHz = 420\namp_mV = 10\n"
        "[coupling]\nkind = capacitive\ncap_fF = 200\n"
        "[solver]\ntstop_ns = 300\n",
    )
    put(
        "direct300.scn",
        "[circuit]\ntopology = injected\n"
        "[injection]\nmode = direct\nfreq_MHz = 420\namp_uA = 6\n"
        "[solver]\ntstop_ns = 300\n",
    )
    put("bigstep.scn", "[solver]\ndt_ps = 200\ntstop_ns = 60\n")
    return d


class TestSimulate:
    def test_csv_matches_library_trace(self, scn_dir):
        path = scn_dir / "short.scn"
        code, out, err = run_cli(["simulate", str(path)])
        assert code == 0 and err == ""
        lines = out.split(b"\n")
        assert lines[0] == b"t_ns,vout_mV,inw_uA,phase"
        trace = simulate(parse_scenario(path.read_text()))
        assert out.count(b"\n") == trace.n_samples + 1
        first = lines[1].split(b",")
        assert first[0] == b"0.0"
        assert float(first[2]) == pytest.approx(trace.i_nw[0][0] * 1e6, rel=1e-15)

    def test_rerun_is_byte_identical(self, scn_dir):
        argv = ["simulate", str(scn_dir / "short.scn")]
        _, a, _ = run_cli(argv)
        _, b, _ = run_cli(argv)
        assert a == b

    def test_out_file_and_summary(self, scn_dir, tmp_path):
        out_csv = tmp_path / "trace.csv"
        code, out, err = run_cli(
            ["simulate", str(scn_dir / "free.scn"), "--out", str(out_csv)]
        )
        assert code == 0
        text = out.decode("utf-8")
        assert "topology = standalone" in text
        assert "samples = 840528" in text
        assert "t_stop_ns = 952.5972666666665" in text
        assert "events_up_1 = 399" in text
        assert "events_down_1 = 399" in text
        assert "mean_period_ns_1 = 2.3814940920051364" in text
        with out_csv.open("rb") as fh:
            assert fh.readline() == b"t_ns,vout_mV,inw_uA,phase\n"

    def test_svg_written_and_deterministic(self, scn_dir, tmp_path):
        svg1 = tmp_path / "a.svg"
        svg2 = tmp_path / "b.svg"
        argv = ["simulate", str(scn_dir / "short.scn"), "--out"]
        run_cli(argv + [str(tmp_path / "x.csv"), "--svg", str(svg1)])
        run_cli(argv + [str(tmp_path / "y.csv"), "--svg", str(svg2)])
        body = svg1.read_text(encoding="utf-8")
        assert body.startswith("<svg ") and body.endswith("</svg>")
        assert body == svg2.read_text(encoding="utf-8")


class TestSpectrum:
    def test_stdout_table_and_stderr_peak(self, scn_dir):
        code, out, err = run_cli(["spectrum", str(scn_dir / "free.scn")])
        assert code == 0
        lines = out.split(b"\n")
        assert lines[0] == b"f_MHz,magnitude"
        assert out.count(b"\n") == 514  # header + 513 bins up to Nyquist
        assert err.strip() == "f_peak_MHz = 419.8173939854113"

    def test_out_file_summary(self, scn_dir, tmp_path):
        code, out, err = run_cli(
            ["spectrum", str(scn_dir / "free.scn"), "--out", str(tmp_path / "s.csv")]
        )
        assert code == 0 and err == ""
        text = out.decode("utf-8")
        assert "n_points = 1024" in text
        assert "bin_width_MHz = 3.2888274584643016" in text
        assert "f_peak_MHz = 419.8173939854113" in text
        assert "peak_magnitude = 0.08522373401331992" in text


class TestLockcheck:
    def test_locked_summary(self, scn_dir):
        code, out, err = run_cli(["lockcheck", str(scn_dir / "locked.scn")])
        assert code == 0
        text = out.decode("utf-8")
        assert "locked = yes" in text
        assert "f_inj_MHz = 440.9" in text
        assert "f_dominant_MHz = 440.8999999996881" in text
        assert "locked_amplitude_mV = 1.168210416819996" in text
        assert "locking_delay_ns = 11.952536419207284" in text
        assert "mean_phase_offset_deg = 100.60829055223155" in text

    def test_unlocked_summary(self, scn_dir):
        code, out, _ = run_cli(["lockcheck", str(scn_dir / "unlocked.scn")])
        assert code == 0
        text = out.decode("utf-8")
        assert "locked = no" in text
        assert "locking_delay_ns" not in text
        assert "mean_phase_offset_deg" not in text

    def test_standalone_scenario_exits_3(self, scn_dir):
        code, out, err = run_cli(["lockcheck", str(scn_dir / "free.scn")])
        assert code == 3
        assert "trace has no injection reference" in err


class TestLockrange:
    def test_band_summary(self, scn_dir):
        code, out, err = run_cli(
            [
                "lockrange",
                str(scn_dir / "direct300.scn"),
                "--fmin-MHz",
                "336",
                "--fmax-MHz",
                "504",
                "--steps",
                "16",
            ]
        )
        assert code == 0
        text = out.decode("utf-8")
        assert "empty = no" in text
        assert "f_low_MHz = 426.25624999999997" in text
        assert "f_high_MHz = 474.3375" in text
        assert "width_MHz = 48.08125" in text
        assert "multiple_intervals = no" in text

    def test_workers_do_not_change_output(self, scn_dir):
        argv = [
            "lockrange",
            str(scn_dir / "direct300.scn"),
            "--fmin-MHz",
            "380",
            "--fmax-MHz",
            "480",
            "--steps",
            "16",
        ]
        _, a, _ = run_cli(argv + ["--workers", "1"])
        _, b, _ = run_cli(argv + ["--workers", "4"])
        assert a == b


class TestSweep:
    def test_f_osc_table(self, scn_dir, tmp_path):
        svg = tmp_path / "sweep.svg"
        code, out, err = run_cli(
            [
                "sweep",
                str(scn_dir / "free.scn"),
                "--param",
                "circuit.rs_ohm",
                "--from",
                "40",
                "--to",
                "60",
                "--steps",
                "3",
                "--metric",
                "f_osc",
                "--svg",
                str(svg),
            ]
        )
        assert code == 0 and err == ""
        lines = out.decode("utf-8").split("\n")
        assert lines[0] == "circuit.rs_ohm,f_osc_MHz,status"
        assert len(lines) == 5  # header + 3 rows + trailing
        for line, rs in zip(lines[1:4], ("40.0", "50.0", "60.0")):
            cells = line.split(",")
            assert cells[0] == rs and cells[2] == "ok"
        assert svg.read_text(encoding="utf-8").startswith("<svg ")

    def test_workers_do_not_change_output(self, scn_dir):
        argv = [
            "sweep",
            str(scn_dir / "free.scn"),
            "--param",
            "device.lnw_nH",
            "--from",
            "40",
            "--to",
            "115",
            "--steps",
            "6",
            "--metric",
            "f_osc",
        ]
        _, a, _ = run_cli(argv + ["--workers", "1"])
        _, b, _ = run_cli(argv + ["--workers", "8"])
        assert a == b


class TestLockmap:
    ARGS = [
        "--cmin",
        "200",
        "--cmax",
        "800",
        "--csteps",
        "2",
        "--fmin-MHz",
        "410",
        "--fmax-MHz",
        "430",
        "--fsteps",
        "3",
    ]

    def test_matrix_bytes(self, scn_dir):
        code, out, err = run_cli(
            ["lockmap", str(scn_dir / "coupled.scn"), *self.ARGS]
        )
        assert code == 0 and err == ""
        assert out == (
            b"cap_fF,410.0,420.0,430.0\n200.0,0,0,1\n800.0,0,0,1\n"
        )

    def test_workers_do_not_change_output(self, scn_dir):
        argv = ["lockmap", str(scn_dir / "coupled.scn"), *self.ARGS]
        _, a, _ = run_cli(argv + ["--workers", "1"])
        _, b, _ = run_cli(argv + ["--workers", "2"])
        assert a == b


class TestCouple:
    def test_pair_summary(self, scn_dir):
        code, out, err = run_cli(["couple", str(scn_dir / "pair.scn")])
        assert code == 0
        text = out.decode("utf-8")
        assert "synchronized = yes" in text
        assert "delta_phi_deg = 19.508955572980756" in text
        assert "mean_period_ns_1 = 2.3696392838413924" in text
        assert "mean_period_ns_2 = 2.371418844405906" in text

    def test_single_oscillator_exits_3(self, scn_dir):
        code, _, err = run_cli(["couple", str(scn_dir / "free.scn")])
        assert code == 3
        assert "two-oscillator" in err


class TestIv:
    def test_default_curve(self, scn_dir):
        code, out, err = run_cli(["iv", str(scn_dir / "free.scn")])
        assert code == 0 and err == ""
        lines = out.decode("utf-8").split("\n")
        assert lines[0] == "branch,i_uA,v_mV"
        assert len(lines) == 403  # header + 201 up + 200 down + trailing
        assert lines[1] == "up,0.0,0.0"
        # apex of the ramp: 1.5*i_c through the 50 ohm shunt divider
        assert lines[201].split(",") == [
            "up",
            "44.99999999999999",
            "2.1428571428571423",
        ]
        assert lines[-2] == "down,0.0,0.0"

    def test_bare_curve(self, scn_dir):
        code, out, _ = run_cli(["iv", str(scn_dir / "free.scn"), "--bare"])
        assert code == 0
        lines = out.decode("utf-8").split("\n")
        # without the shunt the apex drop is the full i*r_nw
        assert lines[201].split(",") == ["up", "44.99999999999999", "45.0"]

    def test_out_matches_stdout(self, scn_dir, tmp_path):
        _, direct, _ = run_cli(["iv", str(scn_dir / "free.scn")])
        p = tmp_path / "iv.csv"
        code, out, _ = run_cli(["iv", str(scn_dir / "free.scn"), "--out", str(p)])
        assert code == 0 and out == b""
        assert p.read_bytes() == direct

    def test_svg(self, scn_dir, tmp_path):
        svg = tmp_path / "iv.svg"
        code, _, _ = run_cli(["iv", str(scn_dir / "free.scn"), "--svg", str(svg)])
        assert code == 0
        assert svg.read_text(encoding="utf-8").count("<polyline") == 2


class TestExitCodes:
    def test_usage_error_is_1(self, scn_dir):
        with pytest.raises(SystemExit) as exc:
            run_cli(["does-not-exist", str(scn_dir / "free.scn")])
        assert exc.value.code == 1
        with pytest.raises(SystemExit) as exc:
            run_cli(["sweep", str(scn_dir / "free.scn")])  # missing required args
        assert exc.value.code == 1

    def test_missing_scenario_file_is_2(self, tmp_path):
        code, _, err = run_cli(["simulate", str(tmp_path / "absent.scn")])
        assert code == 2
        assert err.startswith("scenario error: cannot read scenario file")

    def test_bad_scenario_content_is_2(self, tmp_path):
        p = tmp_path / "bad.scn"
        p.write_text("[thermal]\n", encoding="utf-8")
        code, _, err = run_cli(["simulate", str(p)])
        assert code == 2
        assert "unknown section [thermal]" in err

    def test_solver_rejection_is_3(self, scn_dir):
        code, _, err = run_cli(["simulate", str(scn_dir / "bigstep.scn")])
        assert code == 3
        assert err.startswith("error: dt=")
        assert "tau_normal/10" in err


def test_module_entry_point_help():
    proc = subprocess.run(
        [sys.executable, "-m", "scnosc", "--help"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert "usage:" in proc.stdout
    for cmd in ("simulate", "spectrum", "lockcheck", "lockrange",
                "sweep", "lockmap", "couple", "iv"):
        assert cmd in proc.stdout
