import io
import math
import subprocess
import sys

import numpy as np
import pytest

from leoscatter.cli import read_config, run


def table(path):
    lines = [ln for ln in open(path).read().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    return header, np.array(rows)


def notes(path):
    return [ln[2:] for ln in open(path).read().splitlines() if ln.startswith("# ")]


def test_geometry_zenith_delay_closure(tmp_path, capsys):
    out = tmp_path / "g.csv"
    code = run(["geometry", "--elevation", "90", "--height", "65", "--max-delay-ns", "433.6", "--out", str(out)])
    header, rows = table(out)
    assert header == ["elevation_deg", "a_m", "b_m", "c_m", "sigma_tau_ns", "max_delay_ns"]
    assert rows[0, 1] == 65.0
    # the default 30 ns target cannot be met with c = 130 m, so b is unresolved
    assert code == 3 and math.isnan(rows[0, 2])
    assert any("UnreachableTargetError" in n for n in notes(out))


def test_geometry_zenith_delay_closure_feasible(tmp_path):
    out = tmp_path / "g.csv"
    assert run(["geometry", "--elevation", "90", "--max-delay-ns", "433.6", "--rms-delay-ns", "120",
                "--out", str(out)]) == 0
    _, rows = table(out)
    assert rows[0, 1] == 65.0
    assert rows[0, 4] == pytest.approx(120, rel=1e-6)


def test_psd_truncated_support_discontinuity(tmp_path):
    full, cut = tmp_path / "full.csv", tmp_path / "cut.csv"
    assert run(["psd", "--elevation", "45", "--support", "0,360", "--out", str(full)]) == 0
    assert run(["psd", "--elevation", "45", "--support", "0,270", "--out", str(cut)]) == 0
    _, rows = table(cut)
    f, d = rows[:, 0], rows[:, 1]
    half = 1 / 201
    below = d[np.nonzero(f + half <= 0)[0][-1]]
    above = d[np.nonzero(f - half >= 0)[0][0]]
    assert above < below
    assert "support_mass: 1" in notes(full)
    assert any(n.startswith("support_mass: 0.") for n in notes(cut))


def test_mc_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(["mc", "--elevation", "30", "--samples", "1000", "--seed", "7", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    header, rows = table(a)
    assert header == ["alpha", "beta", "r", "excess_delay_s", "doppler_norm"]
    assert rows.shape == (1000, 5)


@pytest.mark.parametrize("argv", [
    ["psd", "--elevation", "120", "--bins", "31"],
    ["compose", "--elevation", "40", "--k-factor", "3", "--f-los", "0.5", "--bins", "21"],
    ["pdf", "--elevation", "20", "--marginal-azimuth", "--points", "37"],
    ["mc", "--elevation", "10", "--samples", "500", "--seed", "3", "--histogram", "20"],
    ["synth", "--elevation", "60", "--rays", "50", "--duration", "5", "--rate", "8", "--seed", "2"],
    ["delay-stats", "--elevation", "45", "--axes", "80.1,50.2,40.3"],
])
def test_embedded_config_reproduces_output(tmp_path, argv):
    first, second = tmp_path / "1.csv", tmp_path / "2.csv"
    assert run(argv + ["--out", str(first)]) == 0
    assert run([argv[0], "--config", str(first), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\nelevation=30\nbins=21\nmethod=delta\n")
    assert read_config(cfg) == {"elevation": "30", "bins": "21", "method": "delta"}
    out = tmp_path / "o.csv"
    assert run(["psd", "--config", str(cfg), "--bins", "41", "--out", str(out)]) == 0
    assert "bins=41" in notes(out) and "method=delta" in notes(out) and "elevation=30.0" in notes(out)
    assert table(out)[1].shape == (41, 2)


def test_bad_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("elevation=30\nsamples=5\n")
    assert run(["psd", "--config", str(cfg)]) == 2
    assert "samples" in capsys.readouterr().err


def test_sweep_rows_and_markers(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["sweep", "--start", "18", "--end", "20", "--step", "1", "--out", str(out)]) == 3
    text = out.read_text()
    assert "# error elevation_deg=19" in text
    _, rows = table(out)
    assert rows.shape == (3, 6)
    assert math.isnan(rows[1, 1]) and not math.isnan(rows[2, 1])
    assert "failed_rows: 1" in notes(out)


def test_sweep_defaults_at_horizon(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["sweep", "--start", "0", "--end", "10", "--step", "5", "--out", str(out)]) == 0
    _, rows = table(out)
    np.testing.assert_array_equal(rows[:, 0], [0, 5, 10])
    assert rows[0, 4] == pytest.approx(250, abs=1.25)
    np.testing.assert_allclose(rows[:, 2], 0.6 * rows[:, 1], rtol=1e-8)
    assert rows[0, 3] == 65


def test_schedule_override(tmp_path):
    sched = tmp_path / "sched.csv"
    sched.write_text("elevation_deg,rms_delay_ns\n0,150\n90,40\n")
    out = tmp_path / "g.csv"
    assert run(["geometry", "--elevation", "0", "--schedule", str(sched), "--out", str(out)]) == 0
    assert table(out)[1][0, 4] == pytest.approx(150, rel=1e-6)


def test_compose_writes_line(tmp_path):
    out = tmp_path / "c.csv"
    assert run(["compose", "--elevation", "40", "--k-factor", "9", "--f-los", "0.7", "--bins", "21",
                "--out", str(out)]) == 0
    assert "line 0.7 0.9" in notes(out)
    assert "continuous_power: 0.1" in notes(out)


def test_pdf_sphere_marginal(tmp_path):
    out = tmp_path / "p.csv"
    assert run(["pdf", "--elevation", "30", "--axes", "5,5,5", "--marginal-elevation", "--points", "19",
                "--out", str(out)]) == 0
    header, rows = table(out)
    assert header == ["beta_deg", "density"]
    np.testing.assert_allclose(rows[:, 1], np.cos(np.radians(rows[:, 0])), atol=1e-5)


def test_pdf_joint_grid(tmp_path):
    out = tmp_path / "j.csv"
    assert run(["pdf", "--elevation", "30", "--points", "5", "--axes", "5,5,5", "--out", str(out)]) == 0
    header, rows = table(out)
    assert header == ["alpha_deg", "beta_deg", "density"] and rows.shape == (25, 3)


def test_synth_columns(tmp_path):
    out = tmp_path / "w.csv"
    assert run(["synth", "--elevation", "30", "--rays", "1", "--duration", "2", "--rate", "10",
                "--out", str(out)]) == 0
    header, rows = table(out)
    assert header == ["t", "re", "im"] and rows.shape == (20, 3)
    np.testing.assert_allclose(np.hypot(rows[:, 1], rows[:, 2]), 1, rtol=1e-8)


@pytest.mark.parametrize("argv", [
    ["psd", "--elevation", "200"],
    ["psd", "--elevation", "30", "--bogus"],
    ["psd", "--elevation", "30", "--bins", "4"],
    ["psd", "--elevation", "30", "--method", "delta", "--support", "0,270"],
    ["psd"],
    ["sweep", "--start", "50", "--end", "10"],
    ["mc", "--elevation", "30", "--samples", "0"],
    ["synth", "--elevation", "30", "--rate", "2"],
    ["frobnicate"],
])
def test_validation_errors_exit_2(argv, capsys):
    assert run(argv) == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("leoscatter") and "\n" not in err


def test_unwritable_output(capsys):
    assert run(["psd", "--elevation", "30", "--bins", "11", "--out", "/nonexistent/dir/x.csv"]) == 2


def test_stdout_and_module_entry():
    proc = subprocess.run([sys.executable, "-m", "leoscatter", "psd", "--elevation", "30", "--bins", "11"],
                          capture_output=True, text=True, check=True)
    assert "f_over_fd,density" in proc.stdout


def test_help_exits_cleanly(capsys):
    assert run(["--help"]) == 0
