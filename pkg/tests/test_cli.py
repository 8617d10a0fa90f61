import json
import os
import subprocess
import sys

import pytest

from dnmodes.cli import main


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def transport_cfg(out):
    return {
        "schema": 1,
        "preset": {
            "type": "transport",
            "k": 2.0,
            "Q0": {"kind": "smoothstep", "v0": 0.0, "v1": 1.0, "t0": 0.0, "t1": 2.0},
            "Cc": 1.0,
        },
        "window": [0.0, 2.0],
        "samples": 50,
        "integrator": {"dt": 0.01, "method": "rk4"},
        "output": {"path": out},
    }


def rotation_cfg(out):
    return {
        "schema": 1,
        "preset": {
            "type": "rotation",
            "m": 1.0,
            "omega1": 2.0,
            "omega2": 1.0,
            "phi": {"kind": "linear-ramp", "t0": 0.0, "v0": 0.0, "t1": 1.0, "v1": 0.3},
        },
        "window": [0.0, 2.0],
        "samples": 50,
        "output": {"path": out},
    }


def test_analyze_deterministic(tmp_path, capsys):
    out = str(tmp_path / "run")
    cfg = write_cfg(tmp_path, transport_cfg(out))
    assert main(["analyze", "--config", cfg]) == 0
    first = (tmp_path / "run_analyze.csv").read_bytes()
    assert main(["analyze", "--config", cfg]) == 0
    assert (tmp_path / "run_analyze.csv").read_bytes() == first
    header = first.decode().splitlines()[0]
    assert header == "t,theta,theta_dot,omega1_sq,omega2_sq,ellipse_r1,ellipse_r2,q1_eq,q2_eq"
    assert len(first.decode().splitlines()) == 51
    capsys.readouterr()


def test_classify_output(tmp_path, capsys):
    cfg = write_cfg(tmp_path, transport_cfg(str(tmp_path / "run")))
    assert main(["classify", "--config", cfg]) == 0
    first = capsys.readouterr().out
    report = json.loads(first)
    assert report["separable"] is True
    assert report["max_abs_theta_dot"] == 0.0
    assert report["analytic_case"] in ("k1=k2=k", "k1=k2, m1=m2")
    assert main(["classify", "--config", cfg]) == 0
    assert capsys.readouterr().out == first


def test_classify_rotation_not_separable(tmp_path, capsys):
    cfg = write_cfg(tmp_path, rotation_cfg(str(tmp_path / "run")))
    assert main(["classify", "--config", cfg]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["separable"] is False
    assert report["max_abs_theta_dot"] == pytest.approx(0.3)


def test_simulate_deterministic_and_report(tmp_path, capsys):
    out = str(tmp_path / "sim")
    cfg = write_cfg(tmp_path, transport_cfg(out))
    assert main(["simulate", "--config", cfg]) == 0
    lab = (tmp_path / "sim_lab.csv").read_bytes()
    mode = (tmp_path / "sim_mode.csv").read_bytes()
    report = json.loads((tmp_path / "sim_report.json").read_text())
    assert report["frame_equivalence_max_deviation"] <= 1e-6
    assert main(["simulate", "--config", cfg]) == 0
    assert (tmp_path / "sim_lab.csv").read_bytes() == lab
    assert (tmp_path / "sim_mode.csv").read_bytes() == mode
    capsys.readouterr()


def test_sweep_deterministic(tmp_path, capsys, monkeypatch):
    out = str(tmp_path / "sw")
    cfg_obj = transport_cfg(out)
    cfg_obj["sweep"] = {
        "axes": [
            {"path": "preset.k", "values": [1.0, 2.0, 3.0]},
            {"path": "preset.Cc", "values": [0.5, 1.0]},
        ]
    }
    cfg = write_cfg(tmp_path, cfg_obj)
    monkeypatch.setenv("DNM_THREADS", "2")
    assert main(["sweep", "--config", cfg]) == 0
    first = (tmp_path / "sw_sweep.csv").read_bytes()
    assert len(first.decode().splitlines()) == 7  # header + 3*2 grid points
    monkeypatch.setenv("DNM_THREADS", "1")
    assert main(["sweep", "--config", cfg]) == 0
    assert (tmp_path / "sw_sweep.csv").read_bytes() == first
    capsys.readouterr()


def test_out_flag_overrides_config(tmp_path, capsys):
    cfg = write_cfg(tmp_path, transport_cfg(str(tmp_path / "ignored")))
    override = str(tmp_path / "other")
    assert main(["analyze", "--config", cfg, "--out", override]) == 0
    assert (tmp_path / "other_analyze.csv").exists()
    assert not (tmp_path / "ignored_analyze.csv").exists()
    capsys.readouterr()


def test_config_errors_exit_2(tmp_path, capsys):
    bad = transport_cfg(str(tmp_path / "x"))
    bad["unexpected"] = 1
    assert main(["analyze", "--config", write_cfg(tmp_path, bad, "a.json")]) == 2

    bad = transport_cfg(str(tmp_path / "x"))
    bad["schema"] = 2
    assert main(["analyze", "--config", write_cfg(tmp_path, bad, "b.json")]) == 2

    bad = transport_cfg(str(tmp_path / "x"))
    bad["preset"]["oops"] = 1
    assert main(["analyze", "--config", write_cfg(tmp_path, bad, "c.json")]) == 2

    bad = transport_cfg(str(tmp_path / "x"))
    bad["window"] = [2.0, 0.0]
    assert main(["analyze", "--config", write_cfg(tmp_path, bad, "d.json")]) == 2

    missing = str(tmp_path / "nope.json")
    assert main(["analyze", "--config", missing]) == 2
    capsys.readouterr()


def test_preset_domain_exit_3(tmp_path, capsys):
    cfg_obj = transport_cfg(str(tmp_path / "x"))
    # stiffness ramps through zero inside the window
    cfg_obj["preset"]["k"] = {"kind": "linear-ramp", "t0": 0.0, "v0": 1.0, "t1": 1.0, "v1": -1.0}
    cfg = write_cfg(tmp_path, cfg_obj)
    assert main(["analyze", "--config", cfg]) == 3
    capsys.readouterr()


def test_divergence_exit_4_with_partial(tmp_path, capsys):
    cfg_obj = {
        "schema": 1,
        "preset": {"type": "custom", "k": 0.0, "k1": -50.0, "k2": 1.0},
        "window": [0.0, 30.0],
        "integrator": {"dt": 0.01},
        "initial_state": {"q": [1.0, 0.0], "p": [0.0, 0.0]},
        "output": {"path": str(tmp_path / "div")},
    }
    cfg = write_cfg(tmp_path, cfg_obj)
    assert main(["simulate", "--config", cfg]) == 4
    assert (tmp_path / "div_lab.csv.partial").exists()
    capsys.readouterr()


def test_console_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, transport_cfg(str(tmp_path / "ep")))
    proc = subprocess.run(
        [sys.executable, "-m", "dnmodes.cli", "classify", "--config", cfg],
        capture_output=True,
        text=True,
        env={**os.environ, "PYTHONHASHSEED": "0"},
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["separable"] is True
