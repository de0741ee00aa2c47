import json
import math
from pathlib import Path

import numpy as np
import pytest

from polariton_gate import io
from polariton_gate.cli import main
from polariton_gate.config import load_config
from polariton_gate.constants import HBAR

ROOT = Path(__file__).resolve().parents[1]

SPLIT = {"UpUp": 0.5, "DownDown": 1.5, "UpDown": 1.0}


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, command, cfg, out="out", threads=1):
    out_dir = tmp_path / out
    code = main([command, "--config", write_config(tmp_path, cfg), "--out", str(out_dir),
                 "--threads", str(threads)])
    return code, out_dir


def small(omega=0.5, tau=4.0, **extra):
    cfg = {"dynamics": {"gamma_meV": 1.0, "detunings_meV": SPLIT},
           "pulse": {"shape": "gaussian", "tau_ps": tau, "omega_peak_meV": omega}}
    cfg.update(extra)
    return cfg


def test_device_command(tmp_path, capsys):
    code = main(["device", "--config", str(ROOT / "configs" / "device.json"),
                 "--out", str(tmp_path)])
    assert code == 0
    d = json.loads((tmp_path / "device.json").read_text())
    assert d["derived"]["tau_polariton_ps"] == 2 * d["derived"]["tau_photon_ps"]
    assert d["derived"]["V_ueV"] == pytest.approx(1.40, abs=0.01)
    assert d["comparisons"]["V_ueV"]["reference"] == 2.0
    text = (tmp_path / "device.txt").read_text()
    assert "V_ueV vs quoted" in text and "quoted 2" in text
    assert "exchange coupling" in capsys.readouterr().out


def test_reflectivity_out_of_bounds(tmp_path, capsys):
    code, _ = run(tmp_path, "device", {"device": {"reflectivity": 1.2},
                                       "pulse": {"tau_ps": 1.0}})
    assert code == 1
    err = capsys.readouterr().err
    assert "device.reflectivity" in err and "0 < r < 1" in err


@pytest.mark.parametrize("cfg,field", [
    ({"pulse": {"tau_ps": 1.0}, "bogus": 1}, "config"),
    ({"dynamics": {"gamma_meV": 1.0, "detunings_meV": SPLIT}, "pulse": {"tau_ps": -1.0}},
     "pulse.tau_ps"),
    ({"dynamics": {"gamma_meV": 1.0, "detunings_meV": {"UpUp": 1.0}}, "pulse": {"tau_ps": 1.0}},
     "dynamics.detunings_meV"),
    ({"dynamics": {"gamma_meV": "3"}, "pulse": {"tau_ps": 1.0}}, "dynamics.gamma_meV"),
    ({"dynamics": {"gamma_meV": 1.0, "detunings_meV": SPLIT},
      "pulse": {"tau_ps": 1.0, "n_samples": 100}}, "pulse.n_samples"),
    ({"dynamics": {"gamma_meV": 1.0, "detunings_meV": SPLIT}, "pulse": {"tau_ps": 1.0},
      "sweep": {"tau_ps": [1, 2, 3]}}, "sweep.omega_meV"),
])
def test_validation_errors_name_the_field(tmp_path, capsys, cfg, field):
    code, _ = run(tmp_path, "fidelity", cfg)
    assert code == 1
    assert f"{field}:" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["device", "--config", str(tmp_path / "nope.json")]) == 1
    assert "no such file" in capsys.readouterr().err


def test_undriven_trace(tmp_path):
    code, out = run(tmp_path, "trace", small(omega=0.0))
    assert code == 0
    files = sorted(p.name for p in out.glob("trajectory_*.csv"))
    assert files == ["trajectory_DownDown.csv", "trajectory_UpDown.csv", "trajectory_UpUp.csv"]
    for f in files:
        t, alpha, omega = io.read_trajectory_csv(out / f)
        assert not np.any(alpha) and not np.any(omega)
    summary = json.loads((out / "trace_summary.json").read_text())
    assert summary["max_separation"] == 0.0
    assert summary["files"]["DownUp"] == "trajectory_UpDown.csv"


def test_trace_round_trip(tmp_path):
    code, out = run(tmp_path, "trace", small())
    assert code == 0
    s = json.loads((out / "trace_summary.json").read_text())
    assert {"t_at_max_ps", "within_noise", "residual_amplitudes"} <= set(s)
    data = {k: io.read_trajectory_csv(out / f) for k, f in s["files"].items()}
    for p in s["pairs"]:
        _, a_i, omega = data[p["i"]]
        _, a_j, _ = data[p["j"]]
        phi = io.phase_from_samples(a_i, a_j, omega, s["gamma_meV"], s["grid"]["dt_ps"])
        assert abs(phi.real - p["theta"]) <= 1e-12
        assert abs(phi.imag - p["gamma"]) <= 1e-12


def test_square_pulse_trace_matches_circle(tmp_path):
    T = 2 * math.pi * HBAR
    cfg = {"dynamics": {"gamma_meV": 0.0, "detunings_meV": {"UpUp": 1.0, "DownDown": 1.0,
                                                            "UpDown": 1.0}},
           "pulse": {"shape": "square", "tau_ps": T, "omega_peak_meV": 0.1, "t_center_ps": T / 2,
                     "window_ps": [0.0, T]}}
    code, out = run(tmp_path, "trace", cfg)
    assert code == 0
    t, alpha, _ = io.read_trajectory_csv(out / "trajectory_UpUp.csv")
    expected = -0.1 * (1 - np.exp(-1j * t / HBAR))
    assert np.max(np.abs(alpha - expected)) < 1e-8


def test_fidelity_undriven_and_uncoupled(tmp_path):
    code, out = run(tmp_path, "fidelity", small(omega=0.0))
    assert code == 0
    assert json.loads((out / "gate_report.json").read_text())["report"]["fidelity"] == 0.25
    cfg = {"device": {"spot_radius_um": 2.0}, "dynamics": {"gamma_meV": 3.0, "coupling_ueV": 0.0},
           "pulse": {"tau_ps": 5.0, "omega_peak_meV": 2.0}}
    code, out = run(tmp_path, "fidelity", cfg, out="v0")
    assert code == 0
    assert json.loads((out / "gate_report.json").read_text())["report"]["fidelity"] == 0.25
    lines = (out / "phases.csv").read_text().splitlines()
    assert lines[0] == "pair,theta_rad,gamma,odd_pi_residual_rad" and len(lines) == 7


def test_single_point_undriven_sweep(tmp_path):
    cfg = small(sweep={"tau_ps": [4.0, 4.0, 1], "omega_meV": [0.0, 0.0, 1]})
    code, out = run(tmp_path, "sweep", cfg)
    assert code == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows == ["tau_ps,omega_meV,fidelity", "4,0,0.25"]
    meta = json.loads((out / "sweep.json").read_text())
    assert meta["axes"]["tau_ps"] == {"min": 4.0, "max": 4.0, "count": 1}


def test_optimize_reports_pump_power(tmp_path):
    cfg = small(optimize={"start": [4.0, 0.5], "max_iter": 3, "tau_photon_ps": 0.65})
    code, out = run(tmp_path, "optimize", cfg)
    assert code == 0
    opt = json.loads((out / "optimum.json").read_text())["optimum"]
    from polariton_gate import pump_power
    assert opt["pump_power_mW"] == pump_power(opt["omega_meV"], 786.0, 0.65)
    assert opt["iterations"] == 3


def test_optimize_with_sweep_writes_reproduction_report(tmp_path):
    cfg = small(sweep={"tau_ps": [3.0, 5.0, 3], "omega_meV": [0.3, 0.7, 3]},
                optimize={"max_iter": 2, "reference": [4.0, 0.5],
                          "reference_steps": [0.1, 0.05]})
    code, out = run(tmp_path, "optimize", cfg)
    assert code == 0
    rep = json.loads((out / "reproduction.json").read_text())
    assert {"target_reached", "reference_point", "stripes_coarse", "residual_at_optimum"} <= set(rep)
    assert isinstance(rep["reference_point"]["is_local_maximum"], bool)
    assert rep["residual_at_optimum"]["noise_radius"] == 0.5
    assert (out / "reproduction.txt").exists()


def test_verify_small_fixture(tmp_path, capsys):
    cfg = small(tau=3.0, oracle={"n_max": 20, "alpha_max": 1.0})
    code, out = run(tmp_path, "verify", cfg)
    assert code == 0
    v = json.loads((out / "verify.json").read_text())
    assert v["passed"] and v["metrics"]["oracle_dtheta"] <= 1e-4


def test_verify_undriven_is_all_zero(tmp_path):
    code, out = run(tmp_path, "verify", small(omega=0.0, tau=2.0, oracle={"n_max": 10}))
    assert code == 0
    v = json.loads((out / "verify.json").read_text())
    assert all(val == 0.0 for val in v["metrics"].values())


def test_verify_coarse_step_fails(tmp_path, capsys):
    cfg = small()
    cfg["pulse"]["dt_ps"] = 1.0
    code, _ = run(tmp_path, "verify", cfg)
    assert code != 0
    assert "step rule" in capsys.readouterr().err


def test_verify_truncation_failure_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "verify", small(tau=3.0, oracle={"n_max": 3, "alpha_max": 2.0}))
    assert code == 2
    assert "n_max" in capsys.readouterr().err


def _snapshot(directory):
    return {p.name: p.read_bytes() for p in sorted(Path(directory).iterdir())}


@pytest.mark.parametrize("command", ["trace", "fidelity", "sweep"])
def test_outputs_are_byte_identical(tmp_path, command):
    cfg = small(sweep={"tau_ps": [3.0, 5.0, 2], "omega_meV": [0.3, 0.7, 2]})
    _, a = run(tmp_path, command, cfg, out="a", threads=1)
    _, b = run(tmp_path, command, cfg, out="b", threads=2)
    assert _snapshot(a) == _snapshot(b)


def test_shipped_configs_load():
    for path in sorted((ROOT / "configs").glob("*.json")):
        load_config(path)
