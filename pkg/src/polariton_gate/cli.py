"""Command-line front end.

    polariton-gate {device,trace,fidelity,sweep,optimize,verify} --config FILE [--out DIR] [--threads N]

Exit codes: 0 success, 1 invalid input, 2 a numerical tolerance was not met.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig, load_config
from .device import BASIS, derive_cavity, exchange_coupling, pump_power
from .exceptions import ConfigError, SweepPointError, TruncationError
from .fock import compare_with_analytic
from .gate import evaluate_gate, gate_pulse, simulate
from .optimize import SweepSpec, argmax, refine, stripe_analysis, sweep
from .phases import NOISE_RADIUS, all_phase_pairs, decoherence_exponent
from .pulse import make_grid

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE = 0, 1, 2

# quoted device figures the derived values are compared against
REFERENCE_DEVICE = {
    "R_um": (2.0, "relative", 0.10),
    "tau_photon_ps": (0.65, "relative", 0.25),
    "V_ueV": (2.0, "factor", 2.0),
}
REFERENCE_RADIUS_UM = 2.0
TARGET_FIDELITY = 0.9999
RESIDUAL_RATIO_LIMIT = 1e-3

VERIFY_TOLERANCES = {
    "quadrature_vs_ode": 1e-8,
    "gamma_identity": 1e-9,
    "oracle_dtheta": 1e-4,
    "oracle_dgamma": 1e-4,
    "oracle_truncation_shift": 1e-8,
    "oracle_trace_deviation": 1e-10,
}


class ToleranceFailure(RuntimeError):
    pass


def _physics(cfg: RunConfig):
    return {
        "gamma_meV": cfg.gamma,
        "detunings_meV": {s.value: cfg.detunings[s] for s in BASIS},
    }


def _pulse_dict(pulse):
    return {
        "shape": pulse.shape,
        "tau_ps": pulse.tau,
        "omega_peak_meV": pulse.omega_peak,
        "t_center_ps": pulse.t_center,
        "window_ps": list(pulse.window),
    }


def _grid_dict(grid):
    return {"t0_ps": grid.t0, "dt_ps": grid.dt, "n_samples": grid.n}


def _grid(cfg: RunConfig, pulse=None):
    pulse = pulse or cfg.pulse
    if cfg.grid is not None and pulse is cfg.pulse:
        return cfg.grid
    return make_grid(pulse, [cfg.detunings[s] for s in BASIS], cfg.gamma)


def _compare(value, reference, kind, tol):
    if kind == "relative":
        dev = value / reference - 1.0
        ok = abs(dev) <= tol
    else:
        dev = value / reference
        ok = 1.0 / tol <= dev <= tol
    return {"computed": value, "reference": reference, "mode": kind, "tolerance": tol,
            "deviation": dev, "within_tolerance": ok}


def cmd_device(cfg: RunConfig, out: Path, threads=1):
    if cfg.device is None:
        raise ConfigError("required for the device command", field="device")
    d = derive_cavity(cfg.device)
    V_ref = exchange_coupling(cfg.device.trap_radius_nm, REFERENCE_RADIUS_UM, cfg.device.eps_r)
    comparisons = {k: _compare(getattr(d, k), *REFERENCE_DEVICE[k]) for k in REFERENCE_DEVICE}
    comparisons["V_ueV_at_2um"] = _compare(V_ref, *REFERENCE_DEVICE["V_ueV"])
    payload = {
        "params": {k: getattr(cfg.device, k) for k in cfg.device.__dataclass_fields__},
        "derived": d.to_dict(),
        "checks": {"tau_polariton_over_tau_photon": d.tau_polariton_ps / d.tau_photon_ps},
        "comparisons": comparisons,
    }
    io.write_json(out / "device.json", payload)
    rows = [
        ("cavity length", f"{d.L_c_nm:.4f}", "nm"),
        ("photon lifetime", f"{d.tau_photon_ps:.6g}", "ps"),
        ("polariton lifetime", f"{d.tau_polariton_ps:.6g}", "ps"),
        ("linewidth hbar/tau", f"{d.gamma_meV:.6g}", "meV"),
        ("linewidth h/tau", f"{d.gamma_h_meV:.6g}", "meV"),
        ("decay rate", f"{d.gamma_rate_per_ps:.6g}", "1/ps"),
        ("spot radius", f"{d.R_um:.6g}", "um"),
        ("spot area", f"{d.A_um2:.6g}", "um^2"),
        ("coupling radius", f"{d.coupling_radius_um:.6g}", "um"),
        ("exchange coupling", f"{d.V_ueV:.6g}", "ueV"),
        ("quality factor", f"{d.Q_report:.6g}", ""),
    ]
    rows += [(f"detuning {s.value}", f"{v:.9g}", "meV") for s, v in d.detunings_meV.items()]
    for name, c in comparisons.items():
        verdict = "ok" if c["within_tolerance"] else "OUTSIDE TOLERANCE"
        rows.append((f"{name} vs quoted", f"{c['computed']:.6g}",
                     f"quoted {c['reference']:g}, {c['mode']} {c['deviation']:+.4g}, {verdict}"))
    text = io.aligned(rows)
    io.write_text(out / "device.txt", text)
    print(text)
    return EXIT_OK


def cmd_trace(cfg: RunConfig, out: Path, threads=1):
    pulse = cfg.pulse
    trajs, report = evaluate_gate(cfg.detunings, cfg.gamma, pulse, _grid(cfg))
    files = io.trajectory_files(trajs)
    written = set()
    for spin, traj in trajs.items():
        if files[spin] not in written:
            io.write_trajectory_csv(out / files[spin], traj, pulse, cfg.trace_stride)
            written.add(files[spin])
    rep = report.to_dict()
    summary = {
        "files": {s.value: f for s, f in files.items()},
        "stride": cfg.trace_stride,
        "grid": _grid_dict(trajs[BASIS[0]].grid),
        "pulse": _pulse_dict(pulse),
        **_physics(cfg),
        "residual_amplitudes": rep["residual_amplitudes"],
        "max_separation": rep["max_separation"],
        "min_overlap": rep["min_overlap"],
        "t_at_max_ps": rep["t_at_max_ps"],
        "separation_pair": rep["separation_pair"],
        "noise_radius": NOISE_RADIUS,
        "within_noise": rep["within_noise"],
        "pairs": rep["pairs"],
    }
    io.write_json(out / "trace_summary.json", summary)
    print(f"wrote {len(written)} trajectory files; max separation "
          f"{rep['max_separation']:.6g} (within noise: {rep['within_noise']})")
    return EXIT_OK


def cmd_fidelity(cfg: RunConfig, out: Path, threads=1):
    trajs, report = evaluate_gate(cfg.detunings, cfg.gamma, cfg.pulse, _grid(cfg))
    payload = {"pulse": _pulse_dict(cfg.pulse), **_physics(cfg),
               "grid": _grid_dict(trajs[BASIS[0]].grid), "report": report.to_dict()}
    io.write_json(out / "gate_report.json", payload)
    io.write_phases_csv(out / "phases.csv", report)
    print(f"F = {report.fidelity:.12g}")
    return EXIT_OK


def _require_sweep(cfg):
    if cfg.sweep is None:
        raise ConfigError("required for this command", field="sweep")
    return cfg.sweep


def _write_sweep(out, grid, cfg, name="sweep"):
    io.write_sweep_csv(out / f"{name}.csv", grid)
    tau, omega, F = argmax(grid)
    payload = {
        "axes": {
            "tau_ps": {"min": grid.spec.tau_range[0], "max": grid.spec.tau_range[1],
                       "count": grid.spec.tau_range[2]},
            "omega_meV": {"min": grid.spec.omega_range[0], "max": grid.spec.omega_range[1],
                          "count": grid.spec.omega_range[2]},
        },
        "shape": grid.spec.shape,
        **_physics(cfg),
        "best": {"tau_ps": tau, "omega_meV": omega, "fidelity": F},
        "grid": grid.to_dict(),
    }
    io.write_json(out / f"{name}.json", payload)


def cmd_sweep(cfg: RunConfig, out: Path, threads=1):
    grid = sweep(_require_sweep(cfg), n_jobs=threads)
    _write_sweep(out, grid, cfg)
    tau, omega, F = argmax(grid)
    print(f"best cell: tau = {tau:.6g} ps, Omega = {omega:.6g} meV, F = {F:.12g}")
    return EXIT_OK


def _tau_photon(cfg):
    if cfg.optimize.tau_photon_ps is not None:
        return cfg.optimize.tau_photon_ps
    if cfg.device is not None:
        return derive_cavity(cfg.device).tau_photon_ps
    return None


def _wavelength(cfg):
    return cfg.device.wavelength_nm if cfg.device is not None else 786.0


def _reference_check(cfg, threads):
    tau0, omega0 = cfg.optimize.reference
    st, so = cfg.optimize.reference_steps
    spec = SweepSpec((tau0 - st, tau0 + st, 3), (omega0 - so, omega0 + so, 3), cfg.detunings,
                     cfg.gamma, cfg.pulse.shape, cfg.sweep.min_intervals)
    local = sweep(spec, n_jobs=threads)
    centre = float(local.fidelity[1, 1])
    others = np.delete(local.fidelity.ravel(), 4)
    return {
        "tau_ps": tau0,
        "omega_meV": omega0,
        "fidelity": centre,
        "steps": {"tau_ps": st, "omega_meV": so},
        "neighbourhood": local.to_dict(),
        "is_local_maximum": bool(np.all(centre >= others)),
    }


def _zoom(cfg, centre, threads):
    z = cfg.optimize.zoom
    tau, omega = centre
    ht, ho = float(z.get("tau_halfwidth_ps", 1.0)), float(z.get("omega_halfwidth_meV", 0.3))
    spec = SweepSpec((tau - ht, tau + ht, int(z.get("tau_count", 9))),
                     (max(0.0, omega - ho), omega + ho, int(z.get("omega_count", 33))),
                     cfg.detunings, cfg.gamma, cfg.pulse.shape, cfg.sweep.min_intervals)
    return sweep(spec, n_jobs=threads)


def _residual_check(cfg, tau, omega):
    pulse = gate_pulse(tau, omega, cfg.pulse.shape)
    trajs, report = evaluate_gate(cfg.detunings, cfg.gamma, pulse,
                                  min_intervals=cfg.sweep.min_intervals if cfg.sweep else 4096)
    ratios = {s.value: v[1] for s, v in report.residual_amplitudes.items()}
    return {
        "tau_ps": tau,
        "omega_meV": omega,
        "ratio_limit": RESIDUAL_RATIO_LIMIT,
        "residual_ratio": ratios,
        "residual_within_limit": all(r <= RESIDUAL_RATIO_LIMIT for r in ratios.values()),
        "max_separation": report.leakage.max_separation,
        "noise_radius": NOISE_RADIUS,
        "within_noise": report.leakage.within_noise,
        "t_at_max_ps": report.leakage.t_at_max,
    }


def _reproduction_text(rep):
    rows = [
        ("grid best", f"{rep['grid_best']['fidelity']:.10g}",
         f"tau {rep['grid_best']['tau_ps']:.6g} ps, Omega {rep['grid_best']['omega_meV']:.6g} meV"),
        ("refined optimum", f"{rep['refined']['fidelity']:.10g}",
         f"tau {rep['refined']['tau_ps']:.8g} ps, Omega {rep['refined']['omega_meV']:.8g} meV"),
        (f"F >= {TARGET_FIDELITY} found", str(rep["target_reached"]), ""),
    ]
    ref = rep.get("reference_point")
    if ref:
        rows += [("reference point F", f"{ref['fidelity']:.10g}",
                  f"tau {ref['tau_ps']:g} ps, Omega {ref['omega_meV']:g} meV"),
                 ("reference is local max", str(ref["is_local_maximum"]), "")]
    for name in ("stripes_coarse", "stripes_zoom"):
        s = rep.get(name)
        if s:
            med = s.get("median_slope_meV_per_ps")
            rows.append((name.replace("_", " "), str(s["anti_correlated"]),
                         f"{s['n_negative']}/{s['n_ridges']} ridges with negative slope, median "
                         f"{med if med is None else format(med, '.4g')} meV/ps, constant-area "
                         f"slope {s['constant_area_slope_meV_per_ps']:.4g}"))
    r = rep["residual_at_optimum"]
    rows += [("residual ratio max", f"{max(r['residual_ratio'].values()):.4g}",
              f"limit {r['ratio_limit']:g}, within: {r['residual_within_limit']}"),
             ("max separation", f"{r['max_separation']:.6g}",
              f"noise radius {r['noise_radius']}, within noise: {r['within_noise']}")]
    text = io.aligned(rows)
    if rep.get("note"):
        text += "\n\n" + rep["note"]
    return text


UNIT_NOTE = (
    "The quoted optimum was not recovered: either no cell reaches the target fidelity or the "
    "reference point is not a local maximum. With Omega read in meV and gamma = 3 meV the "
    "uu/dd decoherence exponent stays of order unity across the region, which caps F well "
    "below the target; the grid evidence above is the outcome of the model as configured."
)


def cmd_optimize(cfg: RunConfig, out: Path, threads=1):
    opt = cfg.optimize
    grid = None
    if cfg.sweep is not None:
        grid = sweep(cfg.sweep, n_jobs=threads)
        _write_sweep(out, grid, cfg)
        tau, omega, _ = argmax(grid)
        seed = (tau, omega)
    else:
        seed = opt.start or (cfg.pulse.tau, cfg.pulse.omega_peak)
    min_intervals = cfg.sweep.min_intervals if cfg.sweep else 4096
    result = refine(seed, cfg.detunings, cfg.gamma, step_fraction=opt.step_fraction,
                    tol_fraction=opt.tol_fraction, max_iter=opt.max_iter,
                    shape=cfg.pulse.shape, min_intervals=min_intervals)
    tp = _tau_photon(cfg)
    if tp is not None:
        result.pump_power_mW = pump_power(result.omega, _wavelength(cfg), tp)
        result.extra["pump_inputs"] = {"tau_photon_ps": tp, "wavelength_nm": _wavelength(cfg)}
    result.extra["seed"] = {"tau_ps": seed[0], "omega_meV": seed[1]}
    io.write_json(out / "optimum.json", {**_physics(cfg), "optimum": result.to_dict()})
    print(f"optimum: tau = {result.tau:.8g} ps, Omega = {result.omega:.8g} meV, "
          f"F = {result.fidelity:.12g}")
    if grid is None:
        return EXIT_OK

    tau_b, omega_b, F_b = argmax(grid)
    best_F = max(F_b, result.fidelity)
    rep = {
        **_physics(cfg),
        "region": {"tau_ps": list(grid.spec.tau_range),
                   "omega_meV": list(grid.spec.omega_range)},
        "grid_best": {"tau_ps": tau_b, "omega_meV": omega_b, "fidelity": F_b},
        "refined": {"tau_ps": result.tau, "omega_meV": result.omega,
                    "fidelity": result.fidelity},
        "target_fidelity": TARGET_FIDELITY,
        "target_reached": bool(best_F >= TARGET_FIDELITY),
        "grid_fidelity_range": [float(grid.fidelity.min()), float(grid.fidelity.max())],
        "stripes_coarse": stripe_analysis(grid),
    }
    if opt.reference is not None:
        rep["reference_point"] = _reference_check(cfg, threads)
    if opt.zoom is not None:
        zgrid = _zoom(cfg, (result.tau, result.omega), threads)
        _write_sweep(out, zgrid, cfg, name="sweep_zoom")
        rep["stripes_zoom"] = stripe_analysis(zgrid)
    rep["residual_at_optimum"] = _residual_check(cfg, result.tau, result.omega)
    ref = rep.get("reference_point")
    if ref and not (rep["target_reached"] and ref["is_local_maximum"]):
        rep["note"] = UNIT_NOTE
    io.write_json(out / "reproduction.json", rep)
    text = _reproduction_text(rep)
    io.write_text(out / "reproduction.txt", text)
    print(text)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path, threads=1):
    pulse = cfg.pulse
    trajs = simulate(cfg.detunings, cfg.gamma, pulse, _grid(cfg))
    quad = simulate(cfg.detunings, cfg.gamma, pulse, trajs[BASIS[0]].grid, method="quadrature")
    dq = max(float(np.max(np.abs(trajs[s].alpha - quad[s].alpha))) for s in BASIS)
    pairs = all_phase_pairs(trajs, pulse)
    dg = 0.0
    for (i, j), p in pairs.items():
        dg = max(dg, abs(p.big_gamma - decoherence_exponent(trajs[i], trajs[j])))

    oracle_pulse = pulse
    if cfg.oracle.tau_ps is not None:
        oracle_pulse = gate_pulse(cfg.oracle.tau_ps, pulse.omega_peak, pulse.shape)
    comp = compare_with_analytic(cfg.detunings, cfg.gamma, oracle_pulse, n_max=cfg.oracle.n_max,
                                 alpha_max=cfg.oracle.alpha_max,
                                 amplitude_scale=cfg.oracle.amplitude_scale)
    trace_dev = max((d["max_trace_deviation"] for d in comp.diagonal.values()), default=0.0)
    metrics = {
        "quadrature_vs_ode": dq,
        "gamma_identity": dg,
        "oracle_dtheta": comp.max_theta_error,
        "oracle_dgamma": comp.max_gamma_error,
        "oracle_truncation_shift": comp.n_max_shift,
        "oracle_trace_deviation": trace_dev,
    }
    failed = sorted(k for k, v in metrics.items() if not v <= VERIFY_TOLERANCES[k])
    payload = {
        "pulse": _pulse_dict(pulse),
        **_physics(cfg),
        "grid": _grid_dict(trajs[BASIS[0]].grid),
        "metrics": metrics,
        "tolerances": VERIFY_TOLERANCES,
        "passed": not failed,
        "failed": failed,
        "oracle": {"pulse": _pulse_dict(oracle_pulse), **comp.to_dict(),
                   "grid": _grid_dict(comp.grid)},
    }
    payload["oracle"].pop("dt_ps")
    payload["oracle"].pop("n_samples")
    io.write_json(out / "verify.json", payload)
    for k, v in metrics.items():
        print(f"{k:26s} {v:.3e}  (tol {VERIFY_TOLERANCES[k]:g})")
    if failed:
        raise ToleranceFailure("tolerance exceeded: " + ", ".join(
            f"{k} = {metrics[k]:.3e} > {VERIFY_TOLERANCES[k]:g}" for k in failed))
    return EXIT_OK


COMMANDS = {
    "device": cmd_device,
    "trace": cmd_trace,
    "fidelity": cmd_fidelity,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "verify": cmd_verify,
}

HELP = {
    "device": "derived cavity and coupling numbers, compared with the quoted figures",
    "trace": "coherent-state trajectories of the four spin configurations as CSV",
    "fidelity": "pair phases and controlled-Z fidelity of one pulse",
    "sweep": "fidelity over a (tau, Omega) grid",
    "optimize": "grid search plus pattern-search refinement and pump power",
    "verify": "cross-checks: quadrature vs ODE, decoherence identity, Fock-space oracle",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="polariton-gate",
                                     description="Polariton-mediated two-spin phase gate.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory (overrides output_dir)")
        p.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("must be >= 1", field="--threads")
        cfg = load_config(args.config)
        out = Path(args.out if args.out is not None else cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SweepPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID if isinstance(exc.cause, ConfigError) else EXIT_TOLERANCE
    except (ToleranceFailure, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
