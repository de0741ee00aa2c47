"""JSON run configuration.

Every physical key carries its unit as a suffix (``tau_ps``, ``gamma_meV``,
``coupling_ueV``). All sections are validated when the file is loaded, before
any computation runs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .device import BASIS, DeviceParams, SpinConfig, derive_cavity, detunings
from .exceptions import ConfigError
from .pulse import Pulse, TimeGrid, grid_with_step
from .optimize import SweepSpec

SECTIONS = {"device", "dynamics", "pulse", "trace", "sweep", "optimize", "oracle", "output_dir"}


def _check_keys(section, data, allowed):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", field=section)
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys {unknown}; allowed {sorted(allowed)}", field=section)


def _number(section, data, key, default=None, positive=False, nonnegative=False):
    value = data.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=f"{section}.{key}")
    value = float(value)
    if positive and not value > 0.0:
        raise ConfigError(f"must be positive, got {value}", field=f"{section}.{key}")
    if nonnegative and value < 0.0:
        raise ConfigError(f"must be nonnegative, got {value}", field=f"{section}.{key}")
    return value


def parse_device(data) -> DeviceParams:
    names = [f.name for f in fields(DeviceParams)]
    _check_keys("device", data, names)
    try:
        return DeviceParams(**data)
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], field=f"device.{exc.field}") from None
    except TypeError as exc:
        raise ConfigError(str(exc), field="device") from None


def parse_detunings(data):
    _check_keys("dynamics.detunings_meV", data, [s.value for s in BASIS])
    out = {}
    for s in BASIS:
        if s.value in data:
            out[s] = _number("dynamics.detunings_meV", data, s.value)
    if SpinConfig.DOWN_UP not in out and SpinConfig.UP_DOWN in out:
        out[SpinConfig.DOWN_UP] = out[SpinConfig.UP_DOWN]
    missing = [s.value for s in BASIS if s not in out]
    if missing:
        raise ConfigError(f"missing configurations {missing}", field="dynamics.detunings_meV")
    if out[SpinConfig.UP_DOWN] != out[SpinConfig.DOWN_UP]:
        raise ConfigError("UpDown and DownUp must be degenerate", field="dynamics.detunings_meV")
    return out


def parse_pulse(data):
    _check_keys("pulse", data, ["shape", "omega_peak_meV", "tau_ps", "t_center_ps", "window_ps",
                                "n_samples", "dt_ps"])
    window = data.get("window_ps")
    if window is not None:
        if not (isinstance(window, (list, tuple)) and len(window) == 2):
            raise ConfigError("expected [t_start, t_end]", field="pulse.window_ps")
        window = (float(window[0]), float(window[1]))
    try:
        pulse = Pulse(
            shape=data.get("shape", "gaussian"),
            omega_peak=_number("pulse", data, "omega_peak_meV", 0.0, nonnegative=True),
            tau=_number("pulse", data, "tau_ps", None, positive=True) or _missing("pulse.tau_ps"),
            t_center=_number("pulse", data, "t_center_ps"),
            window=window,
        )
    except ConfigError as exc:
        if exc.field and not exc.field.startswith("pulse."):
            raise ConfigError(str(exc).split(": ", 1)[-1], field=f"pulse.{exc.field}") from None
        raise
    n_samples = data.get("n_samples")
    dt = _number("pulse", data, "dt_ps", positive=True)
    if n_samples is not None and dt is not None:
        raise ConfigError("give at most one of n_samples and dt_ps", field="pulse")
    grid = None
    if n_samples is not None:
        if not isinstance(n_samples, int) or n_samples < 3 or n_samples % 2 == 0:
            raise ConfigError("must be an odd integer >= 3", field="pulse.n_samples")
        grid = TimeGrid.spanning(*pulse.window, n_samples - 1)
    elif dt is not None:
        grid = grid_with_step(pulse, dt)
    return pulse, grid


def _missing(name):
    raise ConfigError("required", field=name)


@dataclass
class OracleSettings:
    n_max: int = 40
    alpha_max: float = 2.0
    amplitude_scale: float | None = None
    tau_ps: float | None = None


@dataclass
class OptimizeSettings:
    start: tuple | None = None
    step_fraction: float = 0.02
    tol_fraction: float = 1e-4
    max_iter: int = 500
    reference: tuple | None = None
    reference_steps: tuple = (0.02, 0.01)
    zoom: dict | None = None
    tau_photon_ps: float | None = None


@dataclass
class RunConfig:
    device: DeviceParams | None
    gamma: float
    detunings: dict
    pulse: Pulse
    grid: TimeGrid | None = None
    sweep: SweepSpec | None = None
    optimize: OptimizeSettings = field(default_factory=OptimizeSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    trace_stride: int = 1
    output_dir: str = "out"
    source: dict = field(default_factory=dict)


def _pair(section, value, key):
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ConfigError("expected a two-element list", field=f"{section}.{key}")
    return float(value[0]), float(value[1])


def parse_config(data) -> RunConfig:
    _check_keys("config", data, SECTIONS)
    device = parse_device(data["device"]) if "device" in data else None
    derived = derive_cavity(device) if device is not None else None

    dyn = data.get("dynamics", {})
    _check_keys("dynamics", dyn, ["gamma_meV", "coupling_ueV", "detunings_meV"])
    gamma = _number("dynamics", dyn, "gamma_meV", nonnegative=True)
    if gamma is None:
        if derived is None:
            raise ConfigError("required without a device section", field="dynamics.gamma_meV")
        gamma = derived.gamma_meV
    if "detunings_meV" in dyn:
        dets = parse_detunings(dyn["detunings_meV"])
    else:
        if device is None:
            raise ConfigError("required without a device section", field="dynamics.detunings_meV")
        V = _number("dynamics", dyn, "coupling_ueV", nonnegative=True)
        dets = detunings(device.delta_p_meV, derived.V_ueV if V is None else V, device.r0_sq)

    if "pulse" not in data:
        raise ConfigError("required", field="pulse")
    pulse, grid = parse_pulse(data["pulse"])

    trace = data.get("trace", {})
    _check_keys("trace", trace, ["stride"])
    stride = trace.get("stride", 1)
    if not isinstance(stride, int) or stride < 1:
        raise ConfigError("must be a positive integer", field="trace.stride")

    sweep = None
    if "sweep" in data:
        sw = data["sweep"]
        _check_keys("sweep", sw, ["tau_ps", "omega_meV", "min_intervals"])
        for key in ("tau_ps", "omega_meV"):
            if key not in sw:
                raise ConfigError("required [min, max, count]", field=f"sweep.{key}")
        sweep = SweepSpec(tuple(sw["tau_ps"]), tuple(sw["omega_meV"]), dets, gamma,
                          shape=pulse.shape, min_intervals=int(sw.get("min_intervals", 4096)))

    opt = data.get("optimize", {})
    _check_keys("optimize", opt, ["start", "step_fraction", "tol_fraction", "max_iter",
                                  "reference", "reference_steps", "zoom", "tau_photon_ps"])
    zoom = opt.get("zoom")
    if zoom is not None:
        _check_keys("optimize.zoom", zoom, ["tau_halfwidth_ps", "omega_halfwidth_meV",
                                            "tau_count", "omega_count"])
    settings = OptimizeSettings(
        start=_pair("optimize", opt["start"], "start") if opt.get("start") else None,
        step_fraction=_number("optimize", opt, "step_fraction", 0.02, positive=True),
        tol_fraction=_number("optimize", opt, "tol_fraction", 1e-4, positive=True),
        max_iter=int(opt.get("max_iter", 500)),
        reference=_pair("optimize", opt["reference"], "reference") if opt.get("reference") else None,
        reference_steps=_pair("optimize", opt.get("reference_steps", (0.02, 0.01)),
                              "reference_steps"),
        zoom=zoom,
        tau_photon_ps=_number("optimize", opt, "tau_photon_ps", positive=True),
    )

    orc = data.get("oracle", {})
    _check_keys("oracle", orc, ["n_max", "alpha_max", "amplitude_scale", "tau_ps"])
    n_max = orc.get("n_max", 40)
    if not isinstance(n_max, int) or n_max < 1:
        raise ConfigError("must be a positive integer", field="oracle.n_max")
    oracle = OracleSettings(
        n_max=n_max,
        alpha_max=_number("oracle", orc, "alpha_max", 2.0, positive=True),
        amplitude_scale=_number("oracle", orc, "amplitude_scale", positive=True),
        tau_ps=_number("oracle", orc, "tau_ps", positive=True),
    )
    return RunConfig(device, gamma, dets, pulse, grid, sweep, settings, oracle, stride,
                     str(data.get("output_dir", "out")), data)


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}", field="--config") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", field="--config") from None
    return parse_config(data)
