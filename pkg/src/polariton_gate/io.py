"""Deterministic file emission and the matching readers.

Floats are written with 17 significant digits, which round-trips every
double exactly. Nothing time- or host-dependent is ever written.
"""
from __future__ import annotations

import json
import math
from enum import Enum
from pathlib import Path

import numpy as np

from .device import SpinConfig
from .phases import _odd_pi_distance, phase_from_samples  # noqa: F401  (re-exported)

FLOAT_FMT = "%.17g"
TRAJECTORY_COLUMNS = ("t_ps", "re_alpha", "im_alpha", "abs_alpha", "omega_meV")


def _jsonable(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _clean(obj):
    # non-finite floats are not valid JSON; write them as strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {(k.value if isinstance(k, Enum) else str(k)): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, default=_jsonable, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def write_text(path, text):
    Path(path).write_text(text if text.endswith("\n") else text + "\n")


def write_table(path, header, columns):
    """CSV with a one-line header and 17-digit floats."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w", newline="\n") as fh:
        np.savetxt(fh, data, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")


def write_trajectory_csv(path, traj, pulse, stride=1):
    t = traj.times()[::stride]
    a = traj.alpha[::stride]
    write_table(path, TRAJECTORY_COLUMNS, [t, a.real, a.imag, np.abs(a), pulse(t)])


def read_trajectory_csv(path):
    """``(t, alpha, omega)`` arrays from a trajectory CSV."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2], data[:, 4]


def write_sweep_csv(path, grid):
    rows = list(grid.rows())
    cols = list(zip(*rows)) if rows else ([], [], [])
    write_table(path, ("tau_ps", "omega_meV", "fidelity"), cols)


def write_phases_csv(path, report):
    """One row per configuration pair: theta, Gamma and the odd-pi residual of theta."""
    lines = ["pair,theta_rad,gamma,odd_pi_residual_rad"]
    for (i, j), p in report.pairs.items():
        vals = (p.theta, p.big_gamma, _odd_pi_distance(p.theta))
        lines.append(f"{i.value}-{j.value}," + ",".join(FLOAT_FMT % v for v in vals))
    write_text(path, "\n".join(lines))


def trajectory_files(trajectories):
    """File name per distinct sample array; degenerate configurations share one file."""
    files = {}
    names = {}
    for spin, traj in trajectories.items():
        key = id(traj.alpha)
        if key not in names:
            names[key] = f"trajectory_{spin.value}.csv"
        files[spin] = names[key]
    return files


def aligned(rows):
    """Plain-text table: name, value and unit columns padded to equal width."""
    width = max(len(r[0]) for r in rows)
    vwidth = max(len(r[1]) for r in rows)
    out = []
    for name, value, *rest in rows:
        line = f"{name.ljust(width)}  {value.rjust(vwidth)}"
        if rest and rest[0]:
            line += "  " + "  ".join(rest)
        out.append(line.rstrip())
    return "\n".join(out)


def spin_from_name(name) -> SpinConfig:
    return SpinConfig(name)
