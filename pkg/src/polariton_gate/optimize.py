"""Fidelity landscape over pulse width and amplitude, and local refinement."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .device import BASIS
from .exceptions import ConfigError, SweepPointError
from .gate import evaluate_gate, gate_fidelity, gate_pulse
from .pulse import DEFAULT_INTERVALS

FIDELITY_SLACK = 1e-12


def _axis(name, rng):
    try:
        lo, hi, count = float(rng[0]), float(rng[1]), int(rng[2])
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"expected [min, max, count], got {rng!r}", field=name) from None
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}", field=name)
    if count == 1 and lo != hi:
        raise ConfigError("a single-point axis needs min == max", field=name)
    if count >= 2 and not hi > lo:
        raise ConfigError(f"range must be increasing, got [{lo}, {hi}]", field=name)
    return lo, hi, count


@dataclass(frozen=True)
class SweepSpec:
    """Rectangular (tau, Omega) grid plus the fixed physics.

    ``tau_range`` and ``omega_range`` are ``(min, max, count)`` in ps and meV.
    """

    tau_range: tuple
    omega_range: tuple
    detunings: dict
    gamma: float
    shape: str = "gaussian"
    min_intervals: int = DEFAULT_INTERVALS

    def __post_init__(self):
        tau = _axis("sweep.tau_ps", self.tau_range)
        omega = _axis("sweep.omega_meV", self.omega_range)
        if not tau[0] > 0.0:
            raise ConfigError("pulse widths must be positive", field="sweep.tau_ps")
        if omega[0] < 0.0:
            raise ConfigError("drive amplitudes must be nonnegative", field="sweep.omega_meV")
        if self.gamma < 0.0:
            raise ConfigError("must be nonnegative", field="gamma_meV")
        missing = [s.value for s in BASIS if s not in self.detunings]
        if missing:
            raise ConfigError(f"missing configurations {missing}", field="detunings_meV")
        object.__setattr__(self, "tau_range", tau)
        object.__setattr__(self, "omega_range", omega)

    def taus(self):
        return np.linspace(*self.tau_range)

    def omegas(self):
        return np.linspace(*self.omega_range)


@dataclass
class SweepGrid:
    taus: np.ndarray
    omegas: np.ndarray
    fidelity: np.ndarray  # (len(taus), len(omegas))
    spec: SweepSpec | None = None

    def rows(self):
        for a, tau in enumerate(self.taus):
            for b, omega in enumerate(self.omegas):
                yield float(tau), float(omega), float(self.fidelity[a, b])

    def to_dict(self):
        return {
            "tau_ps": [float(t) for t in self.taus],
            "omega_meV": [float(o) for o in self.omegas],
            "fidelity": [[float(v) for v in row] for row in self.fidelity],
            "layout": "fidelity[tau_index][omega_index]",
        }


def _evaluate_point(spec: SweepSpec, index, tau, omega):
    try:
        return gate_fidelity(spec.detunings, spec.gamma, tau, omega, spec.shape,
                             spec.min_intervals)
    except Exception as exc:  # poison the whole sweep, keep the coordinates
        raise SweepPointError(tau, omega, index, exc) from exc


def sweep(spec: SweepSpec, n_jobs=1) -> SweepGrid:
    """Fidelity on every grid point.

    Points are independent; with ``n_jobs > 1`` they run in worker processes
    and the results are placed by index, so the matrix is identical for any
    worker count.
    """
    taus, omegas = spec.taus(), spec.omegas()
    points = [((a, b), float(t), float(o))
              for a, t in enumerate(taus) for b, o in enumerate(omegas)]
    if n_jobs == 1:
        values = [_evaluate_point(spec, idx, t, o) for idx, t, o in points]
    else:
        values = Parallel(n_jobs=n_jobs)(
            delayed(_evaluate_point)(spec, idx, t, o) for idx, t, o in points)
    F = np.empty((len(taus), len(omegas)))
    for (idx, t, o), v in zip(points, values):
        if not (math.isfinite(v) and -FIDELITY_SLACK <= v <= 1.0 + FIDELITY_SLACK):
            raise SweepPointError(t, o, idx, f"fidelity {v} out of range")
        F[idx] = v
    return SweepGrid(taus, omegas, F, spec)


def argmax(grid: SweepGrid):
    """First maximal cell in row-major order: lowest tau index, then lowest Omega index."""
    flat = int(np.argmax(grid.fidelity))
    a, b = np.unravel_index(flat, grid.fidelity.shape)
    return float(grid.taus[a]), float(grid.omegas[b]), float(grid.fidelity[a, b])


@dataclass
class OptimumResult:
    tau: float
    omega: float
    fidelity: float
    seed_fidelity: float
    iterations: int
    evaluations: int
    converged: bool
    steps: tuple
    report: object = None
    pump_power_mW: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "tau_ps": self.tau,
            "omega_meV": self.omega,
            "fidelity": self.fidelity,
            "seed_fidelity": self.seed_fidelity,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "final_steps": {"tau_ps": self.steps[0], "omega_meV": self.steps[1]},
            "pump_power_mW": self.pump_power_mW,
        }
        if self.report is not None:
            out["gate_report"] = self.report.to_dict()
        out.update(self.extra)
        return out


def pattern_search(objective, start, steps, tolerances, max_iter=500,
                   lower=(0.0, 0.0), strict_lower=(True, False)):
    """Compass search maximising ``objective(x, y)``.

    Each iteration evaluates the four axis neighbours at the current step
    sizes and moves to the best strictly improving one; otherwise both steps
    are halved. Stops when both steps drop below ``tolerances`` or after
    ``max_iter`` iterations. Neighbours outside the lower bounds are skipped.
    """
    cache = {}

    def f(x, y):
        key = (x, y)
        if key not in cache:
            cache[key] = float(objective(x, y))
        return cache[key]

    def admissible(p):
        for v, lo, strict in zip(p, lower, strict_lower):
            if v < lo or (strict and v == lo):
                return False
        return True

    x, y = float(start[0]), float(start[1])
    sx, sy = float(steps[0]), float(steps[1])
    best = f(x, y)
    seed = best
    iterations = 0
    converged = sx < tolerances[0] and sy < tolerances[1]
    while not converged and iterations < max_iter:
        iterations += 1
        candidates = [(x + sx, y), (x - sx, y), (x, y + sy), (x, y - sy)]
        move = None
        for p in candidates:
            if not admissible(p):
                continue
            v = f(*p)
            if v > best and (move is None or v > move[1]):
                move = (p, v)
        if move is not None:
            (x, y), best = move
        else:
            sx *= 0.5
            sy *= 0.5
        converged = sx < tolerances[0] and sy < tolerances[1]
    return {
        "x": x, "y": y, "value": best, "seed_value": seed, "iterations": iterations,
        "evaluations": len(cache), "converged": converged, "steps": (sx, sy),
    }


def refine(start, detunings, gamma, objective=None, step_fraction=0.02, tol_fraction=1e-4,
           max_iter=500, shape="gaussian", min_intervals=DEFAULT_INTERVALS,
           with_report=True) -> OptimumResult:
    """Pattern-search refinement of a (tau, Omega) seed.

    Initial steps are ``step_fraction`` of each coordinate and the search
    stops once both steps fall below ``tol_fraction`` of the seed coordinate.
    ``objective`` replaces the physical fidelity (used for test stubs).
    """
    tau0, omega0 = float(start[0]), float(start[1])
    if not tau0 > 0.0 or omega0 < 0.0:
        raise ConfigError(f"seed must have tau > 0 and Omega >= 0, got {start}", field="start")
    if objective is None:
        def objective(tau, omega):
            return gate_fidelity(detunings, gamma, tau, omega, shape, min_intervals)
        physical = True
    else:
        physical = False
    steps = (step_fraction * tau0, step_fraction * omega0)
    tols = (tol_fraction * tau0, tol_fraction * omega0)
    if omega0 == 0.0:
        # zero step on a zero coordinate would never terminate
        steps = (steps[0], 0.0)
        tols = (tols[0], math.inf)
    res = pattern_search(objective, (tau0, omega0), steps, tols, max_iter=max_iter)
    report = None
    if physical and with_report:
        _, report = evaluate_gate(detunings, gamma, gate_pulse(res["x"], res["y"], shape),
                                  min_intervals=min_intervals)
    return OptimumResult(
        tau=res["x"], omega=res["y"], fidelity=res["value"], seed_fidelity=res["seed_value"],
        iterations=res["iterations"], evaluations=res["evaluations"],
        converged=res["converged"], steps=res["steps"], report=report,
    )


def _peak_position(row, k):
    # parabolic sub-cell position of a local maximum at index k
    if 0 < k < len(row) - 1:
        y0, y1, y2 = row[k - 1], row[k], row[k + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom < 0.0:
            return k + 0.5 * (y0 - y2) / denom
    return float(k)


def stripe_analysis(grid: SweepGrid, level=0.5, min_length=3):
    """Track high-fidelity ridges across tau rows and fit their slope dOmega/dtau.

    A ridge starts at every local maximum in the first row whose value lies
    above ``min + level * (max - min)`` of the grid, and continues to the
    nearest local maximum of each following row within half the typical
    spacing of maxima. Ridges spanning fewer than ``min_length`` rows are
    dropped.
    """
    F = grid.fidelity
    taus, omegas = grid.taus, grid.omegas
    if F.shape[0] < 2 or F.shape[1] < 3:
        return {"ridges": [], "n_ridges": 0, "n_negative": 0, "anti_correlated": False}
    thresh = F.min() + level * (F.max() - F.min())
    d_omega = omegas[1] - omegas[0]
    maxima = []
    for row in F:
        idx = [k for k in range(1, len(row) - 1) if row[k] > row[k - 1] and row[k] >= row[k + 1]]
        maxima.append(idx)
    spacings = [np.diff(m) for m in maxima if len(m) > 1]
    typical = float(np.median(np.concatenate(spacings))) if spacings else float(len(omegas))
    reach = max(1.0, 0.5 * typical)
    ridges = []
    for k0 in maxima[0]:
        if F[0, k0] < thresh:
            continue
        path = [(0, _peak_position(F[0], k0))]
        pos = path[0][1]
        for r in range(1, F.shape[0]):
            if not maxima[r]:
                break
            cand = min(maxima[r], key=lambda k: abs(k - pos))
            if abs(cand - pos) > reach:
                break
            pos = _peak_position(F[r], cand)
            path.append((r, pos))
        if len(path) < min_length:
            continue
        t = np.array([taus[r] for r, _ in path])
        o = np.array([omegas[0] + p * d_omega for _, p in path])
        slope = float(np.polyfit(t, o, 1)[0])
        ridges.append({
            "tau_ps": [float(v) for v in t],
            "omega_meV": [float(v) for v in o],
            "slope_meV_per_ps": slope,
            "mean_fidelity": float(np.mean([F[r, int(round(p))] for r, p in path])),
        })
    n_neg = sum(1 for r in ridges if r["slope_meV_per_ps"] < 0.0)
    tau_c = float(np.mean(taus))
    omega_c = float(np.mean(omegas))
    return {
        "ridges": ridges,
        "n_ridges": len(ridges),
        "n_negative": n_neg,
        "anti_correlated": bool(ridges) and n_neg == len(ridges),
        "median_slope_meV_per_ps": float(np.median([r["slope_meV_per_ps"] for r in ridges]))
        if ridges else None,
        # contours of Omega^2 tau = const
        "constant_area_slope_meV_per_ps": -omega_c / (2.0 * tau_c),
    }
