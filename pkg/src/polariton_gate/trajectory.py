"""Coherent-state trajectories of the driven, damped polariton mode.

For a fixed spin configuration the polariton obeys

    d alpha/dt = -(i delta / hbar) alpha - (gamma / 2 hbar) alpha - i Omega(t) / hbar

with ``alpha(t_start) = 0``. Two independent routes are provided: a classical
RK4 integration (:func:`solve_alpha_ode`) and composite Simpson quadrature of
the closed-form convolution integral (:func:`solve_alpha_quadrature`).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter

from .constants import HBAR
from .device import BASIS, SpinConfig
from .integrate import rk4_affine_propagator
from .pulse import Pulse, TimeGrid, check_covers_window, check_step_rule, make_grid

# above this many samples the O(n^2) direct quadrature is refused
DIRECT_QUADRATURE_LIMIT = 20001


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: TimeGrid
    alpha: np.ndarray
    delta: float
    gamma_energy: float
    spin: SpinConfig | None = None
    method: str = "ode"

    def times(self):
        return self.grid.times()


def _rate(delta, gamma):
    """Complex decay constant ``a`` with ``alpha' = a alpha + forcing``."""
    return -(1j * delta + 0.5 * gamma) / HBAR


def drive_samples(pulse: Pulse, grid: TimeGrid):
    """Envelope at the grid nodes and at the interval midpoints."""
    t = grid.times()
    return pulse(t), pulse(t[:-1] + 0.5 * grid.dt)


def _prepare(delta, gamma, pulse, grid, check):
    if grid is None:
        grid = make_grid(pulse, [delta], gamma)
    if check:
        check_covers_window(grid, pulse)
        check_step_rule(grid, [delta], gamma, pulse)
    return grid


def _one_pole_recurrence(decay, forcing):
    """``y[0] = forcing[0]``, ``y[k] = decay * y[k-1] + forcing[k]``."""
    return lfilter(np.array([1.0 + 0j]), np.array([1.0 + 0j, -decay]), forcing)


def solve_alpha_ode(delta, gamma_energy, pulse: Pulse, grid: TimeGrid | None = None,
                    spin=None, drive=None, check=True) -> Trajectory:
    """RK4 integration of the coherent amplitude on ``grid``.

    The envelope is sampled at the RK4 substep times ``t``, ``t + dt/2`` and
    ``t + dt``. Because the equation is affine, each step is the fixed linear
    map returned by :func:`rk4_affine_propagator`, and the whole march is
    evaluated as one first-order recurrence.
    """
    grid = _prepare(delta, gamma_energy, pulse, grid, check)
    omega, omega_mid = drive if drive is not None else drive_samples(pulse, grid)
    R, w0, wm, w1 = rk4_affine_propagator(_rate(delta, gamma_energy), grid.dt)
    # forcing g(t) = -i Omega(t) / hbar
    c = -1j / HBAR
    forcing = np.zeros(grid.n, dtype=complex)
    tail = forcing[1:]
    np.multiply(c * w0, omega[:-1], out=tail)
    tail += (c * wm) * omega_mid
    tail += (c * w1) * omega[1:]
    alpha = _one_pole_recurrence(R, forcing)
    return Trajectory(grid, alpha, float(delta), float(gamma_energy), spin, "ode")


def solve_alpha_quadrature(delta, gamma_energy, pulse: Pulse, grid: TimeGrid | None = None,
                           spin=None, drive=None, check=True, direct=False) -> Trajectory:
    """Composite Simpson evaluation of

        alpha(t) = -(i / hbar) int_{t0}^{t} Omega(s) exp[-(i delta + gamma/2)(t - s) / hbar] ds

    Each grid interval is one Simpson panel with its midpoint as the centre
    node, so every grid sample gets a value. The kernel factorises across
    panels, so the integral up to ``t_{k+1}`` is the integral up to ``t_k``
    propagated by ``exp(a dt)`` plus one new panel; this is exact in exact
    arithmetic. ``direct=True`` instead re-sums every panel for every output
    time (O(n^2), coarse grids only).
    """
    grid = _prepare(delta, gamma_energy, pulse, grid, check)
    omega, omega_mid = drive if drive is not None else drive_samples(pulse, grid)
    a = _rate(delta, gamma_energy)
    h = grid.dt
    c = -1j / HBAR
    if direct:
        alpha = _direct_simpson(a, h, c * omega, c * omega_mid)
    else:
        E = np.exp(a * h)
        E_half = np.exp(0.5 * a * h)
        panels = np.zeros(grid.n, dtype=complex)
        tail = panels[1:]
        np.multiply(c * h / 6.0 * E, omega[:-1], out=tail)
        tail += (c * h / 6.0 * 4.0 * E_half) * omega_mid
        tail += (c * h / 6.0) * omega[1:]
        alpha = _one_pole_recurrence(E, panels)
    return Trajectory(grid, alpha, float(delta), float(gamma_energy), spin, "quadrature")


def _direct_simpson(a, h, g, gm):
    n = g.shape[0]
    if n > DIRECT_QUADRATURE_LIMIT:
        raise ValueError(f"direct quadrature is O(n^2); refusing n = {n}")
    alpha = np.zeros(n, dtype=complex)
    for k in range(1, n):
        # lags t_k - t_m for panels m = 0..k-1
        lag = h * np.arange(k, 0, -1)
        panel = g[:k] * np.exp(a * lag) + 4.0 * gm[:k] * np.exp(a * (lag - 0.5 * h)) \
            + g[1:k + 1] * np.exp(a * (lag - h))
        alpha[k] = (h / 6.0) * np.sum(panel)
    return alpha


SOLVERS = {"ode": solve_alpha_ode, "quadrature": solve_alpha_quadrature}


def solve_spin_trajectories(detunings, gamma_energy, pulse: Pulse, grid: TimeGrid | None = None,
                            method="ode", check=True):
    """Trajectories for all four spin configurations.

    The solver runs once per distinct detuning; configurations with equal
    detunings (always ``UpDown``/``DownUp``) share the same sample array.
    """
    if grid is None:
        grid = make_grid(pulse, list(detunings.values()), gamma_energy)
    solver = SOLVERS[method]
    drive = drive_samples(pulse, grid)
    solved = {}
    out = {}
    for spin in BASIS:
        delta = float(detunings[spin])
        if delta not in solved:
            solved[delta] = solver(delta, gamma_energy, pulse, grid, spin=spin, drive=drive,
                                   check=check)
        out[spin] = replace(solved[delta], spin=spin)
    return out


def residual_amplitude(traj: Trajectory):
    """``(|alpha(t_end)|, |alpha(t_end)| / max_t |alpha(t)|)``."""
    mags = np.abs(traj.alpha)
    peak = float(mags.max())
    end = float(mags[-1])
    return end, (end / peak if peak > 0.0 else 0.0)
