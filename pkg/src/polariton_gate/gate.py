"""End-to-end evaluation: pulse -> trajectories -> phases -> fidelity."""
from __future__ import annotations

from .phases import all_phase_pairs, fidelity, gate_report
from .pulse import DEFAULT_INTERVALS, Pulse, make_grid
from .trajectory import solve_spin_trajectories


def gate_pulse(tau, omega, shape="gaussian"):
    """Pulse with the default gate window ``[0, 4 tau]`` centred at ``2 tau``."""
    return Pulse(shape=shape, omega_peak=float(omega), tau=float(tau))


def simulate(detunings, gamma, pulse: Pulse, grid=None, method="ode",
             min_intervals=DEFAULT_INTERVALS):
    if grid is None:
        grid = make_grid(pulse, list(detunings.values()), gamma, min_intervals=min_intervals)
    return solve_spin_trajectories(detunings, gamma, pulse, grid, method=method)


def gate_fidelity(detunings, gamma, tau, omega, shape="gaussian",
                  min_intervals=DEFAULT_INTERVALS):
    pulse = gate_pulse(tau, omega, shape)
    trajectories = simulate(detunings, gamma, pulse, min_intervals=min_intervals)
    return fidelity(all_phase_pairs(trajectories, pulse))


def evaluate_gate(detunings, gamma, pulse: Pulse, grid=None, method="ode",
                  min_intervals=DEFAULT_INTERVALS):
    """Trajectories and the full :class:`~polariton_gate.phases.GateReport`."""
    trajectories = simulate(detunings, gamma, pulse, grid, method, min_intervals)
    return trajectories, gate_report(trajectories, pulse)
