"""Exciton-polariton mediated controlled-Z gate between two electron spins."""

from .device import (BASIS, DeviceDerived, DeviceParams, SpinConfig, derive_cavity, detunings,
                     exchange_coupling, photon_lifetime, pump_power, spot_radius)
from .estimator import PhaseGateOptimizer
from .exceptions import (ConfigError, GridMismatchError, StepSizeError, SweepPointError,
                         TruncationError)
from .fock import compare_with_analytic, evolve_block, evolve_blocks, extract_phase
from .gate import evaluate_gate, gate_fidelity, gate_pulse, simulate
from .optimize import SweepGrid, SweepSpec, argmax, pattern_search, refine, stripe_analysis, sweep
from .phases import (GateReport, PhasePair, all_phase_pairs, decoherence_exponent, density_matrix,
                     fidelity, fidelity_overlap, gate_conditions, gate_report, leakage_metrics,
                     loop_phase, phase_difference)
from .pulse import Pulse, TimeGrid, make_grid
from .trajectory import (Trajectory, residual_amplitude, solve_alpha_ode, solve_alpha_quadrature,
                         solve_spin_trajectories)

__version__ = "0.1.0"

__all__ = [
    "BASIS", "ConfigError", "DeviceDerived", "DeviceParams", "GateReport", "GridMismatchError",
    "PhaseGateOptimizer", "PhasePair", "Pulse", "SpinConfig", "StepSizeError", "SweepGrid",
    "SweepPointError", "SweepSpec", "TimeGrid", "Trajectory", "TruncationError",
    "all_phase_pairs", "argmax", "compare_with_analytic", "decoherence_exponent",
    "density_matrix", "derive_cavity", "detunings", "evaluate_gate", "evolve_block",
    "evolve_blocks", "exchange_coupling", "extract_phase", "fidelity", "fidelity_overlap",
    "gate_conditions", "gate_fidelity", "gate_pulse", "gate_report", "leakage_metrics",
    "loop_phase", "make_grid", "pattern_search", "phase_difference", "photon_lifetime",
    "pump_power", "refine", "residual_amplitude", "simulate", "solve_alpha_ode",
    "solve_alpha_quadrature", "solve_spin_trajectories", "spot_radius", "stripe_analysis",
    "sweep",
]
