"""Truncated-Fock master-equation cross-check of the coherent-state phases.

The spin operators commute with the reduced Hamiltonian, so the joint
spin-polariton density matrix splits into polariton blocks
``C_ij = <i| rho |j>``, each obeying

    dC/dt = -(i/hbar) (H_i C - C H_j) + (gamma/hbar) (p C p+ - {p+ p, C}/2)

with ``H_s = delta_s p+ p + Omega(t) (p + p+)``. Diagonal blocks are ordinary
Lindblad evolutions; off-diagonal blocks carry the spin coherences, and
``Tr C_ij`` at the end of the gate gives ``exp(i theta_ij - Gamma_ij)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR
from .device import BASIS
from .exceptions import ConfigError, TruncationError
from .integrate import rk4_step
from .phases import PAIRS, all_phase_pairs, lookup
from .pulse import (DEFAULT_INTERVALS, Pulse, TimeGrid, check_covers_window, check_step_rule,
                    make_grid)
from .trajectory import solve_spin_trajectories

TOP_LEVEL_TOL = 1e-10

# the RK4 stability region contains the left half-disk of radius ~2.6
RK4_STABILITY = 2.5


@dataclass
class FockOperatorBlock:
    n_max: int
    matrix: np.ndarray
    label: tuple = ()
    trace_history: np.ndarray | None = None
    snapshots: dict = field(default_factory=dict)
    max_top_population: float = 0.0


def required_n_max(alpha_max):
    """Truncation needed for a coherent amplitude of modulus ``alpha_max``."""
    m = alpha_max**2
    return int(math.ceil(m + 6.0 * math.sqrt(m) + 10.0))


def generator_scale(deltas, gamma, omega_peak, n_max):
    """Upper bound (meV) on the spectral radius of the block generator times hbar.

    Dissipator eigenvalues reach ``gamma * n_max``, the detuning commutator
    ``max|delta| * n_max`` and the drive commutator at most
    ``4 Omega sqrt(n_max)``.
    """
    dmax = max(abs(float(d)) for d in deltas)
    return gamma * n_max + dmax * n_max + 4.0 * omega_peak * math.sqrt(n_max)


def oracle_grid(pulse: Pulse, deltas, gamma, n_max, min_intervals=DEFAULT_INTERVALS):
    """Step-rule grid, additionally tightened for RK4 stability at ``n_max``."""
    # dt * generator_scale / hbar <= RK4_STABILITY, expressed in the step-rule form
    extra = generator_scale(deltas, gamma, pulse.omega_peak, n_max) / (20.0 * RK4_STABILITY)
    return make_grid(pulse, deltas, gamma, min_intervals=min_intervals, extra_scale=extra)


class _BlockGenerator:
    """Right-hand side for a stack of blocks ``C[b]`` of shape (B, d, d).

    The number-diagonal parts (detuning commutator and the anticommutator of
    the dissipator) act elementwise and are folded into one factor ``K``;
    the drive and jump terms are index shifts.
    """

    def __init__(self, deltas_i, deltas_j, gamma, pulse, n_max):
        d = n_max + 1
        n = np.arange(d, dtype=float)
        self.sq = np.sqrt(np.arange(1, d, dtype=float))  # sqrt(1..n_max)
        di = np.asarray(deltas_i, dtype=float)[:, None, None]
        dj = np.asarray(deltas_j, dtype=float)[:, None, None]
        rows, cols = n[None, :, None], n[None, None, :]
        self.K = (-1j / HBAR) * (di * rows - dj * cols) - (0.5 * gamma / HBAR) * (rows + cols)
        self.jump = (gamma / HBAR) * np.outer(self.sq, self.sq)
        self.sq_rows = self.sq[None, :, None]
        self.sq_cols = self.sq[None, None, :]
        self.pulse = pulse

    def __call__(self, t, C):
        out = self.K * C
        out[:, :-1, :-1] += self.jump * C[:, 1:, 1:]
        omega = float(self.pulse(t))
        if omega != 0.0:
            # -(i Omega / hbar) (X C - C X) with X = p + p+
            D = (-1j * omega / HBAR) * C
            sr, sc = self.sq_rows, self.sq_cols
            out[:, :-1, :] += sr * D[:, 1:, :]
            out[:, 1:, :] += sr * D[:, :-1, :]
            out[:, :, 1:] -= D[:, :, :-1] * sc
            out[:, :, :-1] -= D[:, :, 1:] * sc
        return out


def evolve_blocks(pairs_of_deltas, gamma, pulse: Pulse, n_max, grid: TimeGrid | None = None,
                  snapshot_stride=None, labels=None, check=True):
    """Evolve several blocks together from ``C(0) = |0><0|``.

    ``pairs_of_deltas`` is a sequence of ``(delta_i, delta_j)``. Returns one
    :class:`FockOperatorBlock` per pair.
    """
    if n_max < 1:
        raise ConfigError("n_max must be at least 1", field="n_max")
    deltas_i = [p[0] for p in pairs_of_deltas]
    deltas_j = [p[1] for p in pairs_of_deltas]
    all_deltas = deltas_i + deltas_j
    if grid is None:
        grid = oracle_grid(pulse, all_deltas, gamma, n_max)
    if check:
        check_covers_window(grid, pulse)
        check_step_rule(grid, all_deltas, gamma, pulse)
        scale = generator_scale(all_deltas, gamma, pulse.omega_peak, n_max)
        if grid.dt * scale / HBAR > RK4_STABILITY:
            raise ConfigError(
                f"dt = {grid.dt:.6g} ps is outside the RK4 stability bound for n_max = {n_max}",
                field="dt_ps",
            )
    B = len(pairs_of_deltas)
    d = n_max + 1
    C = np.zeros((B, d, d), dtype=complex)
    C[:, 0, 0] = 1.0
    rhs = _BlockGenerator(deltas_i, deltas_j, gamma, pulse, n_max)
    traces = np.empty((B, grid.n), dtype=complex)
    traces[:, 0] = 1.0
    top = np.zeros(B)
    snaps = [dict() for _ in range(B)]
    if snapshot_stride:
        for b in range(B):
            snaps[b][0] = C[b].copy()
    t0, h = grid.t0, grid.dt
    for k in range(1, grid.n):
        C = rk4_step(rhs, t0 + (k - 1) * h, C, h)
        traces[:, k] = np.trace(C, axis1=1, axis2=2)
        top = np.maximum(top, np.abs(C[:, n_max, n_max]))
        if snapshot_stride and k % snapshot_stride == 0:
            for b in range(B):
                snaps[b][k] = C[b].copy()
    if check and np.any(top > TOP_LEVEL_TOL):
        worst = float(top.max())
        raise TruncationError(
            f"population {worst:.3g} at the truncation level n_max = {n_max} exceeds "
            f"{TOP_LEVEL_TOL:g}; increase n_max (try {2 * n_max})",
            required_n_max=2 * n_max,
        )
    labels = labels or [()] * B
    return [
        FockOperatorBlock(n_max, C[b], labels[b], traces[b], snaps[b], float(top[b]))
        for b in range(B)
    ]


def evolve_block(delta_i, delta_j, gamma, pulse: Pulse, n_max, grid: TimeGrid | None = None,
                 snapshot_stride=None, label=()):
    return evolve_blocks([(delta_i, delta_j)], gamma, pulse, n_max, grid,
                         snapshot_stride=snapshot_stride, labels=[label])[0]


def mean_field(block):
    """``<p> = Tr(C p)`` of a block."""
    matrix = block.matrix if isinstance(block, FockOperatorBlock) else np.asarray(block)
    sq = np.sqrt(np.arange(1, matrix.shape[0], dtype=float))
    return complex(np.sum(sq * np.diagonal(matrix, offset=-1)))


def coherent_overlap(alpha_i, alpha_j):
    """``<alpha_j | alpha_i>`` for coherent states."""
    return np.exp(-0.5 * abs(alpha_i) ** 2 - 0.5 * abs(alpha_j) ** 2
                  + np.conj(alpha_j) * alpha_i)


def extract_phase(block, overlap=1.0):
    """``(theta, Gamma)`` from ``Tr C = exp(i theta - Gamma) * overlap``.

    A block that stays of the form ``c |alpha_i><alpha_j|`` has trace
    ``c <alpha_j|alpha_i>``; passing that end-of-gate overlap removes the
    contribution of a field that has not fully returned to vacuum.
    """
    matrix = block.matrix if isinstance(block, FockOperatorBlock) else np.asarray(block)
    tr = complex(np.trace(matrix)) / complex(overlap)
    if abs(tr) <= 1e-12:
        raise ValueError("trace vanished: block fully dephased, phase undefined")
    return math.atan2(tr.imag, tr.real), -math.log(abs(tr))


def _wrap(x):
    return math.remainder(x, 2.0 * math.pi)


@dataclass
class OracleComparison:
    amplitude_scale: float
    alpha_max: float
    n_max: int
    grid: TimeGrid
    rows: list
    n_max_shift: float
    diagonal: dict

    @property
    def max_theta_error(self):
        return max(r["abs_dtheta"] for r in self.rows)

    @property
    def max_gamma_error(self):
        return max(r["abs_dgamma"] for r in self.rows)

    def to_dict(self):
        return {
            "amplitude_scale": self.amplitude_scale,
            "alpha_max": self.alpha_max,
            "n_max": self.n_max,
            "dt_ps": self.grid.dt,
            "n_samples": self.grid.n,
            "pairs": self.rows,
            "max_abs_dtheta": self.max_theta_error,
            "max_abs_dgamma": self.max_gamma_error,
            "n_max_plus_10_shift": self.n_max_shift,
            "diagonal": self.diagonal,
        }


def compare_with_analytic(detunings, gamma, pulse: Pulse, n_max=40, alpha_max=2.0,
                          amplitude_scale=None, stability_offset=10,
                          min_intervals=DEFAULT_INTERVALS):
    """Run the Fock oracle against the coherent-state phases at reduced drive.

    The drive is scaled (the model is linear in ``Omega``) so that the
    analytic ``max |alpha|`` equals ``alpha_max`` unless ``amplitude_scale`` is
    given. Blocks are evolved at ``n_max`` and ``n_max + stability_offset`` on
    a common grid of at least ``min_intervals`` intervals.
    """
    unique = []
    for s in BASIS:
        if detunings[s] not in [detunings[u] for u in unique]:
            unique.append(s)
    deltas = [detunings[s] for s in BASIS]
    n_hi = n_max + stability_offset
    if amplitude_scale is None:
        probe = solve_spin_trajectories(detunings, gamma, pulse)
        peak = max(float(np.max(np.abs(t.alpha))) for t in probe.values())
        amplitude_scale = alpha_max / peak if peak > 0 else 1.0
    scaled = pulse.scaled(amplitude_scale)
    grid = oracle_grid(scaled, deltas, gamma, n_hi, min_intervals)
    trajs = solve_spin_trajectories(detunings, gamma, scaled, grid)
    analytic = all_phase_pairs(trajs, scaled)
    reached = max(float(np.max(np.abs(t.alpha))) for t in trajs.values())
    if n_max < required_n_max(reached):
        raise TruncationError(
            f"n_max = {n_max} too small for |alpha|max = {reached:.3g}; "
            f"need n_max >= {required_n_max(reached)}",
            required_n_max=required_n_max(reached),
        )

    block_labels = [(s, s) for s in unique] + [
        (i, j) for i, j in PAIRS if i in unique and j in unique]
    delta_pairs = [(detunings[i], detunings[j]) for i, j in block_labels]
    results = {}
    for nm in (n_max, n_hi):
        blocks = evolve_blocks(delta_pairs, gamma, scaled, nm, grid, labels=block_labels)
        results[nm] = {lab: blk for lab, blk in zip(block_labels, blocks)}

    # final coherent amplitudes, read off the oracle's own diagonal blocks
    field_end = {nm: {s: mean_field(results[nm][(s, s)]) for s in unique} for nm in results}

    def rep(s):
        # map degenerate configurations onto the representative that was evolved
        return next(u for u in unique if detunings[u] == detunings[s])

    def oracle_phase(nm, i, j):
        ri, rj = rep(i), rep(j)
        if ri == rj:
            return 0.0, 0.0
        if (ri, rj) not in results[nm]:
            theta, g = oracle_phase(nm, j, i)
            return -theta, g
        ov = coherent_overlap(field_end[nm][ri], field_end[nm][rj])
        return extract_phase(results[nm][(ri, rj)], ov)

    rows = []
    shift = 0.0
    for i, j in PAIRS:
        a = lookup(analytic, i, j)
        th_o, g_o = oracle_phase(n_max, i, j)
        th_hi, g_hi = oracle_phase(n_hi, i, j)
        shift = max(shift, abs(_wrap(th_hi - th_o)), abs(g_hi - g_o))
        rows.append({
            "i": i.value,
            "j": j.value,
            "theta_analytic": a.theta,
            "theta_oracle": th_o,
            "gamma_analytic": a.big_gamma,
            "gamma_oracle": g_o,
            "abs_dtheta": abs(_wrap(th_o - a.theta)),
            "abs_dgamma": abs(g_o - a.big_gamma),
            "end_overlap_modulus": float(abs(coherent_overlap(field_end[n_max][rep(i)],
                                                              field_end[n_max][rep(j)]))),
        })

    diagonal = {}
    for s in unique:
        blk = results[n_max][(s, s)]
        tr = blk.trace_history
        rho = blk.matrix
        diagonal[s.value] = {
            "max_trace_deviation": float(np.max(np.abs(tr - 1.0))),
            "final_purity": float(np.real(np.trace(rho @ rho))),
            "max_top_population": blk.max_top_population,
            "final_mean_field": [field_end[n_max][s].real, field_end[n_max][s].imag],
            "analytic_final_field": [trajs[s].alpha[-1].real, trajs[s].alpha[-1].imag],
        }
    return OracleComparison(amplitude_scale, reached, n_max, grid, rows, shift, diagonal)
