"""Pairwise spin phases, the post-gate spin density matrix and CZ fidelity."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR
from .device import BASIS, SpinConfig
from .integrate import simpson
from .pulse import Pulse, require_same_grid
from .trajectory import Trajectory, residual_amplitude

UU, DD, UD, DU = BASIS

#: Target state after an ideal controlled-Z: 1/2 (|uu> - |dd> + |ud> + |du>).
TARGET_STATE = 0.5 * np.array([1.0, -1.0, 1.0, 1.0])

NOISE_RADIUS = 0.5

#: The six unordered configuration pairs in basis order.
PAIRS = tuple(itertools.combinations(BASIS, 2))


@dataclass(frozen=True)
class PhasePair:
    i: SpinConfig
    j: SpinConfig
    phi: complex

    @property
    def theta(self):
        return self.phi.real

    @property
    def big_gamma(self):
        return self.phi.imag

    def swapped(self):
        return PhasePair(self.j, self.i, complex(-self.phi.real, self.phi.imag))


def _check_pair(traj_i: Trajectory, traj_j: Trajectory):
    require_same_grid(traj_i.grid, traj_j.grid)
    if traj_i.gamma_energy != traj_j.gamma_energy:
        raise ValueError("trajectories were computed with different gamma")


def loop_phase(traj: Trajectory, pulse: Pulse):
    """Single-configuration phase ``-(1/hbar) int Omega Re(alpha) dt``."""
    omega = pulse(traj.times())
    return simpson(-omega * traj.alpha.real, traj.grid.dt) / HBAR


def phase_difference(traj_i: Trajectory, traj_j: Trajectory, pulse: Pulse, i=None, j=None,
                     omega=None):
    """Complex phase ``phi_ij`` accumulated between configurations i and j.

    Real part (``theta``) and imaginary part (``Gamma``) come from

        hbar phi = - int Omega Re a_i + int Omega Re a_j
                   - i gamma int a_i a_j* + i gamma/2 int |a_i|^2 + i gamma/2 int |a_j|^2

    The five terms are combined pointwise and integrated by one Simpson sum
    per part. The large, nearly equal terms cancel sample by sample, which
    keeps the rounding error of ``theta`` and ``Gamma`` far below the size
    of the individual integrals. ``omega`` may carry precomputed envelope
    samples on the grid.
    """
    _check_pair(traj_i, traj_j)
    if omega is None:
        omega = pulse(traj_i.times())
    phi = phase_from_samples(traj_i.alpha, traj_j.alpha, omega, traj_i.gamma_energy,
                             traj_i.grid.dt)
    return PhasePair(i if i is not None else traj_i.spin, j if j is not None else traj_j.spin, phi)


def phase_from_samples(alpha_i, alpha_j, omega, gamma, dt):
    """Pair phase from sampled amplitudes and envelope on a uniform grid."""
    xi, yi, xj, yj = alpha_i.real, alpha_i.imag, alpha_j.real, alpha_j.imag
    # a_i a_j* and |a|^2 from the same real products, so identical
    # trajectories cancel exactly
    cross_re = xi * xj + yi * yj
    cross_im = yi * xj - xi * yj
    real_part = omega * (xj - xi) + gamma * cross_im
    imag_part = -gamma * cross_re + 0.5 * gamma * ((xi * xi + yi * yi) + (xj * xj + yj * yj))
    return complex(simpson(real_part, dt), simpson(imag_part, dt)) / HBAR


def decoherence_exponent(traj_i: Trajectory, traj_j: Trajectory):
    """``(gamma / 2 hbar) int |a_i - a_j|^2 dt``; must equal ``Im phi_ij``."""
    _check_pair(traj_i, traj_j)
    diff = np.abs(traj_i.alpha - traj_j.alpha) ** 2
    return 0.5 * traj_i.gamma_energy * simpson(diff, traj_i.grid.dt) / HBAR


def all_phase_pairs(trajectories, pulse: Pulse):
    """Phase pairs for all six configuration pairs.

    Pairs whose trajectories share the same sample array are evaluated once;
    a configuration paired with its own sample array has ``phi = 0`` exactly.
    """
    omega = pulse(trajectories[BASIS[0]].times())
    cache = {}
    pairs = {}
    for i, j in PAIRS:
        ti, tj = trajectories[i], trajectories[j]
        key = (id(ti.alpha), id(tj.alpha))
        if key not in cache:
            if ti.alpha is tj.alpha:
                _check_pair(ti, tj)
                cache[key] = 0j
            else:
                cache[key] = phase_difference(ti, tj, pulse, omega=omega).phi
        pairs[(i, j)] = PhasePair(i, j, cache[key])
    return pairs


def lookup(pairs, i, j):
    """Phase pair (i, j) from a mapping holding either orientation."""
    if (i, j) in pairs:
        return pairs[(i, j)]
    if (j, i) in pairs:
        return pairs[(j, i)].swapped()
    raise KeyError(f"missing phase pair ({i.value}, {j.value})")


def density_matrix(pairs):
    """Spin density matrix after the gate from the uniform superposition.

    Entry ``(i, j)`` is ``exp(i theta_ij - Gamma_ij) / 4``; the lower triangle is
    the conjugate of the upper one.
    """
    rho = np.eye(4, dtype=complex) / 4.0
    for (a, i), (b, j) in itertools.combinations(enumerate(BASIS), 2):
        try:
            p = lookup(pairs, i, j)
        except KeyError as exc:
            raise ValueError(str(exc)) from None
        rho[a, b] = 0.25 * np.exp(1j * p.theta - p.big_gamma)
        rho[b, a] = np.conj(rho[a, b])
    return rho


def _coherence(p: PhasePair):
    return math.exp(-p.big_gamma) * math.cos(p.theta)


def fidelity(pairs):
    """Closed-form CZ fidelity.

    ``(3 - c(uu,dd) + 2 c(uu,ud) - 2 c(dd,ud)) / 8`` with
    ``c = exp(-Gamma) cos(theta)``. ``UpDown`` stands for both antiparallel
    configurations, which are degenerate.
    """
    c12 = _coherence(lookup(pairs, UU, DD))
    c13 = _coherence(lookup(pairs, UU, UD))
    c23 = _coherence(lookup(pairs, DD, UD))
    return (3.0 - c12 + 2.0 * c13 - 2.0 * c23) / 8.0


def fidelity_overlap(pairs):
    """``<psi_t| rho |psi_t>`` computed from the assembled density matrix."""
    rho = density_matrix(pairs)
    return float(np.real(TARGET_STATE @ rho @ TARGET_STATE))


def _odd_pi_distance(theta):
    # distance from theta to the nearest (2n+1) pi, in [0, pi]
    wrapped = math.remainder(theta - math.pi, 2.0 * math.pi)
    return abs(wrapped)


def gate_conditions(pairs):
    """Distances of ``theta(dd, ud)`` and ``theta(dd, uu)`` to odd multiples of pi."""
    return (
        _odd_pi_distance(lookup(pairs, DD, UD).theta),
        _odd_pi_distance(lookup(pairs, DD, UU).theta),
    )


@dataclass(frozen=True)
class LeakageMetrics:
    max_separation: float
    min_overlap: float
    t_at_max: float
    pair: tuple
    within_noise: bool


def leakage_metrics(trajectories):
    """Largest phase-space separation between distinct trajectories.

    A separation below ``2 * NOISE_RADIUS`` (the two vacuum noise circles
    overlap) is flagged as within noise.
    """
    items = list(trajectories.items()) if isinstance(trajectories, dict) else [
        (t.spin, t) for t in trajectories]
    distinct = []
    seen = set()
    for spin, traj in items:
        if id(traj.alpha) not in seen:
            seen.add(id(traj.alpha))
            distinct.append((spin, traj))
    best = (0.0, 0, None)
    times = distinct[0][1].times()
    for (si, ti), (sj, tj) in itertools.combinations(distinct, 2):
        require_same_grid(ti.grid, tj.grid)
        sep = np.abs(ti.alpha - tj.alpha)
        k = int(np.argmax(sep))
        if sep[k] > best[0]:
            best = (float(sep[k]), k, (si, sj))
    sep, k, pair = best
    return LeakageMetrics(
        max_separation=sep,
        min_overlap=math.exp(-0.5 * sep * sep),
        t_at_max=float(times[k]),
        pair=tuple(s.value for s in pair) if pair else (),
        within_noise=sep < 2.0 * NOISE_RADIUS,
    )


@dataclass
class GateReport:
    fidelity: float
    fidelity_overlap: float
    pairs: dict
    odd_pi_residuals: tuple
    leakage: LeakageMetrics
    residual_amplitudes: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "fidelity": self.fidelity,
            "fidelity_overlap": self.fidelity_overlap,
            "pairs": [
                {"i": i.value, "j": j.value, "theta": p.theta, "gamma": p.big_gamma}
                for (i, j), p in self.pairs.items()
            ],
            "odd_pi_residuals": {
                "theta_dd_ud": self.odd_pi_residuals[0],
                "theta_dd_uu": self.odd_pi_residuals[1],
            },
            "max_separation": self.leakage.max_separation,
            "min_overlap": self.leakage.min_overlap,
            "t_at_max_ps": self.leakage.t_at_max,
            "separation_pair": list(self.leakage.pair),
            "within_noise": self.leakage.within_noise,
            "noise_radius": NOISE_RADIUS,
            "residual_amplitudes": {
                s.value: {"abs_end": v[0], "ratio_to_max": v[1]}
                for s, v in self.residual_amplitudes.items()
            },
        }


def gate_report(trajectories, pulse: Pulse) -> GateReport:
    pairs = all_phase_pairs(trajectories, pulse)
    return GateReport(
        fidelity=fidelity(pairs),
        fidelity_overlap=fidelity_overlap(pairs),
        pairs=pairs,
        odd_pi_residuals=gate_conditions(pairs),
        leakage=leakage_metrics(trajectories),
        residual_amplitudes={s: residual_amplitude(t) for s, t in trajectories.items()},
    )
