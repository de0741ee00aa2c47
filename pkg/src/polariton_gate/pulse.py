"""Drive envelopes and the uniform time grids the solvers run on."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import HBAR
from .exceptions import ConfigError, GridMismatchError, StepSizeError

SHAPES = ("gaussian", "square")

#: Default number of grid intervals before the step rule raises it.
DEFAULT_INTERVALS = 4096


@dataclass(frozen=True)
class Pulse:
    """Drive envelope ``Omega(t)``.

    ``gaussian`` is ``omega_peak * exp(-(t - t_center)^2 / tau^2)``; ``square``
    is ``omega_peak`` on ``[t_center - tau/2, t_center + tau/2]`` and zero
    elsewhere (closed interval). Without explicit values the pulse is centred
    at ``2 tau`` inside the gate window ``[0, 4 tau]``.
    """

    shape: str = "gaussian"
    omega_peak: float = 0.0
    tau: float = 1.0
    t_center: float | None = None
    window: tuple[float, float] | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigError(f"expected one of {SHAPES}, got {self.shape!r}", field="shape")
        if not self.tau > 0.0:
            raise ConfigError(f"must be positive, got {self.tau}", field="tau_ps")
        if not self.omega_peak >= 0.0:
            raise ConfigError(f"must be nonnegative, got {self.omega_peak}", field="omega_peak_meV")
        if self.t_center is None:
            object.__setattr__(self, "t_center", 2.0 * self.tau)
        if self.window is None:
            object.__setattr__(self, "window", (0.0, 4.0 * self.tau))
        t_start, t_end = (float(v) for v in self.window)
        if not t_end > t_start:
            raise ConfigError(f"window must be increasing, got {self.window}", field="window_ps")
        object.__setattr__(self, "window", (t_start, t_end))

    def __call__(self, t):
        return envelope(self, t)

    def scaled(self, factor):
        return replace(self, omega_peak=self.omega_peak * factor)

    @property
    def duration(self):
        return self.window[1] - self.window[0]


def envelope(pulse: Pulse, t):
    """Drive amplitude in meV at time(s) ``t`` (ps)."""
    t = np.asarray(t, dtype=float)
    if pulse.shape == "gaussian":
        x = (t - pulse.t_center) / pulse.tau
        return pulse.omega_peak * np.exp(-x * x)
    half = 0.5 * pulse.tau
    on = (t >= pulse.t_center - half) & (t <= pulse.t_center + half)
    return np.where(on, pulse.omega_peak, 0.0)


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    dt: float
    n: int

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ConfigError(f"time step must be positive, got {self.dt}", field="dt_ps")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"need at least 2 samples, got {self.n}", field="n_samples")

    @classmethod
    def spanning(cls, t_start, t_end, intervals):
        return cls(t0=float(t_start), dt=(t_end - t_start) / intervals, n=int(intervals) + 1)

    @property
    def t_end(self):
        return self.t0 + self.dt * (self.n - 1)

    def times(self):
        return self.t0 + self.dt * np.arange(self.n)

    def same_as(self, other):
        return self.t0 == other.t0 and self.dt == other.dt and self.n == other.n


def max_step(deltas, gamma, pulse: Pulse, extra_scale=0.0):
    """Largest admissible step: ``min(hbar / (20 E_max), tau / 200)``.

    ``E_max`` is the largest of ``|delta|``, ``gamma``, the peak drive and
    ``extra_scale`` (all in meV).
    """
    e_max = max([abs(d) for d in np.atleast_1d(deltas)] + [gamma, pulse.omega_peak, extra_scale])
    bound = pulse.tau / 200.0
    if e_max > 0.0:
        bound = min(bound, HBAR / (20.0 * e_max))
    return bound


def check_step_rule(grid: TimeGrid, deltas, gamma, pulse: Pulse, extra_scale=0.0):
    bound = max_step(deltas, gamma, pulse, extra_scale)
    # relative slack for grids built by division of the window
    if grid.dt > bound * (1.0 + 1e-12):
        raise StepSizeError(
            f"dt = {grid.dt:.6g} ps violates the step rule dt <= min(hbar/(20*max(|delta|, gamma, "
            f"Omega_peak)), tau/200) = {bound:.6g} ps",
            field="dt_ps",
        )


def check_covers_window(grid: TimeGrid, pulse: Pulse):
    t_start, t_end = pulse.window
    tol = 1e-9 * max(1.0, abs(t_end))
    if abs(grid.t0 - t_start) > tol or grid.t_end < t_end - tol:
        raise ConfigError(
            f"grid [{grid.t0}, {grid.t_end}] does not cover the pulse window {pulse.window}",
            field="window_ps",
        )


def make_grid(pulse: Pulse, deltas, gamma, min_intervals=DEFAULT_INTERVALS, extra_scale=0.0):
    """Uniform grid over the pulse window satisfying the step rule.

    The interval count starts at ``min_intervals`` and is raised to the
    smallest even count whose step obeys :func:`max_step`.
    """
    bound = max_step(deltas, gamma, pulse, extra_scale)
    intervals = max(int(min_intervals), math.ceil(pulse.duration / bound))
    intervals += intervals % 2
    grid = TimeGrid.spanning(*pulse.window, intervals)
    # guard against the division rounding just past the bound
    while grid.dt > bound:
        intervals += 2
        grid = TimeGrid.spanning(*pulse.window, intervals)
    return grid


def grid_with_step(pulse: Pulse, dt):
    """Grid over the pulse window with a requested step (rounded down to fit)."""
    if not dt > 0.0:
        raise ConfigError(f"must be positive, got {dt}", field="dt_ps")
    intervals = math.ceil(pulse.duration / dt - 1e-9)
    intervals += intervals % 2
    return TimeGrid.spanning(*pulse.window, intervals)


def require_same_grid(a: TimeGrid, b: TimeGrid):
    if not a.same_as(b):
        raise GridMismatchError(f"time grids differ: {a} vs {b}")
