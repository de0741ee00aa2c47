"""scikit-learn style wrapper around the sweep-and-refine optimiser."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .device import SpinConfig
from .gate import evaluate_gate, gate_fidelity, gate_pulse, simulate
from .optimize import SweepSpec, argmax, refine, sweep
from .phases import DD, UD, UU, all_phase_pairs, lookup
from .pulse import DEFAULT_INTERVALS


class PhaseGateOptimizer(BaseEstimator):
    """Find the pulse (tau, Omega) that maximises the controlled-Z fidelity.

    ``fit`` sweeps the rectangular grid given by ``tau_range``/``omega_range``
    and ``n_tau``/``n_omega`` and, with ``refine=True``, polishes the best cell
    by pattern search. ``predict`` maps rows ``[tau_ps, omega_meV]`` to gate
    fidelities; ``transform`` maps them to ``(theta, Gamma)`` of the pairs
    uu-dd, uu-ud and dd-ud.

    ``X`` passed to ``fit`` is ignored; the physics lives in the parameters.
    """

    def __init__(self, delta_uu=1.0, delta_ud=1.001, delta_dd=1.002, gamma=3.0,
                 tau_range=(150.0, 250.0), omega_range=(100.0, 220.0), n_tau=11, n_omega=11,
                 refine=True, shape="gaussian", min_intervals=DEFAULT_INTERVALS, n_jobs=1):
        self.delta_uu = delta_uu
        self.delta_ud = delta_ud
        self.delta_dd = delta_dd
        self.gamma = gamma
        self.tau_range = tau_range
        self.omega_range = omega_range
        self.n_tau = n_tau
        self.n_omega = n_omega
        self.refine = refine
        self.shape = shape
        self.min_intervals = min_intervals
        self.n_jobs = n_jobs

    def _detunings(self):
        return {
            SpinConfig.UP_UP: float(self.delta_uu),
            SpinConfig.DOWN_DOWN: float(self.delta_dd),
            SpinConfig.UP_DOWN: float(self.delta_ud),
            SpinConfig.DOWN_UP: float(self.delta_ud),
        }

    def _rows(self, X):
        X = check_array(X, dtype=np.float64, ensure_min_features=2)
        if X.shape[1] != 2:
            raise ValueError(f"X must have two columns [tau_ps, omega_meV], got {X.shape[1]}")
        if np.any(X[:, 0] <= 0.0) or np.any(X[:, 1] < 0.0):
            raise ValueError("X needs tau > 0 and omega >= 0 in every row")
        return X

    def fit(self, X=None, y=None):
        spec = SweepSpec(
            (self.tau_range[0], self.tau_range[1], int(self.n_tau)),
            (self.omega_range[0], self.omega_range[1], int(self.n_omega)),
            self._detunings(), float(self.gamma), self.shape, int(self.min_intervals),
        )
        self.grid_ = sweep(spec, n_jobs=self.n_jobs)
        tau, omega, F = argmax(self.grid_)
        self.n_iter_ = 0
        if self.refine:
            self.optimum_ = refine((tau, omega), spec.detunings, spec.gamma, shape=self.shape,
                                   min_intervals=self.min_intervals)
            tau, omega, F = self.optimum_.tau, self.optimum_.omega, self.optimum_.fidelity
            self.n_iter_ = self.optimum_.iterations
            self.report_ = self.optimum_.report
        else:
            self.optimum_ = None
            _, self.report_ = evaluate_gate(spec.detunings, spec.gamma,
                                            gate_pulse(tau, omega, self.shape),
                                            min_intervals=self.min_intervals)
        self.tau_, self.omega_, self.fidelity_ = tau, omega, F
        return self

    def predict(self, X):
        check_is_fitted(self, "grid_")
        X = self._rows(X)
        dets = self._detunings()
        return np.array([gate_fidelity(dets, float(self.gamma), t, o, self.shape,
                                       self.min_intervals) for t, o in X])

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = self._rows(X)
        dets = self._detunings()
        out = np.empty((X.shape[0], 6))
        for k, (t, o) in enumerate(X):
            pulse = gate_pulse(t, o, self.shape)
            pairs = all_phase_pairs(simulate(dets, float(self.gamma), pulse,
                                             min_intervals=self.min_intervals), pulse)
            row = []
            for i, j in ((UU, DD), (UU, UD), (DD, UD)):
                p = lookup(pairs, i, j)
                row += [p.theta, p.big_gamma]
            out[k] = row
        return out

    def score(self, X, y=None):
        """Mean predicted fidelity over the rows of ``X``."""
        return float(np.mean(self.predict(X)))


TRANSFORM_COLUMNS = ("theta_uu_dd", "gamma_uu_dd", "theta_uu_ud", "gamma_uu_ud",
                     "theta_dd_ud", "gamma_dd_ud")
