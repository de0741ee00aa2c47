"""Physical constants in the package unit system.

Energy is in meV, time in ps, length in nm. Every dynamical phase is
``(energy / HBAR) * time``.
"""
import math

HBAR = 0.6582120  # meV ps
H_PLANCK = 2.0 * math.pi * HBAR  # meV ps
C_LIGHT = 299792.458  # nm / ps
COULOMB_K = 1439.96  # e^2 / (4 pi eps0), meV nm
EV_TO_J = 1.602177e-19

# 1 meV/ps expressed in W
MEV_PER_PS_TO_W = 1e-3 * EV_TO_J / 1e-12
