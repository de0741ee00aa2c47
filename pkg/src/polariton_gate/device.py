"""Device geometry to dynamical parameters.

Everything here is a closed-form evaluation: cavity photon lifetime, polariton
lifetime and spot size from the DBR cavity, the spin-polariton exchange
coupling, the four spin-conditioned detunings and the optical pump power.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Union

from .constants import C_LIGHT, COULOMB_K, H_PLANCK, HBAR, MEV_PER_PS_TO_W
from .exceptions import ConfigError


class SpinConfig(str, enum.Enum):
    """Two-electron spin configuration ``s = s1z s2z``."""

    UP_UP = "UpUp"
    DOWN_DOWN = "DownDown"
    UP_DOWN = "UpDown"
    DOWN_UP = "DownUp"

    @property
    def symbol(self):
        return _SYMBOLS[self]

    @property
    def total_sz(self):
        """Sum of the two z projections in units of hbar."""
        return {"UpUp": 1.0, "DownDown": -1.0}.get(self.value, 0.0)


_SYMBOLS = {
    SpinConfig.UP_UP: "↑↑",
    SpinConfig.DOWN_DOWN: "↓↓",
    SpinConfig.UP_DOWN: "↑↓",
    SpinConfig.DOWN_UP: "↓↑",
}

#: Density-matrix basis order used throughout the package.
BASIS = (SpinConfig.UP_UP, SpinConfig.DOWN_DOWN, SpinConfig.UP_DOWN, SpinConfig.DOWN_UP)

LC_CONVENTIONS = ("half-wave", "five-half-wave")

LcConvention = Union[str, float]


@dataclass(frozen=True)
class DeviceParams:
    """Raw cavity, dot and exciton parameters.

    Parameters
    ----------
    wavelength_nm : float
        Vacuum wavelength of the cavity mode.
    n_c : float
        Cavity refractive index.
    reflectivity : float
        DBR mirror reflectivity, strictly between 0 and 1.
    lc_convention : {"half-wave", "five-half-wave"} or float
        Effective cavity length rule. A number is an explicit length in nm.
    trap_radius_nm : float
        Radius ``a`` of the parabolic electron trap.
    bohr_radius_nm : float
        Exciton Bohr radius. Informational; the closed-form coupling does not
        depend on it.
    eps_r : float
        Relative dielectric constant.
    r0_sq, t0_sq : float
        Excitonic and photonic Hopfield fractions, summing to one.
    delta_p_meV : float
        Bare polariton detuning from the laser.
    spot_radius_um : float, optional
        Pins the spot radius used for the exchange coupling. When omitted the
        cavity spot-size formula is used.
    """

    wavelength_nm: float = 786.0
    n_c: float = 3.5
    reflectivity: float = 0.992
    lc_convention: LcConvention = "half-wave"
    trap_radius_nm: float = 50.0
    bohr_radius_nm: float = 12.0
    eps_r: float = 12.9
    r0_sq: float = 0.5
    t0_sq: float = 0.5
    delta_p_meV: float = 1.001
    spot_radius_um: float | None = None

    def __post_init__(self):
        if not 0.0 < self.reflectivity < 1.0:
            raise ConfigError(
                f"reflectivity must satisfy 0 < r < 1 (unphysical mirror), got {self.reflectivity}",
                field="reflectivity",
            )
        for name in ("wavelength_nm", "n_c", "trap_radius_nm", "bohr_radius_nm"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"must be positive, got {getattr(self, name)}", field=name)
        if not self.eps_r > 1.0:
            raise ConfigError(f"must exceed 1, got {self.eps_r}", field="eps_r")
        if self.r0_sq < 0.0 or self.t0_sq <= 0.0 or abs(self.r0_sq + self.t0_sq - 1.0) > 1e-12:
            raise ConfigError(
                f"Hopfield fractions must be nonnegative and sum to 1, got r0_sq={self.r0_sq}, "
                f"t0_sq={self.t0_sq}",
                field="r0_sq",
            )
        if isinstance(self.lc_convention, str):
            if self.lc_convention not in LC_CONVENTIONS:
                raise ConfigError(
                    f"expected one of {LC_CONVENTIONS} or a length in nm, got {self.lc_convention!r}",
                    field="lc_convention",
                )
        elif not float(self.lc_convention) > 0.0:
            raise ConfigError("explicit cavity length must be positive", field="lc_convention")
        if self.spot_radius_um is not None and not self.spot_radius_um > 0.0:
            raise ConfigError("must be positive", field="spot_radius_um")

    def cavity_length_nm(self):
        if self.lc_convention == "half-wave":
            return self.wavelength_nm / 2.0
        if self.lc_convention == "five-half-wave":
            return 5.0 * self.wavelength_nm / 2.0
        return float(self.lc_convention)


@dataclass(frozen=True)
class DeviceDerived:
    L_c_nm: float
    tau_photon_ps: float
    tau_polariton_ps: float
    gamma_meV: float
    gamma_h_meV: float
    gamma_rate_per_ps: float
    R_um: float
    A_um2: float
    coupling_radius_um: float
    V_ueV: float
    Q_report: float
    detunings_meV: dict = field(default_factory=dict)

    def to_dict(self):
        out = asdict(self)
        out["detunings_meV"] = {s.value: v for s, v in self.detunings_meV.items()}
        return out


def photon_lifetime(n_c, L_c_nm, reflectivity):
    """Cavity photon lifetime ``n_c L_c / (c (1 - r))`` in ps."""
    if not 0.0 < reflectivity < 1.0:
        raise ConfigError("reflectivity must satisfy 0 < r < 1", field="reflectivity")
    return n_c * L_c_nm / (C_LIGHT * (1.0 - reflectivity))


def spot_radius(wavelength_nm, L_c_nm, reflectivity, n_c):
    """Polariton spot radius in µm."""
    r_nm = math.sqrt(wavelength_nm * L_c_nm / (math.pi * (1.0 - reflectivity) * n_c))
    return r_nm * 1e-3


def angular_frequency(wavelength_nm):
    """Optical angular frequency ``2 pi c / lambda`` in rad/ps."""
    return 2.0 * math.pi * C_LIGHT / wavelength_nm


def exchange_coupling(a_nm, R_um, eps_r):
    """Spin-polariton exchange energy in µeV.

    ``V = k_e a / (eps_r R^2)`` with ``k_e = e^2 / (4 pi eps0)``.
    """
    if a_nm <= 0 or R_um <= 0 or eps_r <= 0:
        raise ConfigError("a, R and eps_r must be positive")
    R_nm = R_um * 1e3
    return COULOMB_K * a_nm / (eps_r * R_nm**2) * 1e3


def detunings(delta_p, V_ueV, r0_sq):
    """Spin-conditioned polariton detunings in meV.

    ``delta_s = delta_p - V r0^2 (s1z + s2z)`` with ``s_z = +-1/2``; the two
    antiparallel configurations stay at ``delta_p``.
    """
    if V_ueV < 0:
        raise ConfigError(f"coupling must be nonnegative, got {V_ueV}", field="V_ueV")
    shift = V_ueV * 1e-3 * r0_sq
    return {s: delta_p - shift * s.total_sz for s in BASIS}


def pump_power(omega_peak, wavelength_nm, tau_photon):
    """Peak pump power in mW for drive amplitude ``omega_peak`` (meV)."""
    if omega_peak < 0 or wavelength_nm <= 0 or tau_photon <= 0:
        raise ConfigError("pump power inputs must be positive")
    p_mev_per_ps = omega_peak**2 * angular_frequency(wavelength_nm) * tau_photon / HBAR
    return p_mev_per_ps * MEV_PER_PS_TO_W * 1e3


def derive_cavity(params: DeviceParams) -> DeviceDerived:
    L_c = params.cavity_length_nm()
    tau_photon = photon_lifetime(params.n_c, L_c, params.reflectivity)
    tau_polariton = tau_photon / params.t0_sq
    gamma = HBAR / tau_polariton
    R = spot_radius(params.wavelength_nm, L_c, params.reflectivity, params.n_c)
    coupling_R = params.spot_radius_um if params.spot_radius_um is not None else R
    V = exchange_coupling(params.trap_radius_nm, coupling_R, params.eps_r)
    return DeviceDerived(
        L_c_nm=L_c,
        tau_photon_ps=tau_photon,
        tau_polariton_ps=tau_polariton,
        gamma_meV=gamma,
        gamma_h_meV=H_PLANCK / tau_polariton,
        gamma_rate_per_ps=gamma / HBAR,
        R_um=R,
        A_um2=math.pi * R**2,
        coupling_radius_um=coupling_R,
        V_ueV=V,
        Q_report=angular_frequency(params.wavelength_nm) * tau_photon,
        detunings_meV=detunings(params.delta_p_meV, V, params.r0_sq),
    )
