"""
Saturation fluences and the incoherent two-level rate model.

Leg one (1 -> n_mid) is a Doppler-broadened line driven by a Gaussian laser
spectrum; leg two (n_mid -> n) drives the quasi-continuum of the mixed
Rydberg fan. Pulses have Gaussian temporal envelopes, so the rate model
depends on time only through the running fluence F(t).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import erf

from .constants import E_SCALE, MM, angular_frequency, c, check_n, hbar, transition_wavelength
from .dipole import StateLabel, einstein_B
from .errors import ConvergenceError
from .structure import Environment, doppler_fwhm, thermal_doppler_width

FOUR_LN2 = 4.0 * math.log(2.0)
DEFAULT_SPOT_FWHM = 2.8 * MM
DEFAULT_OVERDRIVE = 2.0
SPOT_GAUSS_FACTOR = 1.177
COHERENCE_WARN_RATIO = 0.1


@dataclass(frozen=True)
class LaserPulse:
    """One excitation pulse: Gaussian in time and in spectrum.

    ``fluence`` is the local time-integrated intensity (J/m^2) seen by the
    atom, i.e. the peak of the transverse profile.
    """

    lambda0: float
    dlambda: float
    duration: float
    fluence: float
    t_center: float = 0.0
    polarization: str = "z"

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")
        if not self.dlambda > 0:
            raise ValueError("dlambda must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.fluence >= 0:
            raise ValueError("fluence must be non-negative")
        if self.polarization != "z":
            raise ValueError("only linear z polarization is supported")
        if self.coherence_time / self.duration > COHERENCE_WARN_RATIO:
            warnings.warn(
                f"coherence time {self.coherence_time:.3g} s is not short against the "
                f"{self.duration:.3g} s pulse; incoherent models may not apply",
                stacklevel=3,
            )

    @property
    def coherence_time(self) -> float:
        return self.lambda0**2 / (c * self.dlambda)

    @property
    def omega0(self) -> float:
        return angular_frequency(self.lambda0)

    @property
    def domega(self) -> float:
        """Spectral FWHM in angular frequency."""
        return 2.0 * math.pi * c * self.dlambda / self.lambda0**2

    @property
    def photon_energy(self) -> float:
        return hbar * self.omega0

    def intensity(self, t):
        x = (np.asarray(t, dtype=float) - self.t_center) / self.duration
        return self.fluence * math.sqrt(FOUR_LN2 / math.pi) / self.duration * np.exp(-FOUR_LN2 * x * x)

    def cumulative_fluence(self, t):
        x = (np.asarray(t, dtype=float) - self.t_center) / self.duration
        return 0.5 * self.fluence * (1.0 + erf(math.sqrt(FOUR_LN2) * x))


@dataclass(frozen=True)
class FluenceReport:
    f_sat: float
    pulse_energy: float
    spot_fwhm: float
    overdrive: float = DEFAULT_OVERDRIVE


def doppler_width(env: Environment, lambda0: float, width: str = "thermal") -> float:
    """Doppler width used for leg-one saturation.

    ``"fwhm"`` is the Gaussian FWHM of the 1-D Maxwell distribution;
    ``"thermal"`` is 2 lambda0 v_perp / c, the width behind the reference
    93.3 uJ/cm^2 (smaller than the FWHM by sqrt(2 ln 2)).
    """
    if width == "fwhm":
        return doppler_fwhm(env, lambda0).dlambda
    if width == "thermal":
        return thermal_doppler_width(env, lambda0)
    raise ValueError(f"unknown Doppler width convention {width!r}")


def leg1_B(n_mid: int = 3) -> float:
    return einstein_B(StateLabel(1, 0, 0), StateLabel(n_mid, 1, 0))


def leg2_B(n: int, n_mid: int = 3, final_l: int = 2) -> float:
    return einstein_B(StateLabel(n_mid, 1, 0), StateLabel(n, final_l, 0))


def fsat_13(env: Environment, n_mid: int = 3, width: str = "thermal") -> float:
    """Leg-one saturation fluence (J/m^2) with laser width matched to Doppler.

    F_sat = (c^2 / B) sqrt(2 pi^3 / ln 2) dlambda_D / lambda^2
    """
    lam = transition_wavelength(1, n_mid)
    dlam = doppler_width(env, lam, width)
    return c * c / leg1_B(n_mid) * math.sqrt(2.0 * math.pi**3 / math.log(2.0)) * dlam / lam**2


def fsat_13_lineshape(env: Environment, n_mid: int = 3, width: str = "thermal") -> float:
    """Same quantity written as c sqrt(2) / (B g_D(0))."""
    lam = transition_wavelength(1, n_mid)
    domega = 2.0 * math.pi * c * doppler_width(env, lam, width) / lam**2
    g0 = 2.0 * math.sqrt(math.log(2.0) / math.pi) / domega
    return c * math.sqrt(2.0) / (leg1_B(n_mid) * g0)


def fsat_3n(n: int, n_mid: int = 3, final_l: int = 2) -> float:
    """Leg-two saturation fluence into the mixed fan: c 13.6 eV / (B hbar n^3)."""
    n = check_n(n, n_mid + 1)
    return c * E_SCALE / (leg2_B(n, n_mid, final_l) * hbar * n**3)


def pulse_energy(f_sat: float, spot_fwhm: float = DEFAULT_SPOT_FWHM, overdrive_factor: float = DEFAULT_OVERDRIVE) -> float:
    """Energy of a Gaussian beam with peak fluence overdrive_factor * f_sat."""
    if not spot_fwhm > 0:
        raise ValueError("spot FWHM must be positive")
    if overdrive_factor < 0:
        raise ValueError("overdrive factor must be non-negative")
    return math.pi * (overdrive_factor * f_sat / 2.0) * (spot_fwhm / SPOT_GAUSS_FACTOR) ** 2


def fluence_report(f_sat: float, spot_fwhm: float = DEFAULT_SPOT_FWHM, overdrive_factor: float = DEFAULT_OVERDRIVE) -> FluenceReport:
    return FluenceReport(
        f_sat=f_sat,
        pulse_energy=pulse_energy(f_sat, spot_fwhm, overdrive_factor),
        spot_fwhm=spot_fwhm,
        overdrive=overdrive_factor,
    )


def gaussian_overlap(center_a: float, fwhm_a: float, center_b: float, fwhm_b: float) -> float:
    """int g_a(w) g_b(w) dw for two unit-area Gaussians (units of 1/frequency)."""
    s2 = (fwhm_a**2 + fwhm_b**2) / (8.0 * math.log(2.0))
    d = center_a - center_b
    return math.exp(-0.5 * d * d / s2) / math.sqrt(2.0 * math.pi * s2)


def leg1_overlap(pulse: LaserPulse, env: Environment, n_mid: int = 3) -> float:
    lam = transition_wavelength(1, n_mid)
    omega_line = angular_frequency(lam)
    fwhm_line = omega_line * doppler_fwhm(env, 1.0).dlambda
    return gaussian_overlap(pulse.omega0, pulse.domega, omega_line, fwhm_line)


def w13_rate(t, pulse: LaserPulse, env: Environment, n_mid: int = 3):
    """Excitation probability per unit time on leg one (1/s).

    General Gaussian-laser / Gaussian-Doppler overlap; for matched widths it
    reduces to I_L B g_D(0) / (c sqrt 2).
    """
    return pulse.intensity(t) * leg1_B(n_mid) * leg1_overlap(pulse, env, n_mid) / c


def fsat_from_rate(B: float, overlap: float) -> float:
    """F_sat = c / (B * overlap) for a rate W = I B overlap / c."""
    return c / (B * overlap)


def rate_population(t, pulse: LaserPulse, f_sat: float):
    """Upper-level population of the incoherent two-level model,
    P(t) = (1 - exp(-2 F(t) / F_sat)) / 2.
    """
    if not f_sat > 0:
        raise ValueError("f_sat must be positive")
    return 0.5 * (1.0 - np.exp(-2.0 * pulse.cumulative_fluence(t) / f_sat))


def rate_population_numeric(pulse: LaserPulse, f_sat: float, t=None, rtol: float = 1e-11):
    """Integrate dP/dt = (1 - 2P) I(t) / F_sat; returns ``(t, P)``."""
    if not f_sat > 0:
        raise ValueError("f_sat must be positive")
    tau = pulse.duration
    if t is None:
        t = np.linspace(pulse.t_center - 3 * tau, pulse.t_center + 3 * tau, 601)
    t = np.asarray(t, dtype=float)
    if np.any(np.diff(t) < 0):
        raise ValueError("time grid must be increasing")
    t0 = min(t[0], pulse.t_center - 8 * tau)
    p0 = float(rate_population(t0, pulse, f_sat))

    def rhs(tt, p):
        return (1.0 - 2.0 * p) * pulse.intensity(tt) / f_sat

    sol = solve_ivp(
        rhs,
        (t0, t[-1]),
        [p0],
        method="DOP853",
        t_eval=t,
        rtol=rtol,
        atol=1e-14,
        max_step=tau / 20,
    )
    if not sol.success:
        raise ConvergenceError(f"rate equation integration failed: {sol.message}")
    return t, sol.y[0]
