"""
Electric-dipole matrix elements for Ps.

Radial integrals come from Gordon's closed form for hydrogenic bound states.
The two terminating 2F1 series are summed in exact rational arithmetic and
the factorial prefactor is handled with log-gamma, so nothing overflows or
cancels catastrophically up to n = 200. Ps lengths are twice the hydrogen
ones (Bohr radius 2 a0 for the e+e- system).

Only linear polarization along the field axis (Delta m = 0) is supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .constants import a0, c, check_n, e, eps0, hbar, transition_energy
from .structure import Environment, doppler_fwhm, sublevel_density

PS_LENGTH_SCALE = 2.0
POLARIZATIONS = ("z",)


@dataclass(frozen=True)
class StateLabel:
    n: int
    l: int  # noqa: E741
    m: int = 0

    def __post_init__(self):
        check_n(self.n)
        if not 0 <= self.l < self.n:
            raise ValueError(f"need 0 <= l < n, got n={self.n}, l={self.l}")
        if abs(self.m) > self.l:
            raise ValueError(f"need |m| <= l, got l={self.l}, m={self.m}")


@dataclass(frozen=True)
class TransitionSpec:
    lower: StateLabel
    upper: StateLabel
    polarization: str
    dipole_moment: float  # C m
    einstein_B: float  # m^3 rad / (J s^2)
    cross_section_peak: float  # m^2, Doppler-broadened line centre


def _hyp2f1_terminating(a: int, b: int, c_: int, x: Fraction) -> Fraction:
    """Exact 2F1(a, b; c; x) for a non-positive integer ``a``."""
    total = Fraction(0)
    term = Fraction(1)
    k = 0
    while term != 0:
        total += term
        term = term * (a + k) * (b + k) / ((c_ + k) * (k + 1)) * x
        k += 1
    return total


def _log_abs_fraction(q: Fraction) -> float:
    return math.log(abs(q.numerator)) - math.log(q.denominator)


@lru_cache(maxsize=4096)
def _gordon(n: int, l: int, n2: int) -> float:  # noqa: E741
    """<n, l | r | n2, l-1> for hydrogen, in units of a0."""
    nr = n - l - 1
    n2r = n2 - l
    x = Fraction(-4 * n * n2, (n - n2) ** 2)
    combo = _hyp2f1_terminating(-nr, -n2r, 2 * l, x) - Fraction(
        n - n2, n + n2
    ) ** 2 * _hyp2f1_terminating(-nr - 2, -n2r, 2 * l, x)
    if combo == 0:
        return 0.0
    power = n + n2 - 2 * l - 2
    log_mag = (
        -math.log(4.0)
        - math.lgamma(2 * l)
        + 0.5
        * (
            math.lgamma(n + l + 1)
            + math.lgamma(n2 + l)
            - math.lgamma(n - l)
            - math.lgamma(n2 - l + 1)
        )
        + (l + 1) * math.log(4 * n * n2)
        + power * math.log(abs(n - n2))
        - (n + n2) * math.log(n + n2)
        + _log_abs_fraction(combo)
    )
    sign = (-1) ** (n2 - l)
    if combo < 0:
        sign = -sign
    if n < n2 and power % 2:
        sign = -sign
    return sign * math.exp(log_mag)


def radial_integral(n1: int, l1: int, n2: int, l2: int) -> float:
    """Hydrogen radial integral int R_{n1 l1} R_{n2 l2} r^3 dr in units of a0.

    Radial functions follow the convention R_{nl}(r) > 0 as r -> 0.
    """
    StateLabel(n1, l1)
    StateLabel(n2, l2)
    if abs(l1 - l2) != 1:
        raise ValueError(f"dipole-forbidden: l {l1} -> {l2}")
    if n1 == n2:
        raise ValueError("n1 == n2 is outside the bound-bound Gordon form used here")
    if l1 > l2:
        return _gordon(n1, l1, n2)
    return _gordon(n2, l2, n1)


def radial_matrix_element(n1: int, l1: int, n2: int, l2: int) -> float:
    """Ps radial matrix element <n1 l1| r |n2 l2> in metres."""
    return PS_LENGTH_SCALE * a0 * radial_integral(n1, l1, n2, l2)


def angular_factor(l1: int, m1: int, l2: int, m2: int, polarization: str = "z") -> float:
    """|<l1 m1| cos(theta) |l2 m2>|^2 for polarization along z."""
    if polarization not in POLARIZATIONS:
        raise ValueError(f"unsupported polarization {polarization!r}")
    if abs(l1 - l2) != 1:
        raise ValueError(f"dipole-forbidden: l {l1} -> {l2}")
    if abs(m1) > l1 or abs(m2) > l2:
        raise ValueError("need |m| <= l")
    if m1 != m2:
        return 0.0
    lg = max(l1, l2)
    return (lg * lg - m1 * m1) / ((2 * lg - 1) * (2 * lg + 1))


def dipole_moment(lower: StateLabel, upper: StateLabel, polarization: str = "z") -> float:
    """|<lower| e r.eps |upper>| in C m (non-negative by phase choice)."""
    ang = angular_factor(lower.l, lower.m, upper.l, upper.m, polarization)
    radial = radial_matrix_element(lower.n, lower.l, upper.n, upper.l)
    return e * abs(radial) * math.sqrt(ang)


def einstein_B(lower: StateLabel, upper: StateLabel, polarization: str = "z") -> float:
    """Absorption coefficient B = pi |d|^2 / (eps0 hbar^2)."""
    d = dipole_moment(lower, upper, polarization)
    return math.pi * d * d / (eps0 * hbar * hbar)


def band_B(n: int, lower: StateLabel = StateLabel(3, 1, 0), final_l: int = 2) -> float:
    """Per-sublevel coefficient of the mixed Rydberg band, B(lower -> n) / n^2."""
    n = check_n(n, lower.n + 1)
    return einstein_B(lower, StateLabel(n, final_l, lower.m)) / n**2


def doppler_lineshape(omega, omega0: float, fwhm: float):
    """Unit-area Gaussian in angular frequency."""
    sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    x = (np.asarray(omega, dtype=float) - omega0) / sigma
    return np.exp(-0.5 * x * x) / (math.sqrt(2.0 * math.pi) * sigma)


def line_omega(n_lo: int, n_hi: int) -> float:
    return transition_energy(n_lo, n_hi) / hbar


def doppler_fwhm_omega(env: Environment, n_lo: int, n_hi: int) -> float:
    # fractional width is wavelength independent
    return line_omega(n_lo, n_hi) * doppler_fwhm(env, 1.0).dlambda


def cross_section_13(omega, env: Environment, n_mid: int = 3):
    """Doppler-broadened 1 -> n_mid cross section (m^2), linear z polarization."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    B = einstein_B(StateLabel(1, 0, 0), StateLabel(n_mid, 1, 0))
    g = doppler_lineshape(omega, line_omega(1, n_mid), doppler_fwhm_omega(env, 1, n_mid))
    return hbar * omega / c * g * B


def cross_section_3n(omega, env: Environment, n: int, n_mid: int = 3):
    """Band cross section (m^2) of the mixed Rydberg fan; flat in omega."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    return hbar * omega / c * sublevel_density(n) * band_B(n, StateLabel(n_mid, 1, 0))


def transition_spec(lower: StateLabel, upper: StateLabel, env: Environment) -> TransitionSpec:
    d = dipole_moment(lower, upper)
    B = einstein_B(lower, upper)
    omega0 = line_omega(lower.n, upper.n)
    g0 = doppler_lineshape(omega0, omega0, doppler_fwhm_omega(env, lower.n, upper.n))
    return TransitionSpec(
        lower=lower,
        upper=upper,
        polarization="z",
        dipole_moment=d,
        einstein_B=B,
        cross_section_peak=float(hbar * omega0 / c * g0 * B),
    )
