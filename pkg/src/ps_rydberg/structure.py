"""
Level structure of Ps in a magnetic field: Doppler widths, motional Stark
fans, adjacent-level spacing, fan interleaving, sublevel density and the
field-ionization limit of the red state.

The transverse velocity entering the motional field is the 1-D thermal
speed sqrt(kB T / m_ps); it is used everywhere a velocity scale is needed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .constants import (
    E_SCALE,
    EV,
    N_MAX,
    a0,
    c,
    check_n,
    dlambda_from_denergy,
    e,
    eps0,
    hbar,
    kB,
    level_energy,
    m_ps,
    photon_energy,
    transition_wavelength,
)

ZEEMAN_1T = 1.2e-4 * EV
USEFUL_N_MIN = 20


@dataclass(frozen=True)
class Environment:
    """Temperature (K) and field magnitude (T, along z) of the Ps cloud."""

    T: float = 100.0
    B: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"temperature must be > 0 K, got {self.T}")
        if not self.B >= 0:
            raise ValueError(f"magnetic field must be >= 0 T, got {self.B}")

    @property
    def v_perp(self) -> float:
        return math.sqrt(kB * self.T / m_ps)

    @property
    def motional_field(self) -> float:
        """|E| = v_perp * B, in V/m."""
        return self.v_perp * self.B


@dataclass(frozen=True)
class LevelBand:
    n: int
    energy: float
    stark_width: float
    splitting: float
    n_interleaved: float
    density: float
    ionizing: bool
    # 3 -> n transition quantities; NaN for n <= 3
    wavelength: float = math.nan
    dlambda_doppler: float = math.nan
    dlambda_stark: float = math.nan
    dlambda_splitting: float = math.nan


@dataclass(frozen=True)
class DopplerWidth:
    dlambda: float
    denergy: float


def doppler_fwhm(env: Environment, lambda0: float) -> DopplerWidth:
    """Gaussian Doppler FWHM of a line at ``lambda0`` for Ps at ``env.T``."""
    if not lambda0 > 0:
        raise ValueError("wavelength must be positive")
    frac = math.sqrt(8.0 * math.log(2.0) * kB * env.T / (m_ps * c * c))
    return DopplerWidth(dlambda=lambda0 * frac, denergy=photon_energy(lambda0) * frac)


def thermal_doppler_width(env: Environment, lambda0: float) -> float:
    """Full Doppler spread 2 lambda0 v_perp / c between atoms at +-v_perp."""
    return 2.0 * lambda0 * env.v_perp / c


def stark_width(env: Environment, n: int) -> float:
    """Total motional Stark fan width 6 e a0 n (n-1) B v_perp, in J."""
    n = check_n(n)
    return 6.0 * e * a0 * n * (n - 1) * env.motional_field


def level_splitting(n: int) -> float:
    """Spacing to the adjacent unperturbed level, 13.6 eV / n^3."""
    n = check_n(n, 2)
    return E_SCALE / n**3


def interleaving_count(env: Environment, n: int) -> float:
    """Number of unperturbed levels covered by the fan of ``n``."""
    return stark_width(env, n) / level_splitting(n)


def sublevel_density(n: int, env: Environment | None = None) -> float:
    """Sublevels per unit angular frequency, n^5 hbar / 13.6 eV (seconds).

    Independent of temperature and field. Only meaningful where the fans
    interleave; pass ``env`` to get a warning when they do not.
    """
    n = check_n(n, 2)
    if env is not None and interleaving_count(env, n) < 1.0:
        warnings.warn(
            f"n={n}: fan width below level spacing at T={env.T} K, B={env.B} T; "
            "sublevel density formula not applicable",
            stacklevel=2,
        )
    return n**5 * hbar / E_SCALE


def ionization_threshold_field(n: int) -> float:
    """Field (V/m) that ionizes the red state of the fan of ``n``."""
    n = check_n(n)
    return e / (16.0 * math.pi * eps0 * a0**2) / (9.0 * n**4)


def is_ionizing(env: Environment, n: int) -> bool:
    return env.motional_field > ionization_threshold_field(n)


def zeeman_scale(env: Environment) -> float:
    """First-order Zeeman (ortho/para m_S=0 mixing) energy, linear in B."""
    return ZEEMAN_1T * env.B


def interleaving_crossing(env: Environment) -> float:
    """Continuous n where n^5 (6 e a0 / 13.6 eV) |E| reaches one; inf if B=0."""
    field = env.motional_field
    if field == 0:
        return math.inf
    return (E_SCALE / (6.0 * e * a0) / field) ** 0.2


def ionization_crossing(env: Environment) -> float:
    """Continuous n where the red-state threshold equals the motional field."""
    field = env.motional_field
    if field == 0:
        return math.inf
    return (e / (16.0 * math.pi * eps0 * a0**2) / (9.0 * field)) ** 0.25


def _marker(x: float) -> int | None:
    # None when the crossing lies beyond the supported n range
    return None if x > N_MAX else int(round(x))


def interleaving_onset(env: Environment) -> int | None:
    return _marker(interleaving_crossing(env))


def ionization_limit(env: Environment) -> int | None:
    """Highest n counted as usable before Stark ionization sets in."""
    return _marker(ionization_crossing(env))


def useful_range(env: Environment) -> tuple[int, int | None]:
    onset = interleaving_onset(env)
    lo = USEFUL_N_MIN if onset is None else max(USEFUL_N_MIN, onset)
    return lo, ionization_limit(env)


def level_band(env: Environment, n: int) -> LevelBand:
    n = check_n(n, 2)
    dE_s = stark_width(env, n)
    dE_n = level_splitting(n)
    row = dict(
        n=n,
        energy=level_energy(n),
        stark_width=dE_s,
        splitting=dE_n,
        n_interleaved=dE_s / dE_n,
        density=sublevel_density(n),
        ionizing=is_ionizing(env, n),
    )
    if n > 3:
        lam = transition_wavelength(3, n)
        row.update(
            wavelength=lam,
            dlambda_doppler=doppler_fwhm(env, lam).dlambda,
            dlambda_stark=dlambda_from_denergy(dE_s, lam),
            dlambda_splitting=dlambda_from_denergy(dE_n, lam),
        )
    return LevelBand(**row)


def structure_table(env: Environment, n_range=range(10, 36)) -> list[LevelBand]:
    """Per-n rows for replotting Doppler/Stark/spacing curves of the 3 -> n line."""
    ns = list(n_range)
    if not ns:
        raise ValueError("empty n range")
    if min(ns) < 2 or max(ns) > 200:
        raise ValueError("n range must lie within [2, 200]")
    return [level_band(env, n) for n in ns]


CSV_COLUMNS = (
    "n",
    "E_n[eV]",
    "dlambda_doppler[nm]",
    "dlambda_stark[nm]",
    "dlambda_splitting[nm]",
    "N_n",
    "rho[s]",
    "ionizing",
)


def band_csv_row(band: LevelBand) -> tuple:
    return (
        band.n,
        band.energy / EV,
        band.dlambda_doppler / 1e-9,
        band.dlambda_stark / 1e-9,
        band.dlambda_splitting / 1e-9,
        band.n_interleaved,
        band.density,
        int(band.ionizing),
    )
