"""
Stochastic three-level ladder simulator (ground -> n_mid -> Rydberg band).

Each realization integrates the density-matrix equations for one atom with

* two laser fields whose phases perform a random walk with full 2 pi jumps
  at fixed intervals (phase-diffusion model of a broadband pulse),
* a Doppler shift from a velocity drawn from the 1-D Maxwell distribution,
* spontaneous decay of the intermediate level back to the ground state,
* photoionization of the intermediate and Rydberg levels into a sink.

The Rydberg band is one effective level coupled with the unperturbed
(n_mid, 1, 0) -> (n, l_f, 0) dipole. Ensemble averages use independent
realizations seeded from one master seed, so results do not depend on
thread scheduling.

Rotating frame, hbar = 1, H = [[0, a, 0], [a*, -D1, b], [0, b*, -(D1+D2)]]
with a = Omega1 exp(-i phi1) / 2 and b = Omega2 exp(-i phi2) / 2. The
integrator works in the interaction picture of the diagonal, where the
detunings become phase ramps exp(i D t) on a and b; populations and
coherence magnitudes are unchanged and far-detuned velocity classes no
longer constrain the step.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from .constants import (
    EV,
    MJ_PER_CM2,
    NM,
    NS,
    RY_PS,
    UJ_PER_CM2,
    a0,
    angular_frequency,
    binding_energy,
    c,
    check_n,
    eps0,
    hbar,
    kB,
    m_ps,
    transition_wavelength,
)
from .dipole import StateLabel, dipole_moment
from .errors import ConfigError
from .saturation import FOUR_LN2, LaserPulse
from .structure import Environment

# Jump interval / coherence time that puts the sinc^2 spectrum FWHM of the
# piecewise-constant phase field at c dlambda / lambda^2.
JUMP_FACTOR = 0.8858929413789046
MID_LIFETIMES = {2: 3.0e-9, 3: 10.5e-9}
SCHEMES = {"1-3-n": 3, "1-2-n": 2}
WINDOW_PAD = 1.5
# Largest phase advance per step from detuning or Rabi frequency (rad).
MAX_PHASE_STEP = 0.1
# Rydberg photoionization cross section relative to the Kramers estimate;
# calibrated so the default 1-3-25 ensemble loses 0.3 % to ionization
# (see calibrate_ryd_ionization).
RYD_ION_ENHANCEMENT = 465.01
THREADS_ENV = "PS_RYDBERG_THREADS"


def kramers_cross_section(n: int, photon_energy: float) -> float:
    """Kramers photoionization cross section (m^2) of Ps level n.

    Hydrogenic form with the Ps length (2 a0) and energy (6.8 eV) scales;
    zero below threshold.
    """
    n = check_n(n)
    bind = RY_PS / n**2
    if photon_energy <= bind:
        return 0.0
    alpha = EV**2 / (4.0 * math.pi * eps0 * hbar * c)
    sigma0 = 64.0 * math.pi * alpha * (2.0 * a0) ** 2 / (3.0 * math.sqrt(3.0))
    return sigma0 * n * (bind / photon_energy) ** 3


@dataclass(frozen=True)
class LadderConfig:
    pulses: tuple
    scheme: str = "1-3-n"
    n_final: int = 25
    final_l: int = 2
    env: Environment = field(default_factory=Environment)
    mid_lifetime: float | None = None
    decay: bool = True
    sigma_ion_mid: float | None = None
    sigma_ion_ryd: float | None = None
    seed: int = 20110401
    n_realizations: int = 300
    dt: float | None = None
    steps_per_jump: int = 10
    beams: str = "co"
    record_points: int = 400
    window: tuple | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if len(self.pulses) != 2:
            raise ConfigError("exactly two pulses are required")
        try:
            check_n(self.n_final, self.n_mid + 1)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.final_l not in (0, 2):
            raise ConfigError("final_l must be 0 or 2 (dipole partners of l=1)")
        if self.beams not in ("co", "counter"):
            raise ConfigError("beams must be 'co' or 'counter'")
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        if self.steps_per_jump < 1:
            raise ConfigError("steps_per_jump must be >= 1")
        for name in ("sigma_ion_mid", "sigma_ion_ryd", "mid_lifetime", "dt"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be non-negative")

    @property
    def n_mid(self) -> int:
        return SCHEMES[self.scheme]

    @property
    def lifetime(self) -> float:
        return MID_LIFETIMES[self.n_mid] if self.mid_lifetime is None else self.mid_lifetime

    @property
    def sigma_mid(self) -> float:
        if self.sigma_ion_mid is not None:
            return self.sigma_ion_mid
        return kramers_cross_section(self.n_mid, self.pulses[0].photon_energy)

    @property
    def sigma_ryd(self) -> float:
        if self.sigma_ion_ryd is not None:
            return self.sigma_ion_ryd
        return RYD_ION_ENHANCEMENT * kramers_cross_section(self.n_final, self.pulses[1].photon_energy)


def default_pulses(scheme: str = "1-3-n", n_final: int = 25) -> tuple:
    """Reference pulse pair for the given ladder."""
    n_mid = SCHEMES[scheme]
    lam1 = transition_wavelength(1, n_mid)
    lam2 = transition_wavelength(n_mid, n_final)
    if n_mid == 3:
        return (
            LaserPulse(lam1, 0.045 * NM, 4 * NS, 200 * UJ_PER_CM2),
            LaserPulse(lam2, 0.72 * NM, 2 * NS, 2.0 * MJ_PER_CM2),
        )
    return (
        LaserPulse(lam1, 0.054 * NM, 4 * NS, 25.7 * UJ_PER_CM2),
        LaserPulse(lam2, 0.36 * NM, 2 * NS, 8.0 * MJ_PER_CM2),
    )


def fig3_config(**kw) -> LadderConfig:
    n_final = kw.get("n_final", 25)
    kw.setdefault("pulses", default_pulses("1-3-n", n_final))
    return LadderConfig(scheme="1-3-n", **kw)


def fig4_config(**kw) -> LadderConfig:
    n_final = kw.get("n_final", 25)
    kw.setdefault("pulses", default_pulses("1-2-n", n_final))
    return LadderConfig(scheme="1-2-n", **kw)


@dataclass(frozen=True)
class SimPlan:
    """Base time grid and per-pulse coefficients of one configuration.

    Each realization may refine the base step by an integer factor
    (see :func:`substeps`); jump intervals and the recording stride scale
    with it so all realizations share the recorded time grid.
    """

    dt: float
    n_steps: int
    t0: float
    jump_steps: tuple
    record_every: int
    pulses: tuple
    rabi_peak: tuple  # peak Rabi angular frequency per leg
    ion_mid: tuple  # peak ionization rate of the mid level from each pulse
    ion_ryd: tuple
    gamma: float
    detuning1: float  # laser minus line, atom at rest
    detuning2: float
    k1: float
    k2: float
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def jump_times(self) -> tuple:
        return tuple(k * self.dt for k in self.jump_steps)

    def envelopes(self, sub: int = 1):
        """Rabi frequencies and ionization rates on the half-step grid of
        the base step divided by ``sub``."""
        got = self._cache.get(sub)
        if got is None:
            n = self.n_steps * sub
            th = self.t0 + 0.5 * (self.dt / sub) * np.arange(2 * n + 1)
            shape = [np.exp(-FOUR_LN2 * ((th - p.t_center) / p.duration) ** 2) for p in self.pulses]
            got = (
                self.rabi_peak[0] * np.sqrt(shape[0]),
                self.rabi_peak[1] * np.sqrt(shape[1]),
                self.ion_mid[0] * shape[0] + self.ion_mid[1] * shape[1],
                self.ion_ryd[0] * shape[0] + self.ion_ryd[1] * shape[1],
            )
            self._cache[sub] = got
        return got


def _peak_ionization(sigma, ref_photon, binding, pulses):
    """Peak rate from each pulse; photons below threshold do not ionize."""
    out = []
    for p in pulses:
        ep = p.photon_energy
        ok = sigma > 0 and ep > binding and p.fluence > 0
        out.append(sigma * (ref_photon / ep) ** 3 * p.intensity(p.t_center) / ep if ok else 0.0)
    return tuple(out)


def plan(config: LadderConfig) -> SimPlan:
    """Resolve time grid, couplings and loss rates for a configuration."""
    p1, p2 = config.pulses
    coh = min(p1.coherence_time, p2.coherence_time)
    if config.dt is None:
        dt = JUMP_FACTOR * coh / config.steps_per_jump
    else:
        dt = config.dt
        if not 0 < dt <= coh / 10.0:
            raise ConfigError(
                f"dt={dt:.3g} s does not resolve the {coh:.3g} s coherence time (need dt <= t_coh/10)"
            )
    jumps = tuple(max(1, int(round(JUMP_FACTOR * p.coherence_time / dt))) for p in (p1, p2))

    lit = [p for p in (p1, p2) if p.fluence > 0] or [p1, p2]
    if config.window is None:
        t0 = min(p.t_center - WINDOW_PAD * p.duration for p in lit)
        t1 = max(p.t_center + WINDOW_PAD * p.duration for p in lit)
    else:
        t0, t1 = config.window
    if not t1 > t0:
        raise ConfigError("empty simulation window")
    if p1.fluence > 0 and p2.fluence > 0:
        if abs(p1.t_center - p2.t_center) > p1.duration + p2.duration:
            warnings.warn("pulses do not overlap in time; ladder excitation will be negligible", stacklevel=2)
    n_steps = int(math.ceil((t1 - t0) / dt))

    n_mid, n_fin = config.n_mid, config.n_final
    d1 = dipole_moment(StateLabel(1, 0, 0), StateLabel(n_mid, 1, 0))
    d2 = dipole_moment(StateLabel(n_mid, 1, 0), StateLabel(n_fin, config.final_l, 0))
    rabi = tuple(d * math.sqrt(2.0 * p.intensity(p.t_center) / (c * eps0)) / hbar for d, p in ((d1, p1), (d2, p2)))

    w12 = angular_frequency(transition_wavelength(1, n_mid))
    w23 = angular_frequency(transition_wavelength(n_mid, n_fin))
    sign2 = 1.0 if config.beams == "co" else -1.0
    return SimPlan(
        dt=dt,
        n_steps=n_steps,
        t0=t0,
        jump_steps=jumps,
        record_every=max(1, n_steps // max(1, config.record_points)),
        pulses=(p1, p2),
        rabi_peak=rabi,
        ion_mid=_peak_ionization(config.sigma_mid, p1.photon_energy, binding_energy(n_mid), (p1, p2)),
        ion_ryd=_peak_ionization(config.sigma_ryd, p2.photon_energy, binding_energy(n_fin), (p1, p2)),
        gamma=(1.0 / config.lifetime) if (config.decay and config.lifetime > 0) else 0.0,
        detuning1=p1.omega0 - w12,
        detuning2=p2.omega0 - w23,
        k1=p1.omega0 / c,
        k2=sign2 * p2.omega0 / c,
    )


def substeps(pl: SimPlan, delta1: float, delta2: float) -> int:
    """Integer refinement keeping the fastest phase rate below
    MAX_PHASE_STEP radians per step."""
    fastest = max(abs(delta1), abs(delta2), pl.rabi_peak[0], pl.rabi_peak[1])
    return max(1, int(math.ceil(fastest * pl.dt / MAX_PHASE_STEP)))


def random_walk_phase(n_steps: int, jump_steps: int, rng: np.random.Generator) -> np.ndarray:
    """Per-step laser phase: a random walk with uniform 2 pi jumps every
    ``jump_steps`` steps, started at a random point of the jump grid."""
    offset = int(rng.integers(jump_steps))
    n_jumps = (n_steps + offset) // jump_steps + 1
    walk = np.cumsum(rng.uniform(0.0, 2.0 * math.pi, n_jumps)) % (2.0 * math.pi)
    return walk[(np.arange(n_steps) + offset) // jump_steps]


def phase_noise_spectrum(delta, jump_time: float):
    """Power spectrum (unit area, per rad/s) of the jump-phase field."""
    x = np.asarray(delta, dtype=float) * jump_time / 2.0
    return jump_time / (2.0 * math.pi) * np.sinc(x / math.pi) ** 2


@numba.njit(cache=True, nogil=True)
def _rhs(r11, r22, r33, c12, c23, c13, a, b, gam, k2, k3):
    z = a * np.conj(c12)
    w = b * np.conj(c23)
    g2 = gam + k2
    d11 = 2.0 * z.imag + gam * r22
    d22 = -2.0 * z.imag + 2.0 * w.imag - g2 * r22
    d33 = -2.0 * w.imag - k3 * r33
    d12 = -1j * a * (r22 - r11) + 1j * c13 * np.conj(b) - 0.5 * g2 * c12
    d23 = -1j * np.conj(a) * c13 - 1j * b * (r33 - r22) - 0.5 * (g2 + k3) * c23
    d13 = -1j * (a * c23 - c12 * b) - 0.5 * k3 * c13
    dion = k2 * r22 + k3 * r33
    return d11, d22, d33, d12, d23, d13, dion


@numba.njit(cache=True, nogil=True)
def _integrate(dt, om1, om2, kap2, kap3, ph1, ph2, delta1, delta2, gam, rec):
    n = ph1.shape[0]
    out = np.zeros((n // rec + 2, 5))
    r11, r22, r33, pion = 1.0, 0.0, 0.0, 0.0
    c12, c23, c13 = 0j, 0j, 0j
    out[0, 0] = 0.0
    out[0, 1] = 1.0
    j = 1
    max_trace = 0.0
    min_pop = 0.0
    max_coh = 0.0
    hr1 = np.exp(0.5j * delta1 * dt)
    hr2 = np.exp(0.5j * delta2 * dt)
    for i in range(n):
        t = i * dt
        e1 = 0.5 * np.exp(1j * (delta1 * t - ph1[i]))
        e2 = 0.5 * np.exp(1j * (delta2 * t - ph2[i]))
        a0_ = om1[2 * i] * e1
        b0_ = om2[2 * i] * e2
        am = om1[2 * i + 1] * e1 * hr1
        bm = om2[2 * i + 1] * e2 * hr2
        a1 = om1[2 * i + 2] * e1 * hr1 * hr1
        b1 = om2[2 * i + 2] * e2 * hr2 * hr2
        q = 0.5 * dt
        K1 = _rhs(r11, r22, r33, c12, c23, c13, a0_, b0_, gam, kap2[2 * i], kap3[2 * i])
        K2 = _rhs(r11 + q * K1[0], r22 + q * K1[1], r33 + q * K1[2], c12 + q * K1[3], c23 + q * K1[4],
                  c13 + q * K1[5], am, bm, gam, kap2[2 * i + 1], kap3[2 * i + 1])
        K3 = _rhs(r11 + q * K2[0], r22 + q * K2[1], r33 + q * K2[2], c12 + q * K2[3], c23 + q * K2[4],
                  c13 + q * K2[5], am, bm, gam, kap2[2 * i + 1], kap3[2 * i + 1])
        K4 = _rhs(r11 + dt * K3[0], r22 + dt * K3[1], r33 + dt * K3[2], c12 + dt * K3[3], c23 + dt * K3[4],
                  c13 + dt * K3[5], a1, b1, gam, kap2[2 * i + 2], kap3[2 * i + 2])
        s = dt / 6.0
        r11 += s * (K1[0] + 2.0 * K2[0] + 2.0 * K3[0] + K4[0])
        r22 += s * (K1[1] + 2.0 * K2[1] + 2.0 * K3[1] + K4[1])
        r33 += s * (K1[2] + 2.0 * K2[2] + 2.0 * K3[2] + K4[2])
        c12 += s * (K1[3] + 2.0 * K2[3] + 2.0 * K3[3] + K4[3])
        c23 += s * (K1[4] + 2.0 * K2[4] + 2.0 * K3[4] + K4[4])
        c13 += s * (K1[5] + 2.0 * K2[5] + 2.0 * K3[5] + K4[5])
        pion += s * (K1[6] + 2.0 * K2[6] + 2.0 * K3[6] + K4[6])

        tr = abs(r11 + r22 + r33 + pion - 1.0)
        if tr > max_trace:
            max_trace = tr
        mp = min(r11, min(r22, r33))
        if mp < min_pop:
            min_pop = mp
        ex = max(abs(c12) - math.sqrt(max(r11 * r22, 0.0)),
                 max(abs(c23) - math.sqrt(max(r22 * r33, 0.0)),
                     abs(c13) - math.sqrt(max(r11 * r33, 0.0))))
        if ex > max_coh:
            max_coh = ex
        if (i + 1) % rec == 0 or i == n - 1:
            out[j, 0] = (i + 1) * dt
            out[j, 1] = r11
            out[j, 2] = r22
            out[j, 3] = r33
            out[j, 4] = pion
            j += 1
    return out[:j], max_trace, min_pop, max_coh


@dataclass(frozen=True)
class SimRecord:
    times: np.ndarray
    p_ground: np.ndarray
    p_mid: np.ndarray
    p_ryd: np.ndarray
    p_ion: np.ndarray
    velocity_sample: float
    max_trace_error: float
    min_population: float
    max_coherence_excess: float

    def final(self) -> np.ndarray:
        return np.array([self.p_ground[-1], self.p_mid[-1], self.p_ryd[-1], self.p_ion[-1]])


def _run(pl: SimPlan, env: Environment, rng: np.random.Generator) -> SimRecord:
    v = float(rng.normal(0.0, math.sqrt(kB * env.T / m_ps)))
    # atom moving along +z sees co-propagating light red-shifted
    delta1 = pl.detuning1 - pl.k1 * v
    delta2 = pl.detuning2 - pl.k2 * v
    sub = substeps(pl, delta1, delta2)
    n = pl.n_steps * sub
    ph1 = random_walk_phase(n, pl.jump_steps[0] * sub, rng)
    ph2 = random_walk_phase(n, pl.jump_steps[1] * sub, rng)
    om1, om2, kap_mid, kap_ryd = pl.envelopes(sub)
    out, trace, minp, coh = _integrate(
        pl.dt / sub, om1, om2, kap_mid, kap_ryd,
        ph1, ph2, delta1, delta2, pl.gamma, pl.record_every * sub,
    )
    return SimRecord(
        times=pl.t0 + out[:, 0],
        p_ground=out[:, 1],
        p_mid=out[:, 2],
        p_ryd=out[:, 3],
        p_ion=out[:, 4],
        velocity_sample=v,
        max_trace_error=trace,
        min_population=minp,
        max_coherence_excess=coh,
    )


def simulate_one(config: LadderConfig, realization_seed=None) -> SimRecord:
    """One noise/velocity realization. Same (config, seed) -> identical record."""
    seed = config.seed if realization_seed is None else realization_seed
    return _run(plan(config), config.env, np.random.default_rng(seed))


@dataclass(frozen=True)
class EnsembleResult:
    times: np.ndarray
    mean: np.ndarray  # (4, n_times): ground, mid, ryd, ion
    stderr: np.ndarray
    finals: np.ndarray  # (n_realizations, 4)
    velocities: np.ndarray
    seed: int
    max_trace_error: float

    @property
    def n_realizations(self) -> int:
        return self.finals.shape[0]

    def _final(self, k):
        col = self.finals[:, k]
        se = col.std(ddof=1) / math.sqrt(len(col)) if len(col) > 1 else math.nan
        return float(col.mean()), float(se)

    @property
    def final_ground(self):
        return self._final(0)

    @property
    def final_mid(self):
        return self._final(1)

    @property
    def final_ryd(self):
        return self._final(2)

    @property
    def final_ion(self):
        return self._final(3)


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def realization_seeds(config: LadderConfig) -> list:
    return np.random.SeedSequence(config.seed).spawn(config.n_realizations)


def simulate_ensemble(config: LadderConfig, workers: int | None = None) -> EnsembleResult:
    """Average ``config.n_realizations`` independent realizations."""
    pl = plan(config)
    seeds = realization_seeds(config)
    workers = worker_count() if workers is None else max(1, workers)

    def one(ss):
        return _run(pl, config.env, np.random.default_rng(ss))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(one, seeds))
    else:
        records = [one(s) for s in seeds]

    stack = np.stack([np.vstack([r.p_ground, r.p_mid, r.p_ryd, r.p_ion]) for r in records])
    n = stack.shape[0]
    mean = stack.mean(axis=0)
    se = stack.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.full_like(mean, np.nan)
    return EnsembleResult(
        times=records[0].times,
        mean=mean,
        stderr=se,
        finals=np.array([r.final() for r in records]),
        velocities=np.array([r.velocity_sample for r in records]),
        seed=config.seed,
        max_trace_error=max(r.max_trace_error for r in records),
    )


def ionization_fraction(result: EnsembleResult) -> float:
    return result.final_ion[0]


def calibrate_ryd_ionization(
    config: LadderConfig,
    target: float = 0.003,
    bracket: tuple = (1e-26, 1e-18),
    rtol: float = 1e-3,
    max_iter: int = 60,
) -> float:
    """Bisect (in log) the Rydberg photoionization cross section so the
    ensemble's final ionized fraction equals ``target``. Common random
    numbers make the objective monotone in the cross section."""
    lo, hi = (math.log(b) for b in bracket)

    def ion(log_sigma):
        return ionization_fraction(simulate_ensemble(replace(config, sigma_ion_ryd=math.exp(log_sigma))))

    if not ion(lo) < target < ion(hi):
        raise ConfigError("target ionization not bracketed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if ion(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < rtol:
            break
    return math.exp(0.5 * (lo + hi))
