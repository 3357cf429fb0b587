"""Independent reference calculations used by the tests."""

import math
import random

import mpmath as mp
import numpy as np

from ps_rydberg.bloch import phase_noise_spectrum, plan
from ps_rydberg.constants import c, kB, m_ps
from ps_rydberg.saturation import leg1_B, rate_population


def _R(n, l, r):  # noqa: E741
    rho = 2 * r / n
    norm = mp.sqrt((mp.mpf(2) / n) ** 3 * mp.factorial(n - l - 1) / (2 * n * mp.factorial(n + l)))
    return norm * rho**l * mp.exp(-rho / 2) * mp.laguerre(n - l - 1, 2 * l + 1, rho)


def quad_radial(n1, l1, n2, l2):
    """Direct 30-digit quadrature of int R1 R2 r^3 dr (hydrogen, a0 units)."""
    with mp.workdps(30):
        top = 6 * max(n1, n2) ** 2 + 60
        pts = [mp.mpf(top) * k / 200 for k in range(201)]
        return float(mp.quad(lambda r: _R(n1, l1, r) * _R(n2, l2, r) * r**3, pts))


def random_pairs(count, n_max=40, seed=7):
    """Dipole-allowed (n1, l1, n2, l2) with n1 != n2."""
    rng = random.Random(seed)
    pairs = []
    while len(pairs) < count:
        n1 = rng.randint(2, n_max)
        l1 = rng.randint(0, n1 - 1)
        l2 = l1 + rng.choice((-1, 1))
        if l2 < 0:
            continue
        n2 = rng.randint(l2 + 1, n_max)
        if n2 != n1:
            pairs.append((n1, l1, n2, l2))
    return pairs


def incoherent_leg1(cfg):
    """Velocity average of the two-level rate model with the phase-noise
    line shape evaluated at each Doppler shift."""
    pl = plan(cfg)
    x, w = np.polynomial.hermite_e.hermegauss(120)
    v = x * math.sqrt(kB * cfg.env.T / m_ps)
    S = phase_noise_spectrum(pl.k1 * v, pl.jump_times[0])
    fs = c / (leg1_B(cfg.n_mid) * S)
    p = np.array([float(rate_population(np.inf, cfg.pulses[0], f)) for f in fs])
    return float(np.sum(w * p) / np.sum(w))
