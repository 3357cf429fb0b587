import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ps_rydberg.constants import EV, NM, transition_wavelength
from ps_rydberg.structure import (
    Environment,
    doppler_fwhm,
    interleaving_count,
    interleaving_crossing,
    interleaving_onset,
    ionization_crossing,
    ionization_limit,
    ionization_threshold_field,
    is_ionizing,
    level_band,
    level_splitting,
    stark_width,
    structure_table,
    sublevel_density,
    thermal_doppler_width,
    useful_range,
    zeeman_scale,
)

ENV = Environment()

# Frozen from an independent evaluation with literal CODATA 2018 values:
# v = sqrt(kB T / 2 m_e); FWHM = lam sqrt(8 ln2) v / c; fan = 6 e a0 n(n-1) v B
V_100K = 27528.47
DOPPLER_205 = 0.0443536  # nm
DOPPLER_1665 = 0.360013  # nm
STARK_3 = 5.24428e-5  # eV
STARK_25 = 5.24428e-3  # eV


def test_thermal_velocity():
    assert ENV.v_perp == pytest.approx(V_100K, rel=1e-6)
    assert ENV.motional_field == pytest.approx(V_100K, rel=1e-6)


def test_doppler_widths():
    assert doppler_fwhm(ENV, transition_wavelength(1, 3)).dlambda / NM == pytest.approx(DOPPLER_205, rel=1e-4)
    assert doppler_fwhm(ENV, transition_wavelength(3, 25)).dlambda / NM == pytest.approx(DOPPLER_1665, rel=1e-4)


def test_doppler_energy_and_thermal_width():
    lam = transition_wavelength(1, 3)
    w = doppler_fwhm(ENV, lam)
    assert w.denergy / w.dlambda == pytest.approx((6.8 * 8 / 9) * EV / lam, rel=1e-3)
    # 2 v / c against sqrt(8 ln 2) v / c
    assert w.dlambda / thermal_doppler_width(ENV, lam) == pytest.approx(math.sqrt(2 * math.log(2)))


def test_stark_widths():
    assert stark_width(ENV, 3) / EV == pytest.approx(STARK_3, rel=1e-4)
    assert stark_width(ENV, 25) / EV == pytest.approx(STARK_25, rel=1e-4)


def test_interleaving_counts():
    expect = {16: 0.63178, 17: 0.85884, 18: 1.14692, 25: 6.02514}
    for n, v in expect.items():
        assert interleaving_count(ENV, n) == pytest.approx(v, rel=1e-4)


def test_markers():
    assert interleaving_crossing(ENV) == pytest.approx(17.3141, abs=1e-3)
    assert interleaving_onset(ENV) == 17
    assert ionization_crossing(ENV) == pytest.approx(26.8390, abs=1e-3)
    assert ionization_limit(ENV) == 27
    assert useful_range(ENV) == (20, 27)


def test_threshold_fields():
    assert ionization_threshold_field(26) > ENV.motional_field > ionization_threshold_field(27)
    assert not is_ionizing(ENV, 26)
    assert is_ionizing(ENV, 27) and is_ionizing(ENV, 28)


def test_zero_field():
    env = Environment(B=0.0)
    assert stark_width(env, 25) == 0
    assert interleaving_onset(env) is None
    assert ionization_limit(env) is None
    assert useful_range(env) == (20, None)
    assert zeeman_scale(env) == 0


def test_sqrt_t_scaling():
    cold = Environment(T=25.0)
    assert stark_width(cold, 20) / stark_width(ENV, 20) == pytest.approx(0.5)
    lam = transition_wavelength(3, 20)
    assert doppler_fwhm(cold, lam).dlambda / doppler_fwhm(ENV, lam).dlambda == pytest.approx(0.5)


def test_density_formula_and_warning():
    assert sublevel_density(25) == pytest.approx(25**5 / (13.6 * EV) * 1.054571817e-34, rel=1e-8)
    with pytest.warns(UserWarning):
        sublevel_density(10, ENV)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sublevel_density(25, ENV)


def test_table_rows():
    rows = structure_table(ENV)
    assert [r.n for r in rows] == list(range(10, 36))
    band = level_band(ENV, 25)
    assert band.dlambda_stark / NM > band.dlambda_doppler / NM > 0
    assert math.isnan(level_band(ENV, 3).dlambda_doppler)


@pytest.mark.parametrize("rng", [range(0), range(1, 5), range(150, 202)])
def test_table_range_checked(rng):
    with pytest.raises(ValueError):
        structure_table(ENV, rng)


def test_bad_environment():
    with pytest.raises(ValueError):
        Environment(T=0)
    with pytest.raises(ValueError):
        Environment(B=-1)


@settings(max_examples=50)
@given(st.floats(1.0, 2000.0), st.floats(0.01, 10.0), st.integers(3, 150))
def test_structure_properties(T, B, n):
    env = Environment(T=T, B=B)
    assert stark_width(env, n + 1) > stark_width(env, n) > 0
    assert level_splitting(n + 1) < level_splitting(n)
    assert interleaving_count(env, n + 1) > interleaving_count(env, n)
    # field ionization is monotone in n
    if is_ionizing(env, n):
        assert is_ionizing(env, n + 1)
    # the onset crossing is where the large-n fan width n^5 form reaches one spacing
    x = interleaving_crossing(env)
    approx = stark_width(env, n) * n / (n - 1) / level_splitting(n)
    assert (approx >= 1) == (n >= x) or abs(n - x) < 1e-9
    y = ionization_crossing(env)
    assert is_ionizing(env, n) == (n > y) or abs(n - y) < 1e-9

@given(st.floats(1.0, 2000.0), st.floats(0.0, 10.0))
def test_useful_range_bounds(T, B):
    lo, hi = useful_range(Environment(T=T, B=B))
    assert lo >= 20
    assert 20 <= lo <= 200
    assert hi is None or 1 <= hi <= 200
