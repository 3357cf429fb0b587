import math
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import factorial, lpmv

from ps_rydberg.constants import a0, e, hbar
from ps_rydberg.dipole import (
    StateLabel,
    angular_factor,
    band_B,
    cross_section_13,
    cross_section_3n,
    dipole_moment,
    doppler_lineshape,
    einstein_B,
    line_omega,
    radial_integral,
    radial_matrix_element,
    transition_spec,
)
from ps_rydberg.structure import Environment

from oracles import quad_radial, random_pairs


PAIRS = random_pairs(25)


@pytest.mark.parametrize("n1,l1,n2,l2", PAIRS)
def test_radial_against_quadrature(n1, l1, n2, l2):
    assert radial_integral(n1, l1, n2, l2) == pytest.approx(quad_radial(n1, l1, n2, l2), rel=1e-8)


def test_closed_form_values():
    # 1s-2p: 2^7 sqrt(6) / 3^5
    assert radial_integral(1, 0, 2, 1) == pytest.approx(128 * math.sqrt(6) / 243, rel=1e-13)
    assert radial_integral(2, 1, 1, 0) == radial_integral(1, 0, 2, 1)
    assert radial_matrix_element(1, 0, 2, 1) == pytest.approx(2 * a0 * 128 * math.sqrt(6) / 243, rel=1e-13)


@pytest.mark.parametrize("n1,l1,n2,l2", [(1, 0, 3, 1), (3, 1, 25, 2), (2, 1, 25, 2), (3, 1, 60, 0)])
def test_reference_pairs(n1, l1, n2, l2):
    assert radial_integral(n1, l1, n2, l2) == pytest.approx(quad_radial(n1, l1, n2, l2), rel=1e-8)


def test_high_n_finite():
    for n in (100, 150, 200):
        v = radial_integral(3, 1, n, 2)
        assert math.isfinite(v) and v != 0
    assert math.isfinite(radial_integral(199, 198, 200, 199))


@pytest.mark.parametrize("args", [(3, 1, 25, 3), (3, 1, 25, 1), (5, 1, 5, 2), (3, 3, 25, 2), (0, 0, 2, 1)])
def test_radial_rejects(args):
    with pytest.raises(ValueError):
        radial_integral(*args)


def _angular_quadrature(l1, l2, m):
    x, w = np.polynomial.legendre.leggauss(80)
    norm = lambda l: math.sqrt((2 * l + 1) / (4 * math.pi) * factorial(l - abs(m)) / factorial(l + abs(m)))  # noqa: E731,E741
    integral = 2 * math.pi * np.sum(w * lpmv(abs(m), l1, x) * lpmv(abs(m), l2, x) * x)
    return (norm(l1) * norm(l2) * integral) ** 2


@pytest.mark.parametrize("l1,l2,m", [(0, 1, 0), (1, 2, 0), (1, 0, 0), (2, 3, 1), (5, 4, -3), (7, 8, 7)])
def test_angular_against_sphere_integral(l1, l2, m):
    assert angular_factor(l1, m, l2, m) == pytest.approx(_angular_quadrature(l1, l2, m), rel=1e-12)


def test_angular_known_values():
    assert angular_factor(0, 0, 1, 0) == pytest.approx(1 / 3)
    assert angular_factor(1, 0, 2, 0) == pytest.approx(4 / 15)
    assert angular_factor(1, 0, 2, 1) == 0.0
    with pytest.raises(ValueError):
        angular_factor(1, 0, 2, 0, "x")


def test_einstein_b_definition():
    lo, up = StateLabel(1, 0, 0), StateLabel(3, 1, 0)
    d = e * 2 * a0 * abs(radial_integral(1, 0, 3, 1)) / math.sqrt(3)
    assert dipole_moment(lo, up) == pytest.approx(d, rel=1e-13)
    assert einstein_B(lo, up) == pytest.approx(math.pi * d * d / (8.8541878128e-12 * hbar**2), rel=1e-9)


def test_b3n_large_n_exponent():
    ns = np.arange(20, 61)
    B = [einstein_B(StateLabel(3, 1, 0), StateLabel(int(n), 2, 0)) for n in ns]
    slope = np.polyfit(np.log(ns), np.log(B), 1)[0]
    assert slope == pytest.approx(-3.0, abs=0.1)


def test_band_b_per_sublevel():
    assert band_B(25) * 625 == pytest.approx(einstein_B(StateLabel(3, 1, 0), StateLabel(25, 2, 0)))


def test_lineshape_unit_area():
    env = Environment()
    w0 = line_omega(1, 3)
    spec = transition_spec(StateLabel(1, 0, 0), StateLabel(3, 1, 0), env)
    grid = np.linspace(w0 * (1 - 1e-3), w0 * (1 + 1e-3), 20001)
    fwhm = 2 * math.sqrt(2 * math.log(2)) * w0 * env.v_perp / 299792458.0
    g = doppler_lineshape(grid, w0, fwhm)
    assert np.trapezoid(g, grid) == pytest.approx(1.0, rel=1e-8)
    assert cross_section_13(w0, env) == pytest.approx(spec.cross_section_peak, rel=1e-12)
    assert cross_section_13(w0 * (1 + 2e-4), env) < spec.cross_section_peak


def test_band_cross_section_flat_and_positive():
    env = Environment()
    w = line_omega(3, 25) * np.array([0.999, 1.0, 1.001])
    s = cross_section_3n(w, env, 25)
    assert np.all(s > 0)
    assert s[2] / s[0] == pytest.approx(w[2] / w[0])
    with pytest.raises(ValueError):
        cross_section_3n(-1.0, env, 25)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 120), st.data())
def test_radial_symmetry(n1, data):
    l1 = data.draw(st.integers(0, n1 - 1))
    l2 = data.draw(st.sampled_from([x for x in (l1 - 1, l1 + 1) if x >= 0]))
    n2 = data.draw(st.integers(l2 + 1, 120).filter(lambda k: k != n1))
    a = radial_integral(n1, l1, n2, l2)
    assert a == radial_integral(n2, l2, n1, l1)
    assert math.isfinite(a)
    # bounded by the larger orbit size
    assert abs(a) < 1.5 * max(n1, n2) ** 2


@settings(max_examples=40)
@given(st.integers(0, 30), st.data())
def test_angular_sum_rule(l, data):  # noqa: E741
    m = data.draw(st.integers(-l, l))
    total = angular_factor(l, m, l + 1, m) + (angular_factor(l, m, l - 1, m) if abs(m) <= l - 1 else 0.0)
    # cos(theta) Y_lm has unit norm spread over l +- 1: sum |<l'|cos|l>|^2 = <l m|cos^2|l m>
    cos2 = (2 * l * l + 2 * l - 1 - 2 * m * m) / ((2 * l - 1) * (2 * l + 3)) if l > 0 else 1 / 3
    assert total == pytest.approx(cos2, rel=1e-12)
