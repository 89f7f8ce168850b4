import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewec import (AlphaAbs, Constant, Linear, LinearForm, Rational, RationalModulation, RationalOdd, SecDensity,
                    SumOddCubic, SymmetricCdf, baseline_density, eval_w, g0_cdf, sec_density, standard_bivariate)
from skewec import EllipticalBaseline, StudentT
from skewec.errors import ParameterError

from conftest import bivariate

G0S = list(SymmetricCdf)
finite = st.floats(-50, 50, allow_nan=False)


@pytest.mark.parametrize("g,t,want", [
    (SymmetricCdf.STANDARD_CAUCHY, 0.0, 0.5),
    (SymmetricCdf.STANDARD_CAUCHY, 1.0, 0.75),
    (SymmetricCdf.LOGISTIC, 0.0, 0.5),
])
def test_g0_values(g, t, want):
    assert g0_cdf(g, t) == pytest.approx(want, abs=1e-15)


def test_normal_quantile_point():
    assert g0_cdf(SymmetricCdf.STANDARD_NORMAL, 1.959964) == pytest.approx(0.975, abs=1e-6)


def test_normal_cdf_against_mpmath():
    mpmath.mp.dps = 40
    for t in np.linspace(-30, 8, 77):
        ref = float(mpmath.ncdf(t))
        assert abs(g0_cdf(SymmetricCdf.STANDARD_NORMAL, t) - ref) <= 1e-14 * ref


@pytest.mark.parametrize("g", G0S)
def test_g0_symmetry_grid(g):
    t = np.linspace(-50, 50, 2001)
    assert np.max(np.abs(g.cdf(-t) - (1 - g.cdf(t)))) <= 1e-14


@pytest.mark.parametrize("g", G0S)
def test_ppf_inverts_cdf(g):
    u = np.linspace(0.01, 0.99, 99)
    np.testing.assert_allclose(g.cdf(g.ppf(u)), u, atol=1e-13)


def test_parse_g0():
    assert SymmetricCdf.parse("Cauchy") is SymmetricCdf.STANDARD_CAUCHY
    with pytest.raises(ParameterError):
        SymmetricCdf.parse("gumbel")


@pytest.mark.parametrize("coeffs", [(1, 0, 1, -0.1), (1, 0, 1, 0.25), (1, 0, 2, 0.5), (1, 0, 0, 1)])
def test_rational_denominator_guard(coeffs):
    # b2 < 0, a real root, or b2 = 0 with b1 != 0
    if coeffs == (1, 0, 0, 1):
        Rational(*coeffs)
        return
    with pytest.raises(ParameterError):
        Rational(*coeffs)


def test_rational_odd_guard():
    with pytest.raises(ParameterError):
        RationalOdd(1.0, -0.5, 0.0)


@settings(max_examples=200)
@given(c1=st.floats(-5, 5), c2=st.floats(0, 5), c3=st.floats(-5, 5), u=finite)
def test_w0_exactly_odd(c1, c2, c3, u):
    f = RationalOdd(c1, c2, c3)
    assert f(-u) == -f(u)


@settings(max_examples=100)
@given(coeffs=st.lists(st.floats(-3, 3), min_size=2, max_size=2), u=st.lists(finite, min_size=2, max_size=2))
def test_multivariate_odd_maps(coeffs, u):
    u = np.array(u)
    for f in (LinearForm(tuple(coeffs)), SumOddCubic(tuple(coeffs))):
        assert f(-u) == -f(u)


def test_w_at_conditional_mean():
    s = bivariate(0.5, Constant(1.0), standardized=True)
    assert eval_w(s, 0.0, 0.0) == 0.0


def test_w_linear_h_direct():
    s = bivariate(0.0, Linear(2.0))
    assert eval_w(s, 1.0, 3.0) == pytest.approx(6.0, rel=1e-15)


def test_w_rational_hand_value():
    rm = RationalModulation(1, 0, 0, 0.5, 1, 0, 0, standardized=True)
    s = SecDensity.from_rational(standard_bivariate(0.5), SymmetricCdf.STANDARD_NORMAL, rm)
    want = (0.5 / math.sqrt(0.75)) * 2 / 1.5
    assert eval_w(s, 1.0, 1.0) == pytest.approx(want, rel=1e-14)
    assert want == pytest.approx(0.7698, abs=1e-4)


def test_density_composition_cauchy():
    rm = RationalModulation(1, 0, 0, 0.5, 1, 0, 0, standardized=True)
    b = standard_bivariate(0.5)
    s = SecDensity.from_rational(b, SymmetricCdf.STANDARD_CAUCHY, rm)
    w = (0.5 / math.sqrt(0.75)) * 2 / 1.5
    want = 2 * baseline_density(b, [1.0, 1.0]) * (0.5 + math.atan(w) / math.pi)
    assert sec_density(s, 1.0, 1.0) == pytest.approx(want, rel=1e-14)


def test_origin_value():
    s = bivariate(0.0, Linear(1.0))
    assert sec_density(s, 0.0, 0.0) == pytest.approx(1 / (2 * math.pi), rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(rho=st.floats(-0.9, 0.9), x=finite, y=finite, g=st.sampled_from(G0S))
def test_null_modulation_is_baseline(rho, x, y, g):
    b = standard_bivariate(rho, StudentT(3.0))
    s = SecDensity(b, g, Rational(1, 0.5, 0, 1), RationalOdd(0.0, 0.0, 0.0))
    f0 = baseline_density(b, [x, y])
    assert abs(sec_density(s, x, y) - f0) <= 1e-15 * f0


def test_h_catalog_values():
    x = np.array([-2.0, 0.0, 3.0])
    np.testing.assert_array_equal(AlphaAbs(0.5)(x[:, None]), [1.0, 0.0, 1.5])
    np.testing.assert_array_equal(Constant(2.0)(x[:, None]), [2.0, 2.0, 2.0])
    np.testing.assert_allclose(Rational(1, 1, 0, 1)(x[:, None]), [3 / 5, 1.0, 13 / 10])


def test_h_with_direction():
    h = Linear(2.0, direction=(1.0, -1.0))
    np.testing.assert_allclose(h(np.array([[3.0, 1.0]])), [4.0])


def test_m2_density_dimension_check():
    b = EllipticalBaseline(np.zeros(3), np.eye(3), m=2)
    with pytest.raises(ParameterError):
        SecDensity(b, SymmetricCdf.LOGISTIC, Constant(1.0), RationalOdd())
    s = SecDensity(b, SymmetricCdf.LOGISTIC, Constant(1.0), SumOddCubic((1.0, 0.5)))
    assert s.pdf(np.zeros((1, 3)))[0] == pytest.approx(baseline_density(b, [0, 0, 0]), rel=1e-15)


def test_eval_w_shape_mismatch():
    s = bivariate(0.3, Constant(1.0))
    with pytest.raises(ParameterError):
        eval_w(s, np.zeros(3), np.zeros(4))
