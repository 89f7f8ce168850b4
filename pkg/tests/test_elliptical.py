import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from skewec import EllipticalBaseline, Normal, StudentT, baseline_density, baseline_sample, conditional_moments
from skewec import standard_bivariate
from skewec.errors import NotPositiveDefiniteError, ParameterError

SIG3 = np.array([[2.0, 0.3, 0.5], [0.3, 1.0, 0.2], [0.5, 0.2, 1.5]])
MU3 = np.array([0.5, -1.0, 2.0])


def test_standard_normal_origin():
    b = standard_bivariate(0.0)
    assert baseline_density(b, [0.0, 0.0]) == pytest.approx(1 / (2 * math.pi), rel=1e-15)


@pytest.mark.parametrize("rho", [-0.9, 0.0, 0.4])
def test_normal_matches_scipy(rho, rng):
    b = standard_bivariate(rho)
    pts = rng.normal(size=(50, 2)) * 2
    ref = stats.multivariate_normal([0, 0], [[1, rho], [rho, 1]]).pdf(pts)
    np.testing.assert_allclose(b.pdf(pts), ref, rtol=1e-12)


@pytest.mark.parametrize("dof", [1.0, 3.0, 7.5])
def test_student_t_matches_scipy(dof, rng):
    b = EllipticalBaseline(MU3, SIG3, StudentT(dof), m=1)
    pts = MU3 + rng.standard_cauchy(size=(40, 3))
    ref = stats.multivariate_t(MU3, SIG3, df=dof).pdf(pts)
    np.testing.assert_allclose(b.pdf(pts), ref, rtol=1e-11)


def test_conditional_d3_against_explicit_inverse():
    b = EllipticalBaseline(MU3, SIG3, Normal(), m=1)
    s11 = SIG3[:2, :2]
    det = s11[0, 0] * s11[1, 1] - s11[0, 1] ** 2
    inv = np.array([[s11[1, 1], -s11[0, 1]], [-s11[0, 1], s11[0, 0]]]) / det
    beta = SIG3[2, :2] @ inv
    cm = conditional_moments(b)
    np.testing.assert_allclose(np.ravel(cm.beta), beta, rtol=1e-13)
    assert np.ravel(cm.beta0)[0] == pytest.approx(MU3[2] - beta @ MU3[:2], rel=1e-13)
    assert np.ravel(cm.sigma22_1)[0] == pytest.approx(SIG3[2, 2] - beta @ SIG3[:2, 2], rel=1e-13)


def test_block_reconstruction():
    b = EllipticalBaseline(MU3, SIG3, Normal(), m=2)
    cm = b.conditional
    beta = np.atleast_2d(cm.beta)
    s11 = SIG3[:1, :1]
    np.testing.assert_allclose(beta @ s11, SIG3[1:, :1], atol=1e-12)
    np.testing.assert_allclose(cm.sigma22_1 + beta @ s11 @ beta.T, SIG3[1:, 1:], atol=1e-12)


def test_gaussian_conditional_density(rng):
    # f(x, y) / f_X(x) is the N(m_Y(x), sigma22.1) density
    b = standard_bivariate(0.6)
    x, y = 0.7, -0.4
    ratio = b.pdf([x, y]) / b.x_marginal.pdf(np.array([[x]]))[0]
    assert ratio == pytest.approx(stats.norm(0.6 * x, math.sqrt(1 - 0.36)).pdf(y), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(rho=st.floats(-0.95, 0.95), dof=st.sampled_from([None, 2.0, 5.0]),
       x=st.floats(-20, 20), y=st.floats(-20, 20))
def test_central_symmetry(rho, dof, x, y):
    b = standard_bivariate(rho, Normal() if dof is None else StudentT(dof))
    assert b.pdf([x, y]) == b.pdf([-x, -y])


def test_normalization_normal():
    b = standard_bivariate(0.5)
    val, _ = integrate.dblquad(lambda y, x: b.pdf([x, y]), -10, 10, -10, 10, epsabs=1e-11)
    assert abs(val - 1) < 1e-8


def test_normalization_t3():
    b = standard_bivariate(-0.3, StudentT(3.0))
    val, _ = integrate.dblquad(lambda y, x: b.pdf([x, y]), -60, 60, -60, 60, epsabs=1e-10)
    assert abs(val - 1) < 1e-4


@pytest.mark.parametrize("sigma", [
    [[1.0, 1.0], [1.0, 1.0]],
    [[1.0, 2.0], [2.0, 1.0]],
    [[-1.0, 0.0], [0.0, 1.0]],
])
def test_not_positive_definite(sigma):
    with pytest.raises(NotPositiveDefiniteError):
        EllipticalBaseline(np.zeros(2), np.array(sigma))


@pytest.mark.parametrize("kwargs", [
    dict(mu=np.zeros(3), sigma=np.eye(2)),
    dict(mu=np.zeros(2), sigma=np.array([[1.0, 0.2], [0.3, 1.0]])),
    dict(mu=np.zeros(2), sigma=np.eye(2), m=2),
    dict(mu=np.array([0.0, np.nan]), sigma=np.eye(2)),
])
def test_invalid_baselines(kwargs):
    with pytest.raises(ParameterError):
        EllipticalBaseline(**kwargs)


def test_bad_dof_and_rho():
    with pytest.raises(ParameterError):
        StudentT(0.0)
    with pytest.raises(ParameterError):
        standard_bivariate(1.0)


def test_sample_moments():
    b = EllipticalBaseline(MU3, SIG3, Normal(), m=1)
    batch = baseline_sample(b, 200_000, 3)
    assert batch.flip_count == 0
    np.testing.assert_allclose(batch.points.mean(axis=0), MU3, atol=0.02)
    np.testing.assert_allclose(np.cov(batch.points.T), SIG3, atol=0.03)


def test_t_sample_ks():
    b = standard_bivariate(0.0, StudentT(4.0))
    pts = baseline_sample(b, 50_000, 9).points
    assert stats.kstest(pts[:, 0], stats.t(4).cdf).pvalue > 1e-4


def test_sample_seeded():
    b = standard_bivariate(0.2)
    a1 = baseline_sample(b, 100, 5).points
    a2 = baseline_sample(b, 100, 5).points
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, baseline_sample(b, 100, 6).points)
