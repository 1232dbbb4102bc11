import math

import numpy as np
import pytest
from scipy.special import ellipk, hyp2f1

from slepf.specfun import (agm, beta_fn, elliptic_k, gamma_fn, gauss_2f1,
                           log_gamma, pfaffian, rect_corner_images)


def test_gamma_basics():
    assert gamma_fn(1.0) == 1.0
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    with pytest.raises(ValueError):
        gamma_fn(-2.0)
    for a in np.arange(0.1, 1.0, 0.1):
        assert beta_fn(a, a) == pytest.approx(
            gamma_fn(a) ** 2 / gamma_fn(2 * a), rel=1e-12)


def test_2f1_trivial_cases():
    assert gauss_2f1(0.7, 1.3, 2.2, 0.0) == 1.0
    assert gauss_2f1(1.0, 0.0, 2.0, 0.73) == 1.0       # b = 0 truncates
    # negative-integer a terminates the series for any z
    assert gauss_2f1(-2.0, 0.5, 1.5, 0.9) == pytest.approx(
        float(hyp2f1(-2, 0.5, 1.5, 0.9)), rel=1e-13)


def test_2f1_series_vs_connection_consistency():
    # the two evaluation routes must agree where both are usable
    for kappa in (2.5, 3.0, 4.0, 5.0, 6.5):
        a, b, c = 4 / kappa, 1 - 4 / kappa, 8 / kappa
        for z in np.linspace(0.45, 0.55, 7):
            from slepf.specfun import _series_2f1
            direct = _series_2f1(a, b, c, z)
            assert gauss_2f1(a, b, c, z) == pytest.approx(direct, rel=1e-10)


def test_2f1_against_scipy():
    rng = np.random.default_rng(1)
    for _ in range(60):
        kappa = rng.uniform(1.2, 7.9)
        a, b, c = 4 / kappa, 1 - 4 / kappa, 8 / kappa
        z = rng.uniform(0.0, 0.999)
        assert gauss_2f1(a, b, c, z) == pytest.approx(
            float(hyp2f1(a, b, c, z)), rel=1e-11)


def test_2f1_at_one():
    kappa = 5.0
    a, b, c = 4 / kappa, 1 - 4 / kappa, 8 / kappa
    want = gamma_fn(c) * gamma_fn(c - a - b) / (gamma_fn(c - a) * gamma_fn(c - b))
    assert gauss_2f1(a, b, c, 1.0) == pytest.approx(want, rel=1e-12)
    # divergence at kappa = 8: c - a - b = 0
    assert math.isinf(gauss_2f1(0.5, 0.5, 1.0, 1.0))


def test_pfaffian_small():
    assert pfaffian(np.zeros((0, 0))) == 1.0
    assert pfaffian([[0.0, 1.7], [-1.7, 0.0]]) == pytest.approx(1.7)
    a = np.array([[0, 1, 2, 3], [-1, 0, 4, 5], [-2, -4, 0, 6], [-3, -5, -6, 0]], float)
    assert pfaffian(a) == pytest.approx(1 * 6 - 2 * 5 + 3 * 4)


def test_pfaffian_squares_to_determinant():
    rng = np.random.default_rng(3)
    for n in (2, 4, 6, 8):
        for _ in range(10):
            m = rng.normal(size=(n, n))
            a = m - m.T
            assert pfaffian(a) ** 2 == pytest.approx(np.linalg.det(a), rel=1e-9)


def test_pfaffian_rejects_nonantisymmetric():
    with pytest.raises(ValueError):
        pfaffian(np.eye(4))
    with pytest.raises(ValueError):
        pfaffian(np.zeros((3, 3)))


def test_elliptic_k_vs_scipy():
    for k in (0.01, 0.2, 0.5, 0.8, 0.99):
        assert elliptic_k(k) == pytest.approx(float(ellipk(k * k)), rel=1e-13)
    assert agm(1.0, 1.0) == 1.0


def test_rect_corner_images_square():
    x = rect_corner_images(1.0)
    k = 1.0 / x[3]
    assert k == pytest.approx((math.sqrt(2) - 1) ** 2, abs=1e-12)
    cr = (x[1] - x[0]) * (x[3] - x[2]) / ((x[3] - x[1]) * (x[2] - x[0]))
    assert cr == pytest.approx(0.5, abs=1e-10)


def test_rect_corner_images_half_aspect():
    # K'/K = 1 iff k = 1/sqrt(2), corners (-sqrt2, -1, 1, sqrt2)
    x = rect_corner_images(0.5)
    assert x[3] == pytest.approx(math.sqrt(2.0), abs=1e-10)


def test_rect_cross_ratio_degenerates():
    # the cross-ratio runs from 0 to 1 as the rectangle degenerates from
    # wide-flat to tall-thin, through 1/2 at the square
    def cross_ratio(r):
        x = rect_corner_images(r)
        return (x[1] - x[0]) * (x[3] - x[2]) / ((x[3] - x[1]) * (x[2] - x[0]))

    assert cross_ratio(0.1) < cross_ratio(0.5) < cross_ratio(1.0) < cross_ratio(2.0)
    assert cross_ratio(0.06) < 1e-6
    assert cross_ratio(15.0) > 1 - 1e-6
    with pytest.raises(ValueError):
        rect_corner_images(0.01)
