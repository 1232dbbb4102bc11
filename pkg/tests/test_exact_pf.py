import math

import numpy as np
import pytest

from slepf.exact_pf import (PATTERN_NESTED, PATTERN_SEP, c_kappa,
                            pfaffian_form, transport_polygon, z_empty,
                            z_four, z_pair, z_total, z_value)
from slepf.linkpat import LinkPattern
from slepf.params import derive_params
from slepf.specfun import rect_corner_images


def test_z_pair_examples():
    assert z_pair(6.0, 0.0, 2.0) == 1.0
    assert z_pair(3.0, 0.0, 2.0) == pytest.approx(0.5, abs=1e-15)
    assert z_pair(2.0, 0.0, 1.0) == 1.0
    assert z_empty() == 1.0
    with pytest.raises(ValueError):
        z_pair(3.0, 2.0, 1.0)


def test_z_four_kappa4_closed_form():
    # at kappa=4 the hypergeometric factor is identically one
    val = z_four(4.0, PATTERN_SEP, (0.0, 1.0, 2.0, 3.0))
    assert val == pytest.approx(math.sqrt(0.75), rel=1e-14)


def test_z_four_collapse_limits():
    kappa, h = 3.0, 0.5
    for d in (1e-3, 1e-4):
        pts = (1.0, 1.0 + d, 2.0, 4.0)
        lim = z_four(kappa, PATTERN_SEP, pts) * d ** (2 * h)
        assert lim == pytest.approx(z_pair(kappa, 2.0, 4.0), rel=5e-3)
        ratio = z_four(kappa, PATTERN_NESTED, pts) * d ** (2 * h)
        assert ratio < 10 * d ** (2 / kappa + 2 * h) * 5


def test_z_four_positive_for_all_kappa():
    rng = np.random.default_rng(0)
    for kappa in (0.5, 2.0, 3.0, 4.0, 6.0, 7.5):
        for _ in range(10):
            xs = np.sort(rng.uniform(-3, 3, 4))
            if np.diff(xs).min() < 0.05:
                continue
            assert z_four(kappa, PATTERN_SEP, xs) > 0
            assert z_four(kappa, PATTERN_NESTED, xs) > 0
    with pytest.raises(ValueError):
        z_four(8.0, PATTERN_SEP, (0, 1, 2, 3))


def test_c_kappa_table():
    assert c_kappa(4.0) == pytest.approx(1.0, abs=1e-13)
    assert c_kappa(8.0) == 0.0
    assert c_kappa(6.0) == pytest.approx(0.56605, abs=5e-6)
    assert c_kappa(3.0) > 1.0
    assert 0.0 < c_kappa(5.0) < 1.0


def test_z_total_and_pfaffian():
    assert z_total(3.0, ()) == 1.0
    assert z_total(3.0, (0.0, 2.0)) == z_pair(3.0, 0.0, 2.0)
    pts = (0.0, 1.0, 2.0, 4.0)
    assert pfaffian_form(pts) == pytest.approx(1 * 0.5 - 0.5 / 3 + 0.25, abs=1e-14)
    assert z_total(3.0, pts) == pytest.approx(pfaffian_form(pts), rel=1e-12)
    with pytest.raises(ValueError):
        z_total(3.0, tuple(range(6)))


def test_z_total_reflection_symmetry():
    pts = np.array([0.0, 1.0, 2.0, 4.0])
    refl = tuple(np.sort(-pts))
    assert z_total(3.0, pts) == pytest.approx(z_total(3.0, refl), rel=1e-12)


def test_z_value_dispatch():
    assert z_value(3.0, LinkPattern(()), ()) == 1.0
    assert z_value(3.0, LinkPattern(((1, 2),)), (0.0, 2.0)) == 0.5
    with pytest.raises(ValueError):
        z_value(3.0, LinkPattern(((1, 2), (3, 4), (5, 6))), tuple(range(6)))


def test_transport_polygon_scaling_covariance():
    # Z(x) = prod |f'(x_i)|^h Z(f(x)) with f(x) = lam x
    kappa = 3.0
    pts = np.array([0.0, 1.0, 2.0, 4.0])
    lam = 1.7
    full = transport_polygon(kappa, PATTERN_SEP, lam * pts,
                             derivative_factors=[lam] * 4)
    assert full == pytest.approx(z_four(kappa, PATTERN_SEP, pts), rel=1e-12)
    # identity map leaves values unchanged
    same = transport_polygon(kappa, PATTERN_SEP, pts, derivative_factors=[1.0] * 4)
    assert same == pytest.approx(z_four(kappa, PATTERN_SEP, pts), rel=1e-14)


def test_transport_polygon_square_ratio():
    corners = rect_corner_images(1.0)
    for alpha in (PATTERN_SEP, PATTERN_NESTED):
        ratio = transport_polygon(3.0, alpha, corners)
        assert ratio == pytest.approx(0.5, abs=1e-10)
