import numpy as np
import pytest

from slepf.coulomb import coulomb_n1, coulomb_n2
from slepf.exact_pf import PATTERN_NESTED, PATTERN_SEP, z_four, z_pair
from slepf.linkpat import LinkPattern

CONFIGS = [(0.0, 1.0, 2.0, 3.0), (0.0, 1.0, 2.0, 4.0), (-1.3, 0.2, 0.9, 3.3)]


def test_n1_beta_identity():
    # the normalized single integral reproduces the two-point function
    assert coulomb_n1(6.0, 0.0, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert coulomb_n1(5.0, 0.0, 2.0) == pytest.approx(2.0 ** (-0.2), rel=1e-12)
    for kappa in (4.3, 5.5, 7.2):
        for (a, b) in ((0.0, 1.0), (-2.0, 1.5)):
            assert coulomb_n1(kappa, a, b) == pytest.approx(
                z_pair(kappa, a, b), rel=1e-10)


def test_n1_scaling():
    kappa, lam = 5.0, 2.7
    v = coulomb_n1(kappa, 0.0, 1.5)
    assert coulomb_n1(kappa, 0.0, lam * 1.5) == pytest.approx(
        lam ** ((kappa - 6) / kappa) * v, rel=1e-10)


def test_range_guard():
    with pytest.raises(ValueError):
        coulomb_n1(4.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        coulomb_n1(3.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        coulomb_n2(8.0, PATTERN_SEP, (0, 1, 2, 3))


@pytest.mark.parametrize("kappa", [4.5, 5.0, 6.5, 7.0])
@pytest.mark.parametrize("alpha", [PATTERN_SEP, PATTERN_NESTED])
def test_n2_matches_hypergeometric(kappa, alpha):
    for pts in CONFIGS:
        v = coulomb_n2(kappa, alpha, pts)
        assert v == pytest.approx(z_four(kappa, alpha, pts), rel=1e-6)


def test_n2_at_resonant_kappa6():
    # the contour pair degenerates at kappa=6; continuation in kappa fills it
    for pts in CONFIGS:
        for alpha in (PATTERN_SEP, PATTERN_NESTED):
            v = coulomb_n2(6.0, alpha, pts)
            assert v == pytest.approx(z_four(6.0, alpha, pts), rel=1e-6)


def test_n2_asy_consistency():
    # collapse of the first pair reduces to the one-variable integral
    kappa, h = 5.0, (6 - 5.0) / 10.0
    vals = []
    deltas = (1e-2, 5e-3, 2.5e-3)
    for d in deltas:
        pts = (0.0, d, 2.0, 3.0)
        vals.append(coulomb_n2(kappa, PATTERN_SEP, pts) * d ** (2 * h))
    want = coulomb_n1(kappa, 2.0, 3.0)
    # Richardson with the leading correction exponent (8-kappa)/kappa = 0.6
    q = 2.0 ** 0.6 - 1.0
    e1 = vals[1] + (vals[1] - vals[0]) / q
    e2 = vals[2] + (vals[2] - vals[1]) / q
    extrap = e2 + (e2 - e1) / (2.0 ** 1.2 - 1.0)
    assert extrap == pytest.approx(want, rel=1e-3)


def test_n2_rejects_other_patterns():
    with pytest.raises(ValueError):
        coulomb_n2(5.0, LinkPattern(((1, 2),)), (0.0, 1.0, 2.0, 3.0))
