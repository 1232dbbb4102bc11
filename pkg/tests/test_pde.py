import numpy as np
import pytest

from slepf.exact_pf import PATTERN_NESTED, PATTERN_SEP, z_four, z_pair
from slepf.pde import (asy_check, martingale_check, mobius_check,
                       pde_residual, random_mobius)

PTS4 = (0.0, 1.0, 2.0, 4.0)


def test_pde_residual_exact_solutions():
    for kappa in (3.0, 4.0, 6.0):
        f2 = lambda q, k=kappa: z_pair(k, q[0], q[1])
        assert abs(pde_residual(f2, kappa, 0, (0.0, 1.0))) < 1e-6
        assert abs(pde_residual(f2, kappa, 1, (0.0, 1.0))) < 1e-6
        for alpha in (PATTERN_SEP, PATTERN_NESTED):
            f4 = lambda q, k=kappa, a=alpha: z_four(k, a, q)
            for i in range(4):
                assert abs(pde_residual(f4, kappa, i, PTS4)) < 1e-4


def test_pde_residual_negative_control():
    # a bare product of two-point functions is not a solution
    def control(q):
        return abs(q[1] - q[0]) ** -1.0 * abs(q[3] - q[2]) ** -1.0

    worst = max(abs(pde_residual(control, 3.0, i, PTS4)) for i in range(4))
    assert worst > 1e-2


def test_pde_residual_order_of_convergence():
    f = lambda q: z_four(3.0, PATTERN_SEP, q)
    r1 = pde_residual(f, 3.0, 1, PTS4, step=2e-3, richardson=False)
    r2 = pde_residual(f, 3.0, 1, PTS4, step=1e-3, richardson=False)
    assert abs(r1) / abs(r2) == pytest.approx(4.0, rel=0.25)


def test_mobius_identity_and_random_maps():
    f = lambda q: z_four(4.0, PATTERN_SEP, q)
    assert mobius_check(f, 4.0, (1.0, 0.0, 0.0, 1.0), PTS4) < 1e-15
    rng = np.random.default_rng(11)
    for _ in range(30):
        coeffs = random_mobius(rng, PTS4)
        assert mobius_check(f, 4.0, coeffs, PTS4) < 1e-10
        f2 = lambda q: z_pair(5.0, q[0], q[1])
        c2 = random_mobius(rng, (0.0, 1.0))
        assert mobius_check(f2, 5.0, c2, (0.0, 1.0)) < 1e-10


def test_mobius_check_rejects_order_breaking_map():
    f = lambda q: z_pair(3.0, q[0], q[1])
    # pole between the points
    with pytest.raises(ValueError):
        mobius_check(f, 3.0, (0.0, -1.0, 1.0, -0.5), (0.0, 1.0))


@pytest.mark.parametrize("alpha,j,target", [
    (PATTERN_SEP, 1, lambda q: z_pair(3.0, q[2], q[3])),
    (PATTERN_SEP, 2, None),
    (PATTERN_NESTED, 1, None),
    (PATTERN_NESTED, 2, lambda q: z_pair(3.0, q[0], q[3])),
    (PATTERN_SEP, 3, lambda q: z_pair(3.0, q[0], q[1])),
    (PATTERN_NESTED, 3, None),
])
def test_asy_all_cases(alpha, j, target):
    f = lambda q: z_four(3.0, alpha, q)
    res = asy_check(f, 3.0, j, np.asarray(PTS4))
    want = target(PTS4) if target else 0.0
    assert res.limit == pytest.approx(want, abs=1e-4 * max(1.0, abs(want)))


def test_asy_wraparound_consistency():
    # j = 2N variant: x1 -> -inf, x4 -> +inf, Z * (x4-x1)^{2h} -> Z_{alpha-hat}
    kappa, h = 3.0, 0.5
    for big in (1e3, 1e4):
        pts = (-big, 1.0, 2.0, big)
        v = z_four(kappa, PATTERN_NESTED, pts) * (2 * big) ** (2 * h)
        assert v == pytest.approx(z_pair(kappa, 1.0, 2.0), rel=5e-3)
        v0 = z_four(kappa, PATTERN_SEP, pts) * (2 * big) ** (2 * h)
        assert v0 < 1e-2


def test_martingale_zero_drift_and_control():
    kappa = 3.0
    res = martingale_check(kappa, lambda q: z_pair(kappa, q[0], q[1]),
                           (0.0, 1.0), 0, 0.2, 4000, 5)
    assert abs(res.z_score) < 3.5

    def bad(q):
        return z_four(kappa, PATTERN_SEP, q) * (1.0 + 0.1 * q[0])

    resb = martingale_check(kappa, bad, (0.0, 0.3, 0.6, 1.2), 0, 0.2, 10000, 100,
                            dt_cap=5e-5, truncation_radius=0.04)
    assert abs(resb.z_score) > 3.0
