import math

import numpy as np
import pytest

from slepf.ising import (BatchedIsingChains, IsingChain, IsingConfig,
                         beta_critical, boundary_image, boundary_signs,
                         corner_marks, crossing_experiment,
                         predicted_corner_probs, trace_interfaces)
from slepf.linkpat import LinkPattern

A_BOTTOM_TOP = LinkPattern(((1, 2), (3, 4)))
A_LEFT_RIGHT = LinkPattern(((1, 4), (2, 3)))


def _cfg(size=12, **kw):
    base = dict(width=size, height=size, marks=corner_marks(size, size),
                samples=10, seed=0)
    base.update(kw)
    return IsingConfig(**base)


def test_beta_critical_self_dual():
    assert math.sinh(2 * beta_critical()) == pytest.approx(1.0, abs=1e-15)
    assert beta_critical() > 0


def test_boundary_signs_alternate():
    cfg = _cfg(8)
    signs = boundary_signs(cfg)
    assert signs[0, 1:-1].min() == signs[0, 1:-1].max() == 1      # bottom plus
    assert signs[3, -1] == -1                                     # right minus
    assert signs[-1, 3] == 1                                      # top plus
    assert signs[3, 0] == -1                                      # left minus
    assert np.all(signs[1:-1, 1:-1] == 0)


def test_validation():
    with pytest.raises(ValueError):
        IsingConfig(width=8, height=8, marks=(0, 3, 5), samples=1).validate()
    with pytest.raises(ValueError):
        IsingConfig(width=8, height=8, marks=(0, 999), samples=1).validate()


def test_infinite_temperature_spins_are_uniform():
    cfg = _cfg(16, beta=0.0)
    chain = IsingChain(cfg, np.random.default_rng(1))
    tot = 0.0
    n = 0
    for _ in range(60):
        chain.sweep(1)
        tot += chain.spins[1:-1, 1:-1].sum()
        n += (16 - 2) ** 2
    assert abs(tot / n) < 4 / math.sqrt(n)


def test_low_temperature_orders_to_boundary():
    # all-plus ring at 2*beta_c drives the interior magnetization near +1
    cfg = IsingConfig(width=16, height=16, marks=(0, 1), samples=1,
                      beta=2 * beta_critical())
    chain = IsingChain(cfg, np.random.default_rng(2))
    chain.frozen[:] = 0
    chain.frozen[0, :] = chain.frozen[-1, :] = 1
    chain.frozen[:, 0] = chain.frozen[:, -1] = 1
    chain.spins[0, :] = chain.spins[-1, :] = 1
    chain.spins[:, 0] = chain.spins[:, -1] = 1
    chain.sweep(300)
    assert chain.magnetization() > 0.9


def test_magnetization_order_across_criticality():
    mags = {}
    for fac in (0.9, 1.1):
        cfg = IsingConfig(width=32, height=32, marks=(0, 1), samples=1,
                          beta=fac * beta_critical())
        chain = IsingChain(cfg, np.random.default_rng(3))
        chain.frozen[:] = 0
        chain.frozen[0, :] = chain.frozen[-1, :] = 1
        chain.frozen[:, 0] = chain.frozen[:, -1] = 1
        chain.spins[0, :] = chain.spins[-1, :] = 1
        chain.spins[:, 0] = chain.spins[:, -1] = 1
        chain.sweep(500)
        m = np.mean([chain.sweep(5) is not None and chain.magnetization()
                     for _ in range(40)])
        mags[fac] = m
    assert mags[0.9] < mags[1.1]


def test_energy_equilibration_diagnostic():
    cfg = _cfg(24)
    chain = IsingChain(cfg, np.random.default_rng(4))
    chain.sweep(400)
    e1 = np.mean([chain.sweep(2) is not None and chain.energy_per_edge()
                  for _ in range(50)])
    chain.sweep(800)
    e2 = np.mean([chain.sweep(2) is not None and chain.energy_per_edge()
                  for _ in range(50)])
    assert abs(e1 - e2) / abs(e2) < 0.01


def test_trace_fixture_pairings():
    cfg = _cfg(10)
    frozen = boundary_signs(cfg)
    spins = frozen.copy()
    spins[1:-1, 1:-1] = 1        # interfaces hug the minus arcs (left, right)
    assert trace_interfaces(spins, cfg) == A_LEFT_RIGHT
    spins[1:-1, 1:-1] = -1       # interfaces hug the plus arcs (bottom, top)
    assert trace_interfaces(spins, cfg) == A_BOTTOM_TOP


def test_trace_always_planar_pairing():
    cfg = _cfg(16)
    chain = IsingChain(cfg, np.random.default_rng(5))
    chain.sweep(200)
    pats = set()
    for _ in range(200):
        chain.sweep(3)
        alpha = trace_interfaces(chain.spins, cfg)   # validates planarity
        pats.add(alpha)
    assert pats <= {A_BOTTOM_TOP, A_LEFT_RIGHT}
    assert len(pats) == 2


def test_dobrushin_always_single_pairing():
    cfg = IsingConfig(width=12, height=12, marks=(0, 12), samples=30,
                      n_chains=30, burn_in=60, seed=6)
    res = crossing_experiment(cfg)
    assert res.frequencies == {LinkPattern(((1, 2),)): 1.0}
    assert res.predicted == {LinkPattern(((1, 2),)): 1.0}


def test_predicted_corner_probs_square_symmetry():
    pred = predicted_corner_probs(33, 33)
    assert pred[A_BOTTOM_TOP] == pytest.approx(0.5, abs=1e-12)
    assert sum(pred.values()) == pytest.approx(1.0, abs=1e-12)
    # wide rectangle: left-right pairing through the short minus arcs wins
    pred_wide = predicted_corner_probs(65, 17)
    assert pred_wide[A_LEFT_RIGHT] > 0.9
    # and the tall rectangle is its mirror
    pred_tall = predicted_corner_probs(17, 65)
    assert pred_tall[A_BOTTOM_TOP] == pytest.approx(
        pred_wide[A_LEFT_RIGHT], rel=1e-10)


def test_batched_matches_scalar_distribution():
    cfg = _cfg(10)
    batch = BatchedIsingChains(cfg, 3000, seed=7)
    batch.sweep(300)
    p_batch = np.mean([trace_interfaces(batch.spins[i], cfg) == A_BOTTOM_TOP
                       for i in range(3000)])
    chain = IsingChain(cfg, np.random.default_rng(8))
    chain.sweep(300)
    hits = 0
    for _ in range(800):
        chain.sweep(10)
        hits += trace_interfaces(chain.spins, cfg) == A_BOTTOM_TOP
    p_scalar = hits / 800
    se = math.sqrt(0.25 / 3000 + 0.25 / 800 * 5)
    assert abs(p_batch - p_scalar) < 4 * se


def test_crossing_experiment_small_square():
    cfg = _cfg(16, samples=400, n_chains=400, burn_in=250, seed=9)
    res = crossing_experiment(cfg)
    assert res.n_samples == 400
    assert sum(res.frequencies.values()) == pytest.approx(1.0)
    assert set(res.frequencies) <= {A_BOTTOM_TOP, A_LEFT_RIGHT}
    assert res.max_abs_gap() < 0.12


def test_reflection_symmetry_of_empirical_law():
    # mirroring the lattice maps the two pairings onto each other; a wide
    # rectangle has strongly asymmetric frequencies that must mirror
    w, h = 48, 16
    cfg = IsingConfig(width=w, height=h, marks=corner_marks(w, h),
                      samples=400, n_chains=400, burn_in=300, seed=10)
    res = crossing_experiment(cfg, predict=False)
    cfg_t = IsingConfig(width=h, height=w, marks=corner_marks(h, w),
                        samples=400, n_chains=400, burn_in=300, seed=11)
    res_t = crossing_experiment(cfg_t, predict=False)
    p = res.frequencies.get(A_LEFT_RIGHT, 0.0)
    q = res_t.frequencies.get(A_BOTTOM_TOP, 0.0)
    se = 2 * math.sqrt(p * (1 - p) / 400 + max(q * (1 - q), 0.002) / 400)
    assert abs(p - q) <= 2 * se + 0.02


def test_boundary_image_matches_corners():
    r = 0.75
    from slepf.specfun import rect_corner_images
    x = rect_corner_images(r)
    k = 1.0 / x[3]
    assert boundary_image(r, "bottom", 0.0) == pytest.approx(-1.0, abs=1e-9)
    assert boundary_image(r, "bottom", 1.0) == pytest.approx(1.0, abs=1e-9)
    assert boundary_image(r, "right", 1.0) == pytest.approx(1.0 / k, rel=1e-9)
    assert boundary_image(r, "left", 0.0) == pytest.approx(-1.0 / k, rel=1e-9)
    assert boundary_image(r, "bottom", 0.5) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        boundary_image(r, "top", 0.5)
