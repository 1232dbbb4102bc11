"""Finite-difference verification of the defining properties of partition
functions: the null-state second-order PDEs, Moebius covariance, the collapse
asymptotics, and the Girsanov martingale property along a chordal chain."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .loewner import evolve_driftless_ensemble
from .params import derive_params

RICHARDSON_LEVELS = (1.0, 0.5, 0.25)


def _neville(ts, vals):
    """Polynomial extrapolation to t=0 of vals(t) sampled at ts."""
    p = [np.asarray(v, dtype=float) for v in vals]
    t = list(ts)
    n = len(p)
    for lev in range(1, n):
        p = [(t[i + lev] * p[i] - t[i] * p[i + 1]) / (t[i + lev] - t[i])
             for i in range(n - lev)]
    return p[0]


def _partial(f, pts, i, step):
    e = np.zeros_like(pts)
    e[i] = step
    return (f(pts + e) - f(pts - e)) / (2.0 * step)


def _partial2(f, pts, i, step):
    e = np.zeros_like(pts)
    e[i] = step
    return (f(pts + e) - 2.0 * f(pts) + f(pts - e)) / (step * step)


def pde_residual(f, kappa, i, pts, step=None, richardson=True):
    """Relative residual of the i-th null-state PDE applied to the evaluator f.

    Operator: (kappa/2) d^2/dx_i^2 + sum_{j != i} ( 2/(x_j-x_i) d/dx_j
    - 2h/(x_j-x_i)^2 ), with h = (6-kappa)/(2 kappa).  Central differences;
    Richardson over steps {1, 1/2, 1/4} * base by default.  The residual is
    normalized by the largest single term magnitude.
    """
    pts = np.asarray(pts, dtype=float)
    h = derive_params(kappa).h
    min_gap = np.diff(pts).min()
    if step is None:
        step = 1e-3 * min_gap
    if min_gap < 20 * step:
        raise ValueError("step too large for the point separations")

    def raw(s):
        terms = [0.5 * kappa * _partial2(f, pts, i, s)]
        f0 = f(pts)
        for j in range(len(pts)):
            if j == i:
                continue
            dx = pts[j] - pts[i]
            terms.append(2.0 / dx * _partial(f, pts, j, s))
            terms.append(-2.0 * h / dx ** 2 * f0)
        # all terms can vanish identically (e.g. the constant z_pair at
        # kappa=6); fall back on the function scale
        scale = max(max(abs(t) for t in terms), 1e-12 * abs(f0) + 1e-300)
        return sum(terms) / scale

    if not richardson:
        return raw(step)
    ss = [step * lv for lv in RICHARDSON_LEVELS]
    return float(_neville([s * s for s in ss], [raw(s) for s in ss]))


def random_mobius(rng, pts, scale=1.0):
    """A random PSL(2,R) map preserving the order of pts (no pole inside)."""
    pts = np.asarray(pts, dtype=float)
    lo, hi = pts.min(), pts.max()
    width = hi - lo
    for _ in range(200):
        a = math.exp(rng.normal(0.0, 0.3 * scale))
        b = rng.normal(0.0, width * scale)
        c = rng.normal(0.0, 0.3 * scale / max(width, 1.0))
        d = (1.0 + b * c) / a
        if abs(c) < 1e-12:
            return (a, b, 0.0, d)
        pole = -d / c
        if not lo - 0.05 * width <= pole <= hi + 0.05 * width:
            return (a, b, c, d)
    raise RuntimeError("failed to draw an order-preserving Moebius map")


def apply_mobius(coeffs, x):
    a, b, c, d = coeffs
    return (a * x + b) / (c * x + d)


def mobius_derivative(coeffs, x):
    a, b, c, d = coeffs
    return (a * d - b * c) / (c * x + d) ** 2


def mobius_check(f, kappa, coeffs, pts):
    """Relative covariance discrepancy |Z(x) - prod f'(x_i)^h Z(f(x))| / |Z(x)|."""
    pts = np.asarray(pts, dtype=float)
    h = derive_params(kappa).h
    a, b, c, d = coeffs
    det = a * d - b * c
    if abs(det - 1.0) > 1e-9:
        raise ValueError("coefficients must satisfy ad - bc = 1")
    img = apply_mobius(coeffs, pts)
    der = mobius_derivative(coeffs, pts)
    if np.any(np.diff(img) <= 0) or np.any(der <= 0):
        raise ValueError("map does not preserve the ordering of the points")
    lhs = f(pts)
    rhs = float(np.prod(der ** h)) * f(img)
    return abs(lhs - rhs) / abs(lhs)


@dataclass
class AsyResult:
    limit: float
    raw: dict
    converged: bool


def asy_check(f, kappa, j, pts, xi=None, deltas=(2e-2, 1e-2, 5e-3, 2.5e-3)) -> AsyResult:
    """Extrapolated collapse limit of f / delta^{-2h} as x_j, x_{j+1} -> xi.

    The merge is symmetric (x_j = xi - delta/2, x_{j+1} = xi + delta/2), which
    kills the odd terms; the remaining correction ladder is
    {(8-kappa)/kappa, 2, ...} and the limit is fitted by least squares on it.
    """
    pts = np.asarray(pts, dtype=float)
    h = derive_params(kappa).h
    if xi is None:
        xi = 0.5 * (pts[j - 1] + pts[j])
    lo = pts[j - 2] if j >= 2 else -math.inf
    hi = pts[j + 1] if j + 1 < len(pts) else math.inf
    if not lo < xi < hi:
        raise ValueError("xi must lie between the neighboring points")
    deltas = np.asarray(sorted(deltas, reverse=True), dtype=float)
    if deltas[0] >= min(xi - lo, hi - xi):
        raise ValueError("deltas too large for the gap around xi")
    vals = []
    for d in deltas:
        q = pts.copy()
        q[j - 1] = xi - 0.5 * d
        q[j] = xi + 0.5 * d
        vals.append(f(q) * d ** (2.0 * h))
    vals = np.asarray(vals)
    theta = (8.0 - kappa) / kappa
    basis = np.column_stack([np.ones_like(deltas), deltas ** theta, deltas ** 2.0])
    coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    limit = float(coef[0])
    resid = np.abs(basis @ coef - vals).max()
    scale = max(1.0, np.abs(vals).max())
    return AsyResult(limit=limit, raw=dict(zip(deltas.tolist(), vals.tolist())),
                     converged=resid < 1e-6 * scale)


@dataclass
class MartingaleResult:
    m0: float
    mean: float
    se: float
    z_score: float
    n_swallowed: int
    extras: dict = field(default_factory=dict)


def martingale_check(kappa, f, pts, j, total_time, n_samples, seed,
                     dt_cap=None, truncation_radius=None) -> MartingaleResult:
    """Zero-drift test of M_t = prod g'(x_i)^h f(..., W_t at slot j, ...).

    Runs the driftless chordal chain from x_j (driving sqrt(kappa) B_t + x_j)
    for n_samples paths up to capacity total_time and reports
    (mean(M_T) - M_0) / SE.  A path is truncated, with its value retained,
    as soon as a tracked point comes within the truncation radius of the
    driving (optional stopping).  The truncation is essential, not merely a
    numerical guard: M is in general only a local martingale, and the defect
    lives entirely at the near-swallowing boundary, so the plain E[M_T]
    undershoots M_0 by the probability mass of early completions.
    """
    pts = np.asarray(pts, dtype=float)
    h = derive_params(kappa).h
    others = [i for i in range(len(pts)) if i != j]
    rng = np.random.default_rng(seed)
    spect = np.tile(pts[others], (n_samples, 1))
    if truncation_radius is None:
        gap0 = np.abs(pts[others] - pts[j]).min()
        truncation_radius = 0.05 * gap0
    st = evolve_driftless_ensemble(
        kappa, pts[j], spect, rng, total_time, dt_cap=dt_cap,
        stop_on_swallow=True, swallow_threshold=truncation_radius)
    m0 = float(f(pts))
    gp_pow = np.exp(h * st["lgp"].sum(axis=1))
    vals = np.empty(n_samples)
    for s in range(n_samples):
        cfg = np.empty(len(pts))
        cfg[others] = pts[j] + st["w"][s] + st["r"][s]
        cfg[j] = pts[j] + st["w"][s]
        vals[s] = gp_pow[s] * f(cfg)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_samples))
    return MartingaleResult(
        m0=m0, mean=mean, se=se, z_score=(mean - m0) / se,
        n_swallowed=int(st["swallowed"].any(axis=1).sum()),
        extras={"total_time": total_time, "n_samples": n_samples, "seed": seed},
    )
