"""Screening-integral evaluation of partition functions for kappa in (4, 8).

The integrand, with p = 4/kappa and q = 8/kappa,

    prod_{i<j} (x_j-x_i)^{2/kappa} prod_{i,r} |w_r - x_i|^{-p}
        prod_{r<s} |w_s - w_r|^{q},

is integrated over one screening variable per link, each on the real interval
bracketed by its pair of points (integrable endpoints for kappa > 4), and
normalized by (Gamma(2-8/kappa)/Gamma(1-4/kappa)^2) per screening variable.
With one variable this reproduces the two-point function exactly (a Beta
integral).

With two variables the disjoint-interval integral A (intervals (x1,x2) and
(x3,x4)) is not a pure partition function: a boundary-collapse computation of
its asymptotics gives, exactly,

    A = Z_sep + c2(kappa) * Z_nested,     c2 = -1 / (2 cos(4 pi / kappa)),

the admixture coming from the pinch of the two contour endpoints.  The same
integral evaluated on a cyclically rotated configuration (a Moebius map
sending x1 through infinity, which swaps the roles of the two patterns)
gives the mirrored combination Z_nested + c2 * Z_sep, and the pair is solved
for (Z_sep, Z_nested).  The 2x2 system degenerates exactly at kappa = 6
(c2 = 1); there the values are filled in by Richardson continuation in kappa,
the pure partition functions being analytic in kappa on (0, 8).
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .exact_pf import PATTERN_NESTED, PATTERN_SEP, check_points
from .linkpat import LinkPattern
from .params import derive_params
from .specfun import log_gamma

_GL_CACHE = {}
RESONANCE_GUARD = 0.02          # half-width of the kappa=6 continuation window


def _gl(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = leggauss(n)
    return _GL_CACHE[n]


def _nodes_endpoint(a, b, pa, pb, order):
    """Nodes/weights for int_a^b (w-a)^{-pa} (b-w)^{-pb} f(w) dw, f smooth.

    Power substitutions at each endpoint absorb the algebraic factors exactly;
    the returned weights include them.  Requires pa, pb < 1.
    """
    nodes, weights = _gl(order)
    s = 0.5 * (nodes + 1.0)
    ws = 0.5 * weights
    mid = 0.5 * (a + b)
    half = mid - a
    out_u, out_w = [], []
    e = 1.0 / (1.0 - pa)
    u = a + half * s ** e
    out_u.append(u)
    out_w.append(ws * half ** (1.0 - pa) / (1.0 - pa) * (b - u) ** (-pb))
    e = 1.0 / (1.0 - pb)
    u = b - half * s ** e
    out_u.append(u)
    out_w.append(ws * half ** (1.0 - pb) / (1.0 - pb) * (u - a) ** (-pa))
    return np.concatenate(out_u), np.concatenate(out_w)


def _norm_const(kappa, n):
    return math.exp(n * (log_gamma(2.0 - 8.0 / kappa) - 2.0 * log_gamma(1.0 - 4.0 / kappa)))


def _check_range(kappa):
    derive_params(kappa)
    if not 4.0 < kappa < 8.0:
        raise ValueError(f"kappa={kappa} outside (4, 8): interval contours need "
                         "integrable endpoint exponents")
    if kappa - 4.0 < 1e-9 or 8.0 - kappa < 1e-9:
        raise ValueError(f"kappa={kappa} too close to the range boundary")


def coulomb_n1(kappa: float, x1: float, x2: float, order: int = 120) -> float:
    """One-variable screening integral; equals z_pair(kappa, x1, x2) exactly."""
    _check_range(kappa)
    if not x1 < x2:
        raise ValueError("need x1 < x2")
    p = 4.0 / kappa
    u, w = _nodes_endpoint(x1, x2, p, p, order)
    return _norm_const(kappa, 1) * (x2 - x1) ** (2.0 / kappa) * float(w.sum())


def _disjoint_integral(kappa, pts, order):
    """The raw A-integral: w1 on (x1,x2), w2 on (x3,x4), abs-value convention."""
    x1, x2, x3, x4 = pts
    p = 4.0 / kappa
    q = 8.0 / kappa
    xf = 1.0
    for i in range(4):
        for j in range(i + 1, 4):
            xf *= (pts[j] - pts[i]) ** (2.0 / kappa)
    u1, w1 = _nodes_endpoint(x1, x2, p, p, order)
    u2, w2 = _nodes_endpoint(x3, x4, p, p, order)
    f1 = w1 * np.abs(u1 - x3) ** (-p) * np.abs(u1 - x4) ** (-p)
    f2 = w2 * np.abs(u2 - x1) ** (-p) * np.abs(u2 - x2) ** (-p)
    cross = np.abs(u2[None, :] - u1[:, None]) ** q
    integral = float(f1 @ cross @ f2)
    return _norm_const(kappa, 2) * xf * integral


def _rotated_integral(kappa, pts, order):
    """prod phi'^h * A(phi-image), phi = -1/(x - x0) with x0 inside (x1, x2).

    The cyclic rotation swaps the two patterns, so this equals
    Z_nested + c2 * Z_sep.
    """
    x1, x2, x3, x4 = pts
    h = derive_params(kappa).h
    x0 = x1 + 0.5 * (x2 - x1)
    img = np.array([-1.0 / (x - x0) for x in (x2, x3, x4, x1)])
    if not np.all(np.diff(img) > 0):
        raise AssertionError("rotation failed to order the images")
    fac = np.prod([1.0 / (x - x0) ** 2 for x in pts]) ** h
    return fac * _disjoint_integral(kappa, tuple(img), order)


def _mixing_c2(kappa):
    return -1.0 / (2.0 * math.cos(4.0 * math.pi / kappa))


def _pair_values(kappa, pts, order):
    """(Z_sep, Z_nested) from the two contour combinations, away from kappa=6."""
    a = _disjoint_integral(kappa, pts, order)
    b = _rotated_integral(kappa, pts, order)
    c2 = _mixing_c2(kappa)
    det = 1.0 - c2 * c2
    return (a - c2 * b) / det, (b - c2 * a) / det


def _pair_values_continued(kappa0, pts, order, eps=(0.2, 0.1, 0.05)):
    """Richardson continuation in kappa across the c2 = 1 degeneracy at 6."""
    tees, rows = [], []
    for e in eps:
        hi = np.array(_pair_values(kappa0 + e, pts, order))
        lo = np.array(_pair_values(kappa0 - e, pts, order))
        tees.append(e * e)
        rows.append(0.5 * (hi + lo))
    n = len(rows)
    p = list(rows)
    for lev in range(1, n):
        p = [(tees[i + lev] * p[i] - tees[i] * p[i + 1]) / (tees[i + lev] - tees[i])
             for i in range(n - lev)]
    return float(p[0][0]), float(p[0][1])


def coulomb_n2(kappa: float, alpha: LinkPattern, pts, tol: float = 1e-8) -> float:
    """Two-variable screening evaluation of Z_alpha, alpha in LP_2.

    Uses a fixed tensor Gauss-Legendre rule after endpoint regularization;
    the quadrature order is doubled until two successive evaluations agree
    within tol (relative).
    """
    _check_range(kappa)
    xs = tuple(check_points(pts))
    if len(xs) != 4:
        raise ValueError("coulomb_n2 needs four points")
    if alpha == PATTERN_SEP:
        pick = 0
    elif alpha == PATTERN_NESTED:
        pick = 1
    else:
        raise ValueError(f"alpha must be in LP_2, got {alpha}")

    def values(order):
        if abs(kappa - 6.0) < RESONANCE_GUARD:
            # eps >= 0.05 keeps the evaluation points clear of the degeneracy
            return _pair_values_continued(kappa, xs, order)
        return _pair_values(kappa, xs, order)

    prev = values(80)[pick]
    for order in (160, 320):
        cur = values(order)[pick]
        if abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise RuntimeError(f"quadrature did not converge to tol={tol}")
