"""Exact pure partition functions for N <= 2.

The two-point function is (x2-x1)^((kappa-6)/kappa).  At four points the two
pure functions are hypergeometric: with h = (6-kappa)/(2 kappa) and
cross-ratio arguments summing to one,

  Z_{{1,2},{3,4}} = (x2-x1)^{-2h} (x4-x3)^{-2h} w^{2/k} F(w)/F(1),
      w = (x4-x1)(x3-x2) / ((x4-x2)(x3-x1)),
  Z_{{1,4},{2,3}} = (x4-x1)^{-2h} (x3-x2)^{-2h} z^{2/k} F(z)/F(1),
      z = (x2-x1)(x4-x3) / ((x4-x2)(x3-x1)),

where F(.) = 2F1(4/k, 1-4/k; 8/k; .).  The normalization F(1) makes the
nearest-neighbor collapse limits reproduce the two-point function exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linkpat import LinkPattern, enumerate_patterns
from .params import derive_params
from .specfun import gauss_2f1, log_gamma, pfaffian

PATTERN_SEP = LinkPattern(((1, 2), (3, 4)))
PATTERN_NESTED = LinkPattern(((1, 4), (2, 3)))


def check_points(xs):
    """Validate a strictly increasing even-length boundary configuration."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1:
        raise ValueError("points must be a flat sequence")
    if len(xs) % 2:
        raise ValueError("need an even number of boundary points")
    if len(xs) and not np.all(np.diff(xs) > 0):
        raise ValueError(f"points must be strictly increasing, got {xs.tolist()}")
    return xs


@dataclass
class PartitionFnEstimate:
    value: float
    abs_error: float
    method: str                     # "exact" | "mc" | "coulomb"
    diagnostics: dict = field(default_factory=dict)


def z_empty() -> float:
    return 1.0


def z_pair(kappa: float, x1: float, x2: float) -> float:
    """Two-point pure partition function (x2-x1)^((kappa-6)/kappa)."""
    derive_params(kappa)
    if not x1 < x2:
        raise ValueError(f"need x1 < x2, got {x1}, {x2}")
    return (x2 - x1) ** ((kappa - 6.0) / kappa)


def _hyp_factor(kappa, arg):
    a, b, c = 4.0 / kappa, 1.0 - 4.0 / kappa, 8.0 / kappa
    f1 = gauss_2f1(a, b, c, 1.0)
    if math.isinf(f1):
        raise ValueError(f"normalization 2F1(...;1) diverges at kappa={kappa}")
    return gauss_2f1(a, b, c, arg) / f1


def z_four(kappa: float, alpha: LinkPattern, pts) -> float:
    """Four-point pure partition function for alpha in LP_2."""
    if kappa >= 8.0:
        raise ValueError("kappa >= 8 unsupported: the 2F1 normalization diverges")
    p = derive_params(kappa)
    x1, x2, x3, x4 = check_points(pts)
    cr = (x2 - x1) * (x4 - x3) / ((x4 - x2) * (x3 - x1))
    if alpha == PATTERN_SEP:
        w = 1.0 - cr
        return ((x2 - x1) * (x4 - x3)) ** (-2 * p.h) * w ** (2.0 / kappa) * _hyp_factor(kappa, w)
    if alpha == PATTERN_NESTED:
        return ((x4 - x1) * (x3 - x2)) ** (-2 * p.h) * cr ** (2.0 / kappa) * _hyp_factor(kappa, cr)
    raise ValueError(f"alpha must be one of LP_2, got {alpha}")


def c_kappa(kappa: float) -> float:
    """The collapse constant C(kappa) = Gamma(4/k)Gamma(12/k-1) / (Gamma(8/k)Gamma(8/k-1)).

    Equals 1/2F1(4/k, 1-4/k; 8/k; 1); 1 at kappa=4, 0 at kappa=8.
    """
    kappa = float(kappa)
    if not 0.0 < kappa <= 8.0:
        raise ValueError(f"kappa={kappa} outside (0, 8]")
    if kappa == 8.0:
        return 0.0
    return math.exp(
        log_gamma(4.0 / kappa) + log_gamma(12.0 / kappa - 1.0)
        - log_gamma(8.0 / kappa) - log_gamma(8.0 / kappa - 1.0)
    )


def z_value(kappa: float, alpha: LinkPattern, pts) -> float:
    """Exact Z_alpha for N <= 2; raises for larger patterns."""
    xs = check_points(pts)
    n = alpha.n_links
    if 2 * n != len(xs):
        raise ValueError("pattern size does not match point count")
    if n == 0:
        return z_empty()
    if n == 1:
        return z_pair(kappa, xs[0], xs[1])
    if n == 2:
        return z_four(kappa, alpha, xs)
    raise ValueError("no closed form for N >= 3; use the Monte-Carlo estimator")


def z_total(kappa: float, pts, mc_config=None) -> float:
    """Sum of Z_alpha over all planar patterns; exact for N <= 2.

    For N >= 3 an mc_config template (see slepf.mc_pf.CascadeConfig) must be
    supplied; the sum is then a Monte-Carlo estimate.
    """
    xs = check_points(pts)
    n = len(xs) // 2
    if n == 0:
        return 1.0
    if n == 1:
        return z_pair(kappa, xs[0], xs[1])
    if n == 2:
        return z_four(kappa, PATTERN_SEP, xs) + z_four(kappa, PATTERN_NESTED, xs)
    if mc_config is None:
        raise ValueError("N >= 3 requires Monte-Carlo delegation (pass mc_config)")
    from .mc_pf import estimate_z  # local import: mc_pf depends on this module
    from dataclasses import replace
    total = 0.0
    for alpha in enumerate_patterns(n):
        est = estimate_z(replace(mc_config, kappa=kappa, alpha=alpha, pts=tuple(xs)))
        total += est.value
    return total


def pfaffian_form(pts) -> float:
    """Pfaffian of (|x_j - x_i|^{-1})_{i<j}: the kappa=3 total partition function."""
    xs = check_points(pts)
    n = len(xs)
    a = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            a[i, j] = 1.0 / (xs[j] - xs[i])
            a[j, i] = -a[i, j]
    return pfaffian(a)


def transport_polygon(kappa, alpha, corner_images, derivative_factors=None):
    """Partition-function data transported to a polygon via a conformal map.

    corner_images are the half-plane images f(x_i) of the polygon's marked
    points (strictly increasing).  With derivative_factors |f'(x_i)| supplied,
    returns the full covariant value prod |f'|^h * Z_alpha(images).  Without
    them returns the ratio Z_alpha/Z_total at the images, in which the
    derivative factors cancel.
    """
    xs = check_points(corner_images)
    if derivative_factors is None:
        return z_value(kappa, alpha, xs) / z_total(kappa, xs)
    df = np.asarray(derivative_factors, dtype=float)
    if df.shape != xs.shape:
        raise ValueError("derivative_factors must match corner_images")
    if np.any(df <= 0):
        raise ValueError("derivative factors must be positive")
    h = derive_params(kappa).h
    return float(np.prod(df ** h)) * z_value(kappa, alpha, xs)
