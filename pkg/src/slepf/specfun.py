"""Special functions: Gamma/Beta, Gauss 2F1 on [0,1], Pfaffians, and the
AGM-based elliptic integrals behind the rectangle-corner map."""

from __future__ import annotations

import math

import numpy as np

_SERIES_MAX_TERMS = 200_000


def gamma_fn(x: float) -> float:
    """Gamma function; raises on poles (nonpositive integers)."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"gamma pole at {x}")
    return math.gamma(x)


def log_gamma(x: float) -> float:
    """log|Gamma(x)|; raises on poles."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"gamma pole at {x}")
    return math.lgamma(x)


def beta_fn(a: float, b: float) -> float:
    """Beta(a, b) for positive arguments."""
    if a <= 0 or b <= 0:
        raise ValueError("beta_fn requires positive arguments")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def _is_nonpos_int(x, tol=1e-12):
    return x <= tol and abs(x - round(x)) <= tol


def _series_2f1(a, b, c, z, max_terms=_SERIES_MAX_TERMS):
    """Power series sum_{n} (a)_n (b)_n / (c)_n z^n / n! with term recursion."""
    total = 1.0
    term = 1.0
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total
    raise RuntimeError(f"2F1 series did not converge at z={z}")


def _terminating_2f1(a, b, c, z):
    """Finite sum when a or b is a nonpositive integer."""
    n_stop = int(round(-a if _is_nonpos_int(a) else -b))
    total = 1.0
    term = 1.0
    for n in range(n_stop):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
    return total


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric 2F1(a, b; c; z) for real z in [0, 1].

    z <= 1/2 uses the power series; z > 1/2 the z -> 1-z connection formula.
    At z = 1 the Gauss value Gamma(c)Gamma(c-a-b)/(Gamma(c-a)Gamma(c-b)) is
    returned when c-a-b > 0, +inf when c-a-b <= 0 (divergent case).
    When c-a-b is close to an integer the connection formula degenerates and
    the series is used for all z < 1 instead.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpos_int(c):
        raise ValueError(f"c={c} is a nonpositive integer")
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"z={z} outside [0, 1]")
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return _terminating_2f1(a, b, c, z)
    s = c - a - b
    if z == 1.0:
        if s <= 0:
            return math.inf
        return math.exp(log_gamma(c) + log_gamma(s) - log_gamma(c - a) - log_gamma(c - b))
    if z <= 0.5:
        return _series_2f1(a, b, c, z)
    if abs(s - round(s)) < 1e-8:
        # degenerate connection formula; series still converges for z < 1
        return _series_2f1(a, b, c, z)
    u = 1.0 - z
    f1 = _series_2f1(a, b, a + b - c + 1.0, u)
    f2 = _series_2f1(c - a, c - b, s + 1.0, u)
    g1 = gamma_fn(c) * gamma_fn(s) / (gamma_fn(c - a) * gamma_fn(c - b))
    g2 = gamma_fn(c) * gamma_fn(-s) / (gamma_fn(a) * gamma_fn(b))
    return g1 * f1 + g2 * u ** s * f2


def pfaffian(a, atol: float = 1e-12):
    """Pfaffian of a real antisymmetric 2N x 2N matrix by recursive expansion.

    Intended for 2N <= 8 (cost grows like (2N-1)!!).  pf(A)^2 = det(A).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n % 2:
        raise ValueError("pfaffian needs even dimension")
    scale = max(1.0, np.abs(a).max())
    if np.abs(a + a.T).max() > atol * scale:
        raise ValueError("matrix is not antisymmetric within tolerance")

    def rec(m):
        k = m.shape[0]
        if k == 2:
            return m[0, 1]
        total = 0.0
        rest = list(range(1, k))
        for pos, j in enumerate(rest):
            sub = [i for i in rest if i != j]
            total += (-1.0) ** pos * m[0, j] * rec(m[np.ix_(sub, sub)])
        return total

    return rec(a)


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of positive a, b (quadratic convergence)."""
    if a <= 0 or b <= 0:
        raise ValueError("agm requires positive arguments")
    for _ in range(64):
        if abs(a - b) <= 4.0 * np.finfo(float).eps * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_k(k: float) -> float:
    """Complete elliptic integral K(k) (modulus convention) via the AGM."""
    if not 0.0 <= k < 1.0:
        raise ValueError(f"modulus k={k} outside [0, 1)")
    return math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - k * k)))


def rect_corner_images(r: float):
    """Half-plane images of the corners of a rectangle with aspect r = height/width.

    Solves K(k')/K(k) = 2r for the modulus k by bisection; the conformal map
    (a Jacobi sn) sends the corners, in counterclockwise order starting from
    the bottom-left, to (-1, 1, 1/k, -1/k).  Returned sorted increasing:
    (-1/k, -1, 1, 1/k).
    """
    r = float(r)
    if not 0.05 < r < 20.0:
        raise ValueError(f"aspect ratio {r} outside supported range (0.05, 20)")
    target = 2.0 * r

    def log_ratio(lk):
        # K(k')/K(k) = agm(1, k') / agm(1, k); work with log k to keep the
        # extreme aspect ratios (k as small as e^{-2 pi r}) representable
        k = math.exp(lk)
        kp = math.sqrt(max(1.0 - k * k, 1e-300))
        return agm(1.0, kp) / agm(1.0, k)

    lo, hi = -150.0, -1e-16
    # the ratio is decreasing in k
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if log_ratio(mid) > target:
            lo = mid
        else:
            hi = mid
    k = math.exp(0.5 * (lo + hi))
    return (-1.0 / k, -1.0, 1.0, 1.0 / k)


def rect_modulus(r: float) -> float:
    """The elliptic modulus k solving K(k')/K(k) = 2r (see rect_corner_images)."""
    x = rect_corner_images(r)
    return 1.0 / x[3]
