"""Fusion layer: q-combinatorics, collapse structure constants, the fused
four-point function and its third-order PDE, and numeric fusion limits.

With q = exp(i pi 4/kappa), the q-integers [m] = (q^m - q^-m)/(q - q^-1)
= sin(4 pi m / kappa) / sin(4 pi / kappa) are real.  Merging two weight-h
points of a four-point function with the subleading power 2/kappa produces a
weight-h13 point; the limit function is

    C(kappa) (x4-xi)^{-h13} (x3-xi)^{-h13} (x4-x3)^{2/kappa},

an exact solution of one third-order and two second-order PDEs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exact_pf import PATTERN_NESTED, c_kappa, z_four
from .params import derive_params, kac_weight
from .pde import _neville
from .specfun import gamma_fn

RESONANCE_TOL = 1e-9


class ResonanceError(ValueError):
    """kappa sits (numerically) on a q-combinatorial resonance."""


def q_integer(m: int, kappa: float) -> float:
    """[m]_q = sin(4 pi m / kappa) / sin(4 pi / kappa), q = exp(i pi 4/kappa).

    Evaluated as the Chebyshev polynomial U_{m-1}(cos(4 pi / kappa)), which
    extends the sine ratio through its removable singularities (e.g. the
    kappa = 4 point, where [2]_q = -2).
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    x = math.cos(4.0 * math.pi / kappa)
    u_prev, u = 0.0, 1.0            # U_{-1}, U_0
    for _ in range(m):
        u_prev, u = u, 2.0 * x * u - u_prev
    return u_prev                   # U_{m-1}(x)


def q_factorial(m: int, kappa: float) -> float:
    """[m]! = [1][2]...[m]; [0]! = 1."""
    out = 1.0
    for j in range(1, m + 1):
        out *= q_integer(j, kappa)
    return out


def _collapse_m(s1: int, s2: int, s: int) -> int:
    two_m = s1 + s2 - s - 1
    if two_m % 2:
        raise ValueError(f"(s1,s2,s)=({s1},{s2},{s}) violates the fusion parity rule")
    m = two_m // 2
    if not 0 <= m <= min(s1, s2) - 1:
        raise ValueError(f"m={m} outside 0..min(s1,s2)-1 for ({s1},{s2},{s})")
    return m


def b_const(s1: int, s2: int, s: int, kappa: float) -> float:
    """Gamma-product collapse constant B^{s1,s2}_s."""
    m = _collapse_m(s1, s2, s)
    t = 4.0 / kappa
    out = 1.0 / math.factorial(m)
    for u in range(1, m + 1):
        out *= (gamma_fn(1.0 - t * (s1 - u)) * gamma_fn(1.0 - t * (s2 - u))
                * gamma_fn(1.0 + t * u))
        out /= gamma_fn(1.0 + t) * gamma_fn(2.0 - t * (s1 + s2 - m - u))
    return out


def nu_const(s1: int, s2: int, s: int, kappa: float) -> float:
    """q-factorial collapse constant nu^s_{s1,s2}."""
    m = _collapse_m(s1, s2, s)
    num = (q_integer(2, kappa) ** m
           * q_factorial(s1 - 1, kappa)
           * q_factorial(s2 - 1, kappa)
           * q_factorial(s1 + s2 - 2 * m - 1, kappa))
    den = (q_factorial(s1 - 1 - m, kappa)
           * q_factorial(s2 - 1 - m, kappa)
           * q_factorial(s1 + s2 - m - 1, kappa))
    if abs(den) < RESONANCE_TOL:
        raise ResonanceError(f"q-factorial resonance at kappa={kappa} for ({s1},{s2},{s})")
    return num / den


def fused_z4(kappa: float, xi: float, x3: float, x4: float) -> float:
    """Fused four-point function C(k) (x4-xi)^{-h13} (x3-xi)^{-h13} (x4-x3)^{2/k}."""
    if not xi < x3 < x4:
        raise ValueError("need xi < x3 < x4")
    h13 = derive_params(kappa).h13
    return (c_kappa(kappa) * (x4 - xi) ** (-h13) * (x3 - xi) ** (-h13)
            * (x4 - x3) ** (2.0 / kappa))


def numeric_fusion_limit(kappa: float, xi: float, x3: float, x4: float,
                         deltas=(1e-2, 5e-3, 2.5e-3)) -> float:
    """lim Z_{{1,4},{2,3}}(x1,x2,x3,x4) / (x2-x1)^{2/kappa} as x1, x2 -> xi.

    Symmetric merge; Richardson extrapolation in the merge width (the
    correction series is in integer powers of delta by the regularity of the
    hypergeometric factor at 0).
    """
    deltas = sorted(deltas, reverse=True)
    if deltas[0] >= 2.0 * (x3 - xi):
        raise ValueError("deltas too large for the gap to x3")
    vals = []
    for d in deltas:
        pts = (xi - 0.5 * d, xi + 0.5 * d, x3, x4)
        vals.append(z_four(kappa, PATTERN_NESTED, pts) / d ** (2.0 / kappa))
    return float(_neville(deltas, vals))


# ---------------------------------------------------------------------------
# the fused PDE system: second order in x3, x4; third order in xi


def _d(f, args, orders, steps):
    """Mixed central difference of f(xi, x3, x4); orders per variable <= 3."""
    if sum(orders) == 0:
        return f(*args)
    i = next(k for k, o in enumerate(orders) if o)
    o = orders[i]
    rest = list(orders)
    rest[i] = 0
    s = steps[i]

    def shifted(c):
        a = list(args)
        a[i] += c * s
        return _d(f, tuple(a), tuple(rest), steps)

    if o == 1:
        return (shifted(1) - shifted(-1)) / (2 * s)
    if o == 2:
        return (shifted(1) - 2 * shifted(0) + shifted(-1)) / (s * s)
    if o == 3:
        return (shifted(2) - 2 * shifted(1) + 2 * shifted(-1) - shifted(-2)) / (2 * s ** 3)
    raise ValueError("derivative order > 3 not supported")


def _fused_residuals_raw(kappa, xi, x3, x4, step, f=None):
    """Raw relative residuals (res_x3, res_x4, res_xi) at one step size."""
    p = derive_params(kappa)
    h, h13 = p.h, p.h13
    if f is None:
        f = lambda a, b, c: fused_z4(kappa, a, b, c)
    args = (xi, x3, x4)
    steps = (step, step, step)

    def d(orders):
        return _d(f, args, orders, steps)

    xs = {0: xi, 1: x3, 2: x4}
    hw = {0: h13, 1: h, 2: h}

    def l2_on(j):
        # L_{-2}^{(j)} F = sum_{i != j} ( h_i/(x_i-x_j)^2 F - 1/(x_i-x_j) dF/dx_i )
        total = 0.0
        mx = 0.0
        for i in range(3):
            if i == j:
                continue
            dx = xs[i] - xs[j]
            o = [0, 0, 0]
            o[i] = 1
            t1 = hw[i] / dx ** 2 * d((0, 0, 0))
            t2 = -1.0 / dx * d(tuple(o))
            total += t1 + t2
            mx = max(mx, abs(t1), abs(t2))
        return total, mx

    out = []
    for j in (1, 2):           # second-order equations at the weight-h points
        o2 = [0, 0, 0]
        o2[j] = 2
        lead = d(tuple(o2))
        l2, mx = l2_on(j)
        terms_scale = max(abs(lead), 4.0 / kappa * mx, 1e-300)
        out.append((lead - 4.0 / kappa * l2) / terms_scale)

    # third-order equation at the fused point
    lead = d((3, 0, 0))
    mx3 = abs(lead)
    # L_{-2}^{(0)} dF/dxi with L_{-2} built from the two weight-h points
    t_l2 = 0.0
    for i in (1, 2):
        dx = xs[i] - xi
        o = [1, 0, 0]
        o[i] = 1
        a1 = h / dx ** 2 * d((1, 0, 0))
        a2 = -1.0 / dx * d(tuple(o))
        t_l2 += a1 + a2
        mx3 = max(mx3, 16.0 / kappa * abs(a1), 16.0 / kappa * abs(a2))
    t_l3 = 0.0
    for i in (1, 2):
        dx = xs[i] - xi
        o = [0, 0, 0]
        o[i] = 1
        b1 = 2.0 * h / dx ** 3 * d((0, 0, 0))
        b2 = -1.0 / dx ** 2 * d(tuple(o))
        t_l3 += b1 + b2
        coef = 8.0 * (8.0 - kappa) / kappa ** 2
        mx3 = max(mx3, abs(coef * b1), abs(coef * b2))
    res = lead - 16.0 / kappa * t_l2 + 8.0 * (8.0 - kappa) / kappa ** 2 * t_l3
    out.append(res / max(mx3, 1e-300))
    return tuple(out)


@dataclass
class FusedResidualReport:
    res_x3: float
    res_x4: float
    res_xi: float
    step: float

    @property
    def max_abs(self) -> float:
        return max(abs(self.res_x3), abs(self.res_x4), abs(self.res_xi))


def fused_pde_residual(kappa, xi, x3, x4, step=1e-3, richardson=True,
                       f=None) -> FusedResidualReport:
    """Finite-difference residuals of the fused PDE system applied to fused_z4.

    Two second-order equations (in x3 and x4) and one third-order equation
    (in xi).  Residuals are relative to the largest term; Richardson over
    {1, 1/2, 1/4} * step unless disabled.
    """
    min_gap = min(x3 - xi, x4 - x3)
    if min_gap < 10 * step:
        raise ValueError("step too large relative to the point separations")
    if not richardson:
        return FusedResidualReport(*_fused_residuals_raw(kappa, xi, x3, x4, step, f=f),
                                   step=step)
    ss = [step, step / 2, step / 4]
    rows = [_fused_residuals_raw(kappa, xi, x3, x4, s, f=f) for s in ss]
    ext = _neville([s * s for s in ss], [np.asarray(r) for r in rows])
    return FusedResidualReport(float(ext[0]), float(ext[1]), float(ext[2]), step=step)


def ope_coefficients(kappa, x3, x4, xi=0.0,
                     n_points=12, d_hi=1e-3, ratio=2.0):
    """Leading OPE data of Z_{{1,2},{3,4}} under the symmetric merge x1,x2 -> xi.

    Returns (leading_exponent, leading_coeff, subleading_exponent, z_pair):
    the leading branch carries delta^{-2h} with coefficient z_pair(x3, x4);
    the remainder after subtracting the exact leading term scales like
    delta^{2/kappa - 2h} relative to it, i.e. Z has subleading power 2/kappa.
    """
    from .exact_pf import PATTERN_SEP, z_pair

    h = derive_params(kappa).h
    ds = d_hi / ratio ** np.arange(n_points)
    zs = np.array([
        z_four(kappa, PATTERN_SEP, (xi - 0.5 * d, xi + 0.5 * d, x3, x4)) for d in ds
    ])
    tail = slice(n_points - 6, n_points)
    # leading exponent from the smallest scales
    lead_exp = np.polyfit(np.log(ds[tail]), np.log(zs[tail]), 1)[0]
    # leading coefficient by fitting A(d) = Z d^{2h} on its correction ladder
    # (the d^theta term is the subleading branch, d^2 the symmetric-merge
    # correction of the leading one); normalized variables keep it conditioned
    a_vals = zs * ds ** (2.0 * h)
    theta = (8.0 - kappa) / kappa
    t = ds / d_hi
    basis = np.column_stack([np.ones_like(t), t ** theta, t ** 2.0, t ** (theta + 2.0)])
    coef, *_ = np.linalg.lstsq(basis, a_vals, rcond=None)
    lead_coeff = float(coef[0])
    # subleading exponent: subtract the exact leading term (coefficient known
    # independently) and regress on the finest scales, where the d^2 leading
    # correction is negligible against the d^theta branch
    zp = float(z_pair(kappa, x3, x4))
    rem = np.abs(zs - zp * ds ** (-2.0 * h))
    sub_exp = np.polyfit(np.log(ds[tail]), np.log(rem[tail]), 1)[0]
    return float(lead_exp), lead_coeff, float(sub_exp), zp
