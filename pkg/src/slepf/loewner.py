"""Loewner-chain engine.

The chain dg_t/dt = 2/(g_t - W_t), g_0 = id, is discretized with the driving
function held constant over each substep, so every substep is an exact
vertical-slit map

    g -> W + sign(g - W) * sqrt((g - W)^2 + 4*delta),
    g' -> g' * |g - W| / sqrt((g - W)^2 + 4*delta),

followed by a jump of W.  This is stable near the tip and avoids ODE
stiffness.  All tracked state is kept relative to W (shift-invariant), with
log-derivatives and log consecutive differences so that deep excursions of
the curve cannot underflow the observables.

Two drivers are provided: a chordal target-chasing evolution with the
two-point drift dW = sqrt(kappa) dB + (kappa-6)/(W-V) dt, where V is the
image of the target point (used by the Monte-Carlo cascade), and a plain
driftless evolution from a single seed point (used for martingale checks and
driving-function sampling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# capacity substep as a fraction of the squared distance to the nearest
# tracked point; weak discretization error scales linearly in this constant
DEFAULT_STEP_SCALE = 5e-4
DEFAULT_STOP_EPSILON = 1e-3
SWALLOW_FACTOR = 2.0 * math.sqrt(2.0)   # |g - W| < 2*sqrt(2*delta) counts as swallowed


class RefinementError(RuntimeError):
    """A tracked point got too close to the driving without being resolvable."""


class TruncationError(RuntimeError):
    """The stopping rule was not reached within the iteration budget."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


@dataclass
class DrivingFunction:
    """Uniformly sampled driving function W_0..W_M with step dt.

    kappa = 0 marks a deterministic driving.
    """

    dt: float
    samples: np.ndarray
    kappa: float = 0.0

    @property
    def total_time(self) -> float:
        return self.dt * (len(self.samples) - 1)


def sample_driving(kappa: float, total_time: float, dt: float, seed,
                   w0: float = 0.0) -> DrivingFunction:
    """Brownian driving W_t = w0 + sqrt(kappa) B_t sampled on a uniform grid."""
    if kappa <= 0:
        raise ValueError("kappa must be positive; use a constant array for deterministic driving")
    if dt <= 0 or total_time <= 0:
        raise ValueError("dt and total_time must be positive")
    m = int(round(total_time / dt))
    rng = np.random.default_rng(seed)
    incr = rng.normal(0.0, math.sqrt(kappa * dt), size=m)
    w = np.empty(m + 1)
    w[0] = w0
    np.cumsum(incr, out=w[1:])
    w[1:] += w0
    return DrivingFunction(dt=dt, samples=w, kappa=float(kappa))


def constant_driving(total_time: float, dt: float, w0: float = 0.0) -> DrivingFunction:
    m = int(round(total_time / dt))
    return DrivingFunction(dt=dt, samples=np.full(m + 1, w0), kappa=0.0)


@dataclass
class LoewnerChain:
    """Mutable tracked-point state of a discretized Loewner chain."""

    driving: DrivingFunction
    points: np.ndarray             # initial boundary positions
    g: np.ndarray                  # g_t(x)
    gp: np.ndarray                 # g_t'(x)
    swallowed: np.ndarray          # bool
    tau: np.ndarray                # swallowing times (nan if alive)
    t: float = 0.0
    cursor: int = 0                # next driving sample index to consume

    @classmethod
    def from_driving(cls, driving: DrivingFunction, points) -> "LoewnerChain":
        pts = np.asarray(points, dtype=float)
        return cls(
            driving=driving,
            points=pts,
            g=pts.copy(),
            gp=np.ones_like(pts),
            swallowed=np.zeros(pts.shape, dtype=bool),
            tau=np.full(pts.shape, np.nan),
        )

    @property
    def w(self) -> float:
        return float(self.driving.samples[self.cursor])

    def index_of(self, x: float) -> int:
        hits = np.where(np.isclose(self.points, x, rtol=0, atol=1e-12))[0]
        if len(hits) != 1:
            raise KeyError(f"{x} is not a tracked point")
        return int(hits[0])


def evolve(chain: LoewnerChain, t_target: float) -> LoewnerChain:
    """Advance the chain through its driving samples until time t_target."""
    drv = chain.driving
    dt = drv.dt
    thresh = SWALLOW_FACTOR * math.sqrt(dt)
    n_steps = int(round((t_target - chain.t) / dt))
    if chain.cursor + n_steps >= len(drv.samples):
        raise ValueError("driving function too short for requested time")
    for _ in range(n_steps):
        w = drv.samples[chain.cursor]
        alive = ~chain.swallowed
        rel = chain.g[alive] - w
        hit = np.abs(rel) < thresh
        if hit.any():
            idx = np.where(alive)[0][hit]
            chain.swallowed[idx] = True
            chain.tau[idx] = chain.t
            alive = ~chain.swallowed
            rel = chain.g[alive] - w
        den = np.sqrt(rel * rel + 4.0 * dt)
        chain.gp[alive] *= np.abs(rel) / den
        chain.g[alive] = w + np.sign(rel) * den
        chain.cursor += 1
        chain.t += dt
    return chain


def hcap_estimate(chain: LoewnerChain, probe_index: int = -1) -> float:
    """Half-plane capacity from the 1/z coefficient, read off a far tracked point."""
    x = chain.points[probe_index]
    gx = chain.g[probe_index]
    return float(x * (gx - x))


@dataclass
class PoissonRatio:
    value: float
    diagnostics: dict = field(default_factory=dict)


def poisson_ratio_from_state(gpx, gpy, x, y, gx, gy, diagnostics=None) -> PoissonRatio:
    val = gpx * gpy * (y - x) ** 2 / (gy - gx) ** 2
    return PoissonRatio(value=float(val), diagnostics=diagnostics or {})


def poisson_ratio(chain, x: float, y: float) -> PoissonRatio:
    """H_{H \\ K}(x,y) / H_H(x,y) = g'(x) g'(y) (y-x)^2 / (g(y)-g(x))^2.

    Lies in [0, 1]: it is the probability that a Brownian excursion from x to
    y avoids the hull.  Both points must be unswallowed.
    """
    i, j = chain.index_of(x), chain.index_of(y)
    if chain.swallowed[i] or chain.swallowed[j]:
        raise ValueError("poisson_ratio needs unswallowed points")
    return poisson_ratio_from_state(
        chain.gp[i], chain.gp[j], chain.points[i], chain.points[j],
        chain.g[i], chain.g[j],
        diagnostics={"t": chain.t},
    )


def _slit_update(r, delta_col):
    """Exact slit-map update of offsets r = g - W; returns (r_new, dlog_gp)."""
    den = np.sqrt(r * r + delta_col)
    dlgp = 0.5 * np.log1p(-delta_col / (den * den))
    return np.sign(r) * den, dlgp


def evolve_chordal_ensemble(kappa, xa, xb, spectators, rng, *,
                            step_scale=DEFAULT_STEP_SCALE,
                            stop_epsilon=DEFAULT_STOP_EPSILON,
                            allow_swallow=False,
                            swallow_ratio=None,
                            max_iter=2_000_000):
    """Chordal SLE_kappa from xa to xb, stopped near the swallowing of xb.

    Vectorized over m independent samples.  xa, xb are scalars or (m,)
    arrays; spectators is (m, k), each row strictly increasing.  The driving
    follows dW = sqrt(kappa) dB + (kappa-6)/(W-V) dt with V the target image
    (midpoint-evaluated drift).  Substeps adapt as step_scale * min_gap^2.

    Stops a sample once |V - W| <= stop_epsilon * (distance from the nearest
    spectator outside [W, V] to the pair), the scale on which the unexplored
    remainder of the curve can still influence transported observables.

    With swallow_ratio set (used for kappa > 4, where the curve really does
    swallow boundary points), a spectator whose offset drops below
    swallow_ratio times the current target gap is declared swallowed and
    frozen; the adaptive steps otherwise keep refining the approach forever.
    The ratio form matters: in rare giant-excursion samples the whole
    remaining configuration collapses in scale together, which is not a
    swallowing, while a genuine swallowing shrinks one offset against the
    others.

    Returns a dict with per-sample state at the stop time:
      r (m,k) spectator offsets from W, rv (m,) target offset,
      lgp (m,k) log-derivatives, ldiff (m,k-1) log consecutive spectator
      differences, swallowed (m,k), failed (m,), t (m,) capacity, n_iter (m,).
    """
    spect = np.atleast_2d(np.asarray(spectators, dtype=float))
    m, k = spect.shape
    xa = np.broadcast_to(np.asarray(xa, dtype=float), (m,)).astype(float)
    xb = np.broadcast_to(np.asarray(xb, dtype=float), (m,)).astype(float)
    span = np.abs(xb - xa)
    if np.any(span <= 0):
        raise ValueError("xa and xb must be distinct")

    r = spect - xa[:, None]
    rv = xb - xa
    sign_rv = np.sign(rv)
    lgp = np.zeros((m, k))
    ldiff = np.log(np.diff(spect, axis=1)) if k > 1 else np.zeros((m, 0))
    swallowed = np.zeros((m, k), dtype=bool)
    failed = np.zeros(m, dtype=bool)
    t = np.zeros(m)
    n_iter = np.zeros(m, dtype=int)
    active = np.ones(m, dtype=bool)
    # spectators not between xa and xb set the truncation scale
    out_mask = np.sign(r - rv[:, None]) == np.sign(r)

    it = 0
    while True:
        idx = np.where(active)[0]
        if idx.size == 0:
            break
        it += 1
        if it > max_iter:
            raise TruncationError(
                "stopping rule not reached",
                {"active_samples": idx.tolist()[:32], "iterations": it},
            )
        ra = r[idx]
        rva = rv[idx]
        alive = ~swallowed[idx]
        arv = np.abs(rva)
        if k:
            agap = np.where(alive, np.abs(ra), np.inf).min(axis=1)
            min_gap = np.minimum(arv, agap)
        else:
            min_gap = arv
        delta = step_scale * min_gap * min_gap
        dcol = 4.0 * delta[:, None]

        # swallow check against the upcoming slit size
        if k:
            close = alive & (np.abs(ra) < SWALLOW_FACTOR * np.sqrt(delta)[:, None])
            if close.any():
                if allow_swallow:
                    rows = close.any(axis=1)
                    swallowed[idx[rows]] |= close[rows]
                    alive = ~swallowed[idx]
                else:
                    bad = close.any(axis=1)
                    failed[idx[bad]] = True
                    active[idx[bad]] = False
                    keep = ~bad
                    idx = idx[keep]
                    if idx.size == 0:
                        continue
                    ra = ra[keep]; rva = rva[keep]; arv = arv[keep]
                    delta = delta[keep]; dcol = dcol[keep]
                    alive = ~swallowed[idx]

        r_new = ra.copy()
        if k:
            den = np.sqrt(ra * ra + dcol)
            upd_r = np.sign(ra) * den
            dlgp = 0.5 * np.log1p(-dcol / (den * den))
            r_new = np.where(alive, upd_r, ra)
            lgp[idx] += np.where(alive, dlgp, 0.0)
            if k > 1:
                both = alive[:, :-1] & alive[:, 1:]
                same = np.sign(ra[:, 1:]) == np.sign(ra[:, :-1])
                sab = np.abs(ra[:, :-1]) + np.abs(ra[:, 1:])
                dab = den[:, :-1] + den[:, 1:]
                upd = np.where(same, ldiff[idx] + np.log(sab / dab), np.log(dab))
                ldiff[idx] = np.where(both, upd, ldiff[idx])
        rv_den = np.sqrt(rva * rva + 4.0 * delta)
        rv_new = sign_rv[idx] * rv_den

        # midpoint drift toward the target + Brownian increment
        g_mid = 0.5 * (arv + rv_den)
        dw = (-(kappa - 6.0) * sign_rv[idx] / g_mid) * delta \
            + np.sqrt(kappa * delta) * rng.standard_normal(idx.size)
        r_new = r_new - dw[:, None] if k else r_new
        rv_new = rv_new - dw

        overshot = np.sign(rv_new) != sign_rv[idx]
        if overshot.any():
            rv_new = np.where(overshot, sign_rv[idx] * 1e-12, rv_new)
        if swallow_ratio is not None and k:
            deep = (~swallowed[idx]) & (np.abs(r_new)
                                        < swallow_ratio * np.abs(rv_new)[:, None])
            if deep.any():
                if not allow_swallow:
                    failed[idx[deep.any(axis=1)]] = True
                    active[idx[deep.any(axis=1)]] = False
                else:
                    swallowed[idx] |= deep
        r[idx] = r_new
        rv[idx] = rv_new
        t[idx] += delta
        n_iter[idx] += 1

        if k:
            dist = np.where(out_mask[idx] & ~swallowed[idx],
                            np.minimum(np.abs(r_new), np.abs(r_new - rv_new[:, None])),
                            np.inf).min(axis=1)
            dist = np.where(np.isfinite(dist), dist, span[idx])
        else:
            dist = span[idx]
        # second clause: in deep excursions the whole remaining configuration
        # can collapse in scale; below float-noise scale nothing more changes
        done = (np.abs(rv_new) <= stop_epsilon * dist) \
            | (dist <= 1e-10 * span[idx]) | overshot
        active[idx[done]] = False

    return {
        "r": r, "rv": rv, "lgp": lgp, "ldiff": ldiff,
        "swallowed": swallowed, "failed": failed, "t": t, "n_iter": n_iter,
    }


def evolve_driftless_ensemble(kappa, x0, spectators, rng, total_time, *,
                              dt_cap=None, step_scale=DEFAULT_STEP_SCALE * 8,
                              allow_swallow=True, stop_on_swallow=False,
                              swallow_threshold=None):
    """Chordal SLE_kappa from x0 (toward infinity) up to capacity total_time.

    Vectorized over m samples; spectators (m, k).  Swallowed spectators are
    frozen at their last state with tau recorded; with stop_on_swallow the
    whole sample halts at its first swallowing time (optional stopping).
    swallow_threshold sets an explicit absolute truncation radius |g - W|;
    by default the threshold follows the adaptive substep (2 sqrt(2 delta)).
    Returns r, lgp, w (cumulative driving displacement), swallowed, tau, t,
    and n_iter.
    """
    spect = np.atleast_2d(np.asarray(spectators, dtype=float))
    m, k = spect.shape
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (m,)).astype(float)
    if dt_cap is None:
        dt_cap = total_time / 1000.0
    r = spect - x0[:, None]
    lgp = np.zeros((m, k))
    swallowed = np.zeros((m, k), dtype=bool)
    tau = np.full((m, k), np.nan)
    wdisp = np.zeros(m)
    t = np.zeros(m)
    n_iter = np.zeros(m, dtype=int)
    active = np.ones(m, dtype=bool)
    while True:
        idx = np.where(active)[0]
        if idx.size == 0:
            break
        ra = r[idx]
        alive = ~swallowed[idx]
        min_gap = np.where(alive, np.abs(ra), np.inf).min(axis=1) if k else np.full(idx.size, np.inf)
        delta = np.minimum(dt_cap, step_scale * min_gap * min_gap)
        delta = np.minimum(delta, total_time - t[idx])
        if k:
            thresh = (swallow_threshold if swallow_threshold is not None
                      else SWALLOW_FACTOR * np.sqrt(delta)[:, None])
            close = alive & (np.abs(ra) < thresh)
            if close.any():
                if not allow_swallow:
                    raise RefinementError("tracked point hit the swallow threshold")
                newly = close & ~swallowed[idx]
                tau_rows = tau[idx]
                tau_rows[newly] = t[idx][:, None].repeat(k, axis=1)[newly]
                tau[idx] = tau_rows
                swallowed[idx] |= close
                if stop_on_swallow:
                    halt = close.any(axis=1)
                    active[idx[halt]] = False
                    keep = ~halt
                    idx = idx[keep]
                    if idx.size == 0:
                        continue
                    ra = ra[keep]
                    delta = delta[keep]
                alive = ~swallowed[idx]
            dcol = 4.0 * delta[:, None]
            den = np.sqrt(ra * ra + dcol)
            upd_r = np.sign(ra) * den
            dlgp = 0.5 * np.log1p(-dcol / (den * den))
            r[idx] = np.where(alive, upd_r, ra)
            lgp[idx] += np.where(alive, dlgp, 0.0)
        dw = np.sqrt(kappa * delta) * rng.standard_normal(idx.size)
        if k:
            r[idx] -= dw[:, None]
        wdisp[idx] += dw
        t[idx] += delta
        n_iter[idx] += 1
        active[idx[t[idx] >= total_time * (1 - 1e-12)]] = False
    return {"r": r, "lgp": lgp, "w": wdisp, "swallowed": swallowed,
            "tau": tau, "t": t, "n_iter": n_iter}


@dataclass
class ChordalStop:
    """Scalar view of a stopped target-chasing chain (see chordal_between)."""

    points: np.ndarray
    g_rel: np.ndarray              # g(x) - W at stop
    log_gp: np.ndarray
    target_gap: float              # g(xb) - W at stop
    swallowed: np.ndarray
    capacity: float
    n_iter: int
    failed: bool

    def poisson_ratio(self, i: int, j: int) -> PoissonRatio:
        if self.swallowed[i] or self.swallowed[j]:
            raise ValueError("poisson_ratio needs unswallowed points")
        x, y = self.points[i], self.points[j]
        gpx, gpy = math.exp(self.log_gp[i]), math.exp(self.log_gp[j])
        return poisson_ratio_from_state(
            gpx, gpy, x, y, self.g_rel[i], self.g_rel[j],
            diagnostics={"capacity": self.capacity, "target_gap": self.target_gap},
        )


def chordal_between(kappa, x_a, x_b, tracked, *, stop_epsilon=DEFAULT_STOP_EPSILON,
                    step_scale=DEFAULT_STEP_SCALE, seed=None, rng=None,
                    allow_swallow=None) -> ChordalStop:
    """One chordal SLE_kappa sample from x_a to x_b, tracking boundary points.

    Realizes the two-point marginal SDE dW = sqrt(kappa) dB + (kappa-6)/(W-V) dt
    with exact slit-map substeps, stopped when the remaining influence on the
    tracked observables is below stop_epsilon (target gap small relative to
    the nearest outside spectator).
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    if allow_swallow is None:
        allow_swallow = kappa > 4.0
    tracked = np.asarray(tracked, dtype=float)
    st = evolve_chordal_ensemble(
        kappa, x_a, x_b, tracked[None, :], rng,
        step_scale=step_scale, stop_epsilon=stop_epsilon,
        allow_swallow=allow_swallow,
    )
    return ChordalStop(
        points=tracked,
        g_rel=st["r"][0],
        log_gp=st["lgp"][0],
        target_gap=float(st["rv"][0]),
        swallowed=st["swallowed"][0],
        capacity=float(st["t"][0]),
        n_iter=int(st["n_iter"][0]),
        failed=bool(st["failed"][0]),
    )


def trace_curve(driving: DrivingFunction, stride: int = 1) -> np.ndarray:
    """Curve points via backward (zipper) evaluation; O(M^2/stride) cost.

    Returns complex points eta(t_n) for n = stride, 2*stride, ...
    """
    w = driving.samples
    dt = driving.dt
    out = []
    for n in range(stride, len(w), stride):
        z = complex(w[n], 0.0)
        for s in range(n - 1, -1, -1):
            u = z - w[s]
            val = np.sqrt(u * u - 4.0 * dt)
            if val.imag < 0:
                val = -val
            z = w[s] + val
        out.append(z)
    return np.asarray(out)
