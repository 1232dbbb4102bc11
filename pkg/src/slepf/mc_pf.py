"""Monte-Carlo cascade construction of pure partition functions.

Z_alpha is defined recursively: pick a link {a,b} of alpha, sample a chordal
SLE_kappa curve eta from x_a to x_b, and average

    Z_alpha(x) = |x_b - x_a|^{-2h} * E[ prod_D Z_{alpha_D}(D; ...) ]

over the components D of the curve's complement, each factor transported back
to the half-plane by the conformal covariance of Z.  For kappa <= 4 the curve
is simple, so the remaining points split deterministically into "inside the
arch" (between x_a and x_b) and "outside", and planarity of alpha guarantees
no link straddles the two sides.

Numerically, one sample runs the Loewner chain of the curve until the target
is nearly swallowed and transports the surviving points through the chain's
final maps:

  * outside points: their images (with accumulated derivative factors) feed
    the recursion for the outside sub-pattern directly, the image domain
    differing from the half-plane only by the unexplored remainder of the
    curve (controlled by stop_epsilon);

  * inside points: their images cluster in the shrinking interval between the
    driving value W and the target image V.  Conditionally on the stopped
    chain, the remainder of the curve is a fresh chordal SLE from W to V, so
    by the construction itself

        E[ Z_beta(inside component) | chain ] = |V - W|^{2h} *
            Z_{beta + bracket link}(W, images..., V),

    which is estimated by recursing on the bracket-augmented pattern.

Recursive calls always pick a nearest-neighbor link, for which the inside is
empty; the bracket augmentation therefore occurs only when a non-adjacent
link is requested at the top level.  Per-sample values obey the strong bound
prod |x_b - x_a|^{-2h} pathwise (every Poisson-kernel ratio is at most one).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .exact_pf import PartitionFnEstimate, check_points
from .linkpat import CROSSING, LinkPattern, side_split
from .loewner import evolve_chordal_ensemble
from .params import derive_params

DEFAULT_CHUNK = 25_000


@dataclass
class CascadeConfig:
    """Configuration of one cascade estimate.

    dt is the dimensionless substep scale: each Loewner substep advances
    capacity by dt * (distance to the nearest tracked point)^2; the weak
    discretization bias is linear in dt.  stop_epsilon controls when a curve
    counts as complete (target gap relative to the nearest outside point).
    """

    kappa: float
    alpha: LinkPattern
    pts: tuple
    link_choice: str = "first"          # "first" (adjacent) | "fixed" | "random"
    link: tuple | None = None           # required for link_choice="fixed"
    samples: int = 100_000
    dt: float = 5e-4
    stop_epsilon: float = 1e-3
    seed: int = 0
    chunk: int = DEFAULT_CHUNK
    threads: int = 1
    allow_nonsimple: bool = False       # architectural kappa in (4,6] path

    def validate(self):
        derive_params(self.kappa)
        upper = 6.0 if self.allow_nonsimple else 4.0
        if not 0.0 < self.kappa <= upper:
            raise ValueError(
                f"kappa={self.kappa} outside (0, {upper}]; the cascade relies on "
                "simple curves (set allow_nonsimple for the experimental (4,6] path)")
        xs = check_points(self.pts)
        if len(xs) != 2 * self.alpha.n_links:
            raise ValueError("point count does not match pattern size")
        if self.link_choice == "fixed":
            if self.link is None or not self.alpha.has_link(*self.link):
                raise ValueError(f"fixed link {self.link} is not a link of {self.alpha}")
        elif self.link_choice not in ("first", "random"):
            raise ValueError(f"unknown link_choice {self.link_choice!r}")
        if self.samples < 100:
            warnings.warn(f"samples={self.samples} is very low for a cascade estimate")
        return xs


def _first_adjacent_link(alpha: LinkPattern):
    for j in range(1, 2 * alpha.n_links):
        if alpha.has_link(j, j + 1):
            return (j, j + 1)
    raise AssertionError("planar pattern without nearest-neighbor link")


def _split_at_link(alpha: LinkPattern, a: int, b: int):
    """Remove {a,b}; relabel and split the rest into inside/outside patterns."""
    keep = [(i, j) for (i, j) in alpha.links if (i, j) != (min(a, b), max(a, b))]
    others = sorted(x for x in range(1, 2 * alpha.n_links + 1) if x not in (a, b))
    rel = {x: k + 1 for k, x in enumerate(others)}
    reduced = LinkPattern((rel[i], rel[j]) for i, j in keep)
    side_of = {rel[x]: ("in" if a < x < b else "out") for x in others}
    split = side_split(reduced, side_of) if reduced.n_links else {"in": reduced, "out": reduced}
    if split is CROSSING:
        raise AssertionError("planar pattern produced a crossing split")
    inside_cols = [k for k, x in enumerate(others) if a < x < b]
    outside_cols = [k for k, x in enumerate(others) if not a < x < b]
    empty = LinkPattern(())
    return (split.get("in", empty), inside_cols, split.get("out", empty), outside_cols)


def _positions_from_state(st):
    """Rebuild spectator positions in the W-frame from stable difference state."""
    r = st["r"]
    if r.shape[1] <= 1:
        return r.copy()
    gaps = np.exp(st["ldiff"])
    pos = np.empty_like(r)
    pos[:, 0] = r[:, 0]
    np.cumsum(gaps, axis=1, out=pos[:, 1:])
    pos[:, 1:] += r[:, :1]
    return pos


def _cascade_logvals(kappa, h, alpha, x, rng, dt, stop_eps, top_link=None):
    """Log of one cascade sample of Z_alpha per row of x; also a failure mask."""
    m = x.shape[0]
    n = alpha.n_links
    if n == 0:
        return np.zeros(m), np.zeros(m, bool)
    if n == 1:
        return -2.0 * h * np.log(x[:, 1] - x[:, 0]), np.zeros(m, bool)

    span = x[:, -1] - x[:, 0]
    xn = (x - x[:, :1]) / span[:, None]
    logv = -2.0 * n * h * np.log(span)

    a, b = top_link if top_link is not None else _first_adjacent_link(alpha)
    pat_in, cols_in, pat_out, cols_out = _split_at_link(alpha, a, b)

    spect_cols = [i for i in range(2 * n) if i not in (a - 1, b - 1)]
    st = evolve_chordal_ensemble(
        kappa, xn[:, a - 1], xn[:, b - 1], xn[:, spect_cols], rng,
        step_scale=dt, stop_epsilon=stop_eps, allow_swallow=False,
    )
    failed = st["failed"].copy()
    logv += -2.0 * h * np.log(xn[:, b - 1] - xn[:, a - 1])
    logv += h * st["lgp"].sum(axis=1)

    pos = _positions_from_state(st)
    rv = np.abs(st["rv"])

    if cols_out:
        x_out = pos[:, cols_out]
        bad = ~np.all(np.diff(x_out, axis=1) > 0.0, axis=1) if x_out.shape[1] > 1 else np.zeros(m, bool)
        failed |= bad
        x_out[bad] = np.linspace(0.0, 1.0, x_out.shape[1])  # placeholder, value discarded
        lv, fl = _cascade_logvals(kappa, h, pat_out, x_out, rng, dt, stop_eps)
        logv += lv
        failed |= fl
    if cols_in:
        # bracket-augmented pattern on (W, inside images..., V)
        x_in = np.column_stack([np.zeros(m), pos[:, cols_in], rv])
        bad = ~np.all(np.diff(x_in, axis=1) > 0.0, axis=1)
        failed |= bad
        x_in[bad] = np.linspace(0.0, 1.0, x_in.shape[1])
        shifted = [(i + 1, j + 1) for (i, j) in pat_in.links]
        aug = LinkPattern(shifted + [(1, 2 * pat_in.n_links + 2)])
        logv += 2.0 * h * np.log(rv)
        lv, fl = _cascade_logvals(kappa, h, aug, x_in, rng, dt, stop_eps)
        logv += lv
        failed |= fl
    return logv, failed


def _chunk_rng(seed, chunk_index, retry_key=None):
    key = (chunk_index,) if retry_key is None else (chunk_index,) + retry_key
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _run_chunk(cfg: CascadeConfig, xs, h, chunk_index, m, top_link):
    rng = _chunk_rng(cfg.seed, chunk_index)
    link = top_link
    if cfg.link_choice == "random":
        link = cfg.alpha.links[rng.integers(len(cfg.alpha.links))]
    x = np.tile(xs, (m, 1))
    logv, failed = _cascade_logvals(
        cfg.kappa, h, cfg.alpha, x, rng, cfg.dt, cfg.stop_epsilon, top_link=link)
    vals = np.exp(logv)
    n_retried = 0
    if failed.any():
        for i in np.where(failed)[0]:
            for attempt in range(1, 4):
                rng_i = _chunk_rng(cfg.seed, chunk_index, (int(i), attempt))
                lv, fl = _cascade_logvals(
                    cfg.kappa, h, cfg.alpha, xs[None, :], rng_i,
                    cfg.dt / 4.0 ** attempt, cfg.stop_epsilon, top_link=link)
                if not fl[0]:
                    vals[i] = math.exp(lv[0])
                    n_retried += 1
                    break
            else:
                raise RuntimeError(f"cascade sample {chunk_index}:{i} failed after retries")
    return vals, n_retried


def estimate_z(config: CascadeConfig) -> PartitionFnEstimate:
    """Cascade Monte-Carlo estimate of Z_alpha with its standard error.

    Deterministic for fixed (seed, samples, dt, stop_epsilon, chunk): sampling
    is stream-split per fixed-size chunk and reduced in chunk order.
    """
    xs = config.validate()
    h = derive_params(config.kappa).h
    top_link = None
    if config.link_choice == "fixed":
        top_link = (min(config.link), max(config.link))
    elif config.link_choice == "first":
        top_link = _first_adjacent_link(config.alpha)

    sizes = []
    remaining = config.samples
    while remaining > 0:
        sizes.append(min(config.chunk, remaining))
        remaining -= sizes[-1]

    results = [None] * len(sizes)
    n_retried = 0
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as ex:
            futs = {
                ex.submit(_run_chunk, config, xs, h, ci, m, top_link): ci
                for ci, m in enumerate(sizes)
            }
            for fut in futs:
                ci = futs[fut]
                results[ci] = fut.result()
    else:
        for ci, m in enumerate(sizes):
            results[ci] = _run_chunk(config, xs, h, ci, m, top_link)
    vals = np.concatenate([r[0] for r in results])
    n_retried = sum(r[1] for r in results)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else math.inf
    return PartitionFnEstimate(
        value=mean, abs_error=se, method="mc",
        diagnostics={
            "samples": len(vals),
            "seed": config.seed,
            "dt": config.dt,
            "stop_epsilon": config.stop_epsilon,
            "link": tuple(top_link) if top_link else "random",
            "n_retried": n_retried,
            "max_sample_value": float(vals.max()),
        },
    )


@dataclass
class SymmetryReport:
    """Two cascade estimates of the same Z_alpha through different links."""

    link1: tuple
    link2: tuple
    estimate1: PartitionFnEstimate
    estimate2: PartitionFnEstimate
    diff: float
    pooled_se: float
    z_score: float
    passed: bool
    extras: dict = field(default_factory=dict)


def symmetry_check(config: CascadeConfig, link1, link2, z_max: float = 3.0) -> SymmetryReport:
    """Estimate Z_alpha through two different links and compare.

    The construction is link-independent in expectation, so the two estimates
    must agree within noise; pass iff |difference| <= z_max pooled standard
    errors.
    """
    link1 = (min(link1), max(link1))
    link2 = (min(link2), max(link2))
    for l in (link1, link2):
        if not config.alpha.has_link(*l):
            raise ValueError(f"{l} is not a link of {config.alpha}")
    e1 = estimate_z(replace(config, link_choice="fixed", link=link1))
    e2 = estimate_z(replace(config, link_choice="fixed", link=link2, seed=config.seed + 7919))
    diff = e1.value - e2.value
    pooled = math.hypot(e1.abs_error, e2.abs_error)
    z = diff / pooled if pooled > 0 else (0.0 if link1 == link2 else math.inf)
    if link1 == link2:
        z = 0.0
    return SymmetryReport(
        link1=link1, link2=link2, estimate1=e1, estimate2=e2,
        diff=diff, pooled_se=pooled, z_score=z, passed=abs(z) <= z_max,
    )
