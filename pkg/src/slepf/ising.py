"""Critical square-lattice Ising model with alternating boundary arcs,
interface tracing on the dual lattice, and interface-connectivity statistics.

Spins live on a width x height grid; the outer ring is frozen according to
2N marked boundary positions with signs alternating plus/minus between
consecutive marks (plus on the arc from mark 1 to mark 2, and so on,
cyclically).  The interior is sampled by checkerboard heat-bath dynamics.
Domain walls are walked on the dual lattice keeping minus spins on the left
and turning left at four-fold ambiguities; the walls entering at the marked
dual edges connect them in a planar pairing, whose empirical distribution is
compared against the kappa=3 partition-function ratios at the conformal
images of the marks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ellipj

from .exact_pf import PATTERN_NESTED, PATTERN_SEP, z_four
from .linkpat import LinkPattern
from .specfun import elliptic_k, rect_modulus


def beta_critical() -> float:
    """Self-dual coupling of the square lattice: sinh(2 beta_c) = 1."""
    return 0.5 * math.log(1.0 + math.sqrt(2.0))


@dataclass(frozen=True)
class IsingConfig:
    """Lattice geometry, dynamics parameters, and marked boundary points.

    marks are perimeter positions of boundary dual edges: position m sits
    between counterclockwise boundary sites m-1 and m, enumerated from the
    bottom-left corner along bottom, right, top, left.
    """

    width: int
    height: int
    marks: tuple
    beta: float = field(default_factory=beta_critical)
    sweeps_between: int = 5
    burn_in: int = 1000
    samples: int = 1000
    n_chains: int = 8
    seed: int = 0

    @property
    def perimeter(self) -> int:
        return 2 * self.width + 2 * self.height - 4

    def validate(self):
        if self.width < 4 or self.height < 4:
            raise ValueError("lattice too small")
        marks = tuple(self.marks)
        if len(marks) % 2 or not marks:
            raise ValueError("need an even, positive number of marks")
        if sorted(set(marks)) != list(marks):
            raise ValueError("marks must be strictly increasing and distinct")
        if marks[0] < 0 or marks[-1] >= self.perimeter:
            raise ValueError("marks outside the perimeter")
        return marks


def corner_marks(width: int, height: int) -> tuple:
    """The four perimeter positions of the rectangle corners (N=2 layout)."""
    w, h = width, height
    return (0, w, w + h - 1, 2 * w + h - 2)


def _perimeter_sites(width, height):
    """Counterclockwise boundary sites as (row, col), starting at bottom-left."""
    w, h = width, height
    sites = [(0, c) for c in range(w)]
    sites += [(r, w - 1) for r in range(1, h)]
    sites += [(h - 1, c) for c in range(w - 2, -1, -1)]
    sites += [(r, 0) for r in range(h - 2, 0, -1)]
    return sites


def boundary_signs(config: IsingConfig) -> np.ndarray:
    """(height, width) int8 array: frozen ring signs per the alternating arcs,
    zero in the interior."""
    marks = config.validate()
    sites = _perimeter_sites(config.width, config.height)
    p = len(sites)
    sign_at = np.empty(p, dtype=np.int8)
    for b in range(p):
        # count marks passed when walking 0..b; arcs alternate starting with
        # the minus arc that precedes mark 1
        k = np.searchsorted(marks, b, side="right")
        sign_at[b] = 1 if k % 2 == 1 else -1
    out = np.zeros((config.height, config.width), dtype=np.int8)
    for b, (r, c) in enumerate(sites):
        out[r, c] = sign_at[b]
    return out


class IsingChain:
    """One heat-bath Markov chain with frozen boundary."""

    def __init__(self, config: IsingConfig, rng, init: str = "arcs"):
        self.config = config
        self.rng = rng
        self.frozen = boundary_signs(config)
        h, w = config.height, config.width
        if init == "random":
            spins = self.rng.choice(np.array([-1, 1], dtype=np.int8), size=(h, w))
        else:
            # seed each site with the sign of the nearest boundary edge point;
            # close to a typical interface layout, which shortens burn-in
            rr, cc = np.mgrid[0:h, 0:w]
            dists = np.stack([rr, h - 1 - rr, cc, w - 1 - cc])
            edge_signs = np.stack([
                np.broadcast_to(self.frozen[0, :], (h, w)),
                np.broadcast_to(self.frozen[-1, :], (h, w)),
                np.broadcast_to(self.frozen[:, :1], (h, w)),
                np.broadcast_to(self.frozen[:, -1:], (h, w)),
            ])
            pick = dists.argmin(axis=0)
            spins = np.take_along_axis(edge_signs, pick[None], axis=0)[0].copy()
        ring = self.frozen != 0
        spins[ring] = self.frozen[ring]
        self.spins = spins
        rr, cc = np.mgrid[1:h - 1, 1:w - 1]
        self._color = ((rr + cc) % 2).astype(bool)

    def sweep(self, n_sweeps: int = 1):
        s = self.spins
        beta = self.config.beta
        for _ in range(n_sweeps):
            for color in (self._color, ~self._color):
                nb = (s[:-2, 1:-1].astype(np.float64) + s[2:, 1:-1]
                      + s[1:-1, :-2] + s[1:-1, 2:])
                p_up = 1.0 / (1.0 + np.exp(-2.0 * beta * nb))
                flip = self.rng.random(p_up.shape) < p_up
                new = np.where(flip, 1, -1).astype(np.int8)
                inner = s[1:-1, 1:-1]
                inner[color] = new[color]
        return self.spins

    def energy_per_edge(self) -> float:
        s = self.spins.astype(np.int64)
        e = (s[:, :-1] * s[:, 1:]).sum() + (s[:-1, :] * s[1:, :]).sum()
        n_edges = s.shape[0] * (s.shape[1] - 1) + (s.shape[0] - 1) * s.shape[1]
        return -e / n_edges

    def magnetization(self) -> float:
        return float(self.spins[1:-1, 1:-1].mean())


def sample_spins(config: IsingConfig, n_sweeps=None, seed=None) -> np.ndarray:
    """One equilibrated spin field (burn-in sweeps of heat bath)."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    chain = IsingChain(config, rng)
    chain.sweep(config.burn_in if n_sweeps is None else n_sweeps)
    return chain.spins


try:
    from numba import njit, prange
    _HAVE_NUMBA = True
except ImportError:                                   # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*a, **k):
        def deco(f):
            return f
        return deco

    prange = range


@njit(cache=True, parallel=True)
def _heatbath_sweeps(spins, states, p_table, n_sweeps):
    """Checkerboard heat-bath sweeps on a batch of chains.

    spins: (n, h, w) int8 with frozen ring untouched; states: (n, 2) uint64
    xorshift128+ state per chain, making the batch bit-reproducible for any
    thread count.
    """
    n, h, w = spins.shape
    sh23 = np.uint64(23)
    sh17 = np.uint64(17)
    sh26 = np.uint64(26)
    sh11 = np.uint64(11)
    inv53 = 1.1102230246251565e-16          # 2**-53
    for ci in prange(n):
        s0 = states[ci, 0]
        s1 = states[ci, 1]
        for _ in range(n_sweeps):
            for color in range(2):
                for r in range(1, h - 1):
                    for c in range(1 + ((r + color) & 1), w - 1, 2):
                        nb = (spins[ci, r - 1, c] + spins[ci, r + 1, c]
                              + spins[ci, r, c - 1] + spins[ci, r, c + 1])
                        x = s0
                        y = s1
                        s0 = y
                        x ^= x << sh23
                        s1 = x ^ y ^ (x >> sh17) ^ (y >> sh26)
                        z = s1 + y
                        u = float(z >> sh11) * inv53
                        if u < p_table[(nb + 4) >> 1]:
                            spins[ci, r, c] = 1
                        else:
                            spins[ci, r, c] = -1
        states[ci, 0] = s0
        states[ci, 1] = s1


class BatchedIsingChains:
    """Many independent heat-bath chains advanced in lockstep.

    The update kernel is compiled (numba) and parallel over chains; every
    chain carries its own xorshift128+ state seeded from the configuration
    seed, so results do not depend on the thread count.
    """

    def __init__(self, config: IsingConfig, n_chains: int, seed, init: str = "arcs"):
        if not _HAVE_NUMBA:
            raise RuntimeError("BatchedIsingChains requires numba")
        self.config = config
        h, w = config.height, config.width
        template = IsingChain(config, np.random.default_rng(0), init=init).spins
        self.spins = np.broadcast_to(template, (n_chains, h, w)).copy()
        seeder = np.random.default_rng(np.random.SeedSequence(entropy=seed))
        states = seeder.integers(1, 2 ** 63 - 1, size=(n_chains, 2), dtype=np.int64)
        self.states = states.astype(np.uint64)
        if init == "random":
            ring = boundary_signs(config) != 0
            rnd = seeder.choice(np.array([-1, 1], dtype=np.int8), size=self.spins.shape)
            rnd[:, ring] = self.spins[:, ring]
            self.spins = rnd
        elif init == "arcs" and h == w and tuple(config.marks) == corner_marks(w, h):
            # the arc template slightly favors one pairing until fully
            # equilibrated; starting half the chains from the rotated and
            # spin-flipped template (the square's pairing-swapping symmetry)
            # cancels the residual equilibration bias in the pooled average
            ring = boundary_signs(config) != 0
            rotated = (-np.rot90(template)).copy()
            rotated[ring] = template[ring]
            self.spins[n_chains // 2:] = rotated
        beta = config.beta
        s_vals = np.array([-4.0, -2.0, 0.0, 2.0, 4.0])
        self._p_up = 1.0 / (1.0 + np.exp(-2.0 * beta * s_vals))

    def sweep(self, n_sweeps: int = 1):
        _heatbath_sweeps(self.spins, self.states, self._p_up, n_sweeps)
        return self.spins


# direction encoding: 0=E, 1=N, 2=W, 3=S ; steps in dual (x, y)
_STEP = {0: (1, 0), 1: (0, 1), 2: (-1, 0), 3: (0, -1)}
_LEFT = {0: 1, 1: 2, 2: 3, 3: 0}
_RIGHT = {0: 3, 1: 0, 2: 1, 3: 2}


def _mark_edges(config: IsingConfig):
    """Per mark: (entry dual vertex, entry direction).  Entry is inward."""
    sites = _perimeter_sites(config.width, config.height)
    p = len(sites)
    out = []
    for m in config.validate():
        (r1, c1), (r2, c2) = sites[(m - 1) % p], sites[m]
        if r1 == r2:            # horizontal neighbors -> vertical dual edge
            x = max(c1, c2)
            if r1 == 0:
                out.append(((x, 1), 1))            # bottom: enter northward
            else:
                out.append(((x, r1), 3))           # top: enter southward
        else:                    # vertical neighbors -> horizontal dual edge
            y = max(r1, r2)
            if c1 == 0:
                out.append(((1, y), 0))            # left: enter eastward
            else:
                out.append(((c1, y), 2))           # right: enter westward
    return out


def _wall_and_orientation(spins, vx, vy, d):
    """Is the dual edge leaving (vx, vy) in direction d a wall, traversable
    with minus on the left?  Returns False when flanking sites are missing."""
    h, w = spins.shape
    if d == 0:      # East: below (vy-1, vx), above (vy, vx)
        if not (0 <= vx < w and 1 <= vy < h):
            return False
        below, above = spins[vy - 1, vx], spins[vy, vx]
        return above == -1 and below == 1
    if d == 2:      # West along the same edge class, shifted
        if not (0 <= vx - 1 < w and 1 <= vy < h):
            return False
        below, above = spins[vy - 1, vx - 1], spins[vy, vx - 1]
        return below == -1 and above == 1
    if d == 1:      # North: left (vy, vx-1), right (vy, vx)
        if not (0 <= vy < h and 1 <= vx < w):
            return False
        left, right = spins[vy, vx - 1], spins[vy, vx]
        return left == -1 and right == 1
    # South
    if not (0 <= vy - 1 < h and 1 <= vx < w):
        return False
    left, right = spins[vy - 1, vx - 1], spins[vy - 1, vx]
    return right == -1 and left == 1


def trace_interfaces(spins: np.ndarray, config: IsingConfig) -> LinkPattern:
    """Pairing of the marked points induced by the domain walls.

    Walks each wall from its inward-oriented marked edge, keeping minus spins
    on the left and turning left at ambiguities, until it exits at another
    marked edge.
    """
    entries = _mark_edges(config)
    # exiting through a marked edge = traversing it outward from its interior end
    exit_of = {(v[0], v[1], (d + 2) % 4): i for i, (v, d) in enumerate(entries)}
    h, w = spins.shape
    max_steps = 8 * h * w
    pairing = []
    paired = set()
    for i, ((vx, vy), d) in enumerate(entries):
        if i in paired:
            continue
        if not _wall_and_orientation(spins, vx - _STEP[d][0], vy - _STEP[d][1], d):
            continue            # outward-oriented end; reached from elsewhere
        seen = set()
        steps = 0
        while True:
            steps += 1
            if steps > max_steps:
                raise RuntimeError("interface walk did not terminate")
            moved = False
            for nd in (_LEFT[d], d, _RIGHT[d]):
                if _wall_and_orientation(spins, vx, vy, nd):
                    key = (vx, vy, nd)
                    if key in seen:
                        raise RuntimeError("interface revisited a directed edge")
                    seen.add(key)
                    if key in exit_of:
                        j = exit_of[key]
                        pairing.append((i + 1, j + 1))
                        paired.update((i, j))
                        moved = None
                        break
                    sx, sy = _STEP[nd]
                    vx += sx
                    vy += sy
                    d = nd
                    moved = True
                    break
            if moved is None:
                break
            if not moved:
                raise RuntimeError("interface wall dead-ended inside the domain")
    if len(pairing) != len(entries) // 2:
        raise RuntimeError("interfaces did not pair up all marked points")
    return LinkPattern(pairing)


def predicted_corner_probs(width: int, height: int):
    """kappa=3 predictions for the corner-marked rectangle.

    The conformal map to the half-plane sends the corners (bottom-left,
    bottom-right, top-right, top-left) to (-1, 1, 1/k, -1/k); the lattice
    pairing {{1,2},{3,4}} therefore corresponds to the nested half-plane
    pattern and {{1,4},{2,3}} to the separated one.  Derivative factors
    cancel in the ratios.
    """
    r = (height - 1) / (width - 1)
    k = rect_modulus(r)
    y = (-1.0 / k, -1.0, 1.0, 1.0 / k)
    zs = z_four(3.0, PATTERN_SEP, y)
    zn = z_four(3.0, PATTERN_NESTED, y)
    tot = zs + zn
    return {
        LinkPattern(((1, 2), (3, 4))): zn / tot,
        LinkPattern(((1, 4), (2, 3))): zs / tot,
    }


@dataclass
class CrossingResult:
    counts: dict
    frequencies: dict
    stderr: dict
    predicted: dict | None
    n_samples: int
    config: IsingConfig
    diagnostics: dict = field(default_factory=dict)

    def max_abs_gap(self):
        if self.predicted is None:
            return None
        keys = set(self.frequencies) | set(self.predicted)
        return max(abs(self.frequencies.get(a, 0.0) - self.predicted.get(a, 0.0))
                   for a in keys)


def crossing_experiment(config: IsingConfig, threads: int = 1,
                        predict: bool = True) -> CrossingResult:
    """Empirical interface-connectivity distribution vs kappa=3 prediction.

    Runs n_chains independent Markov chains in a compiled batch (one
    xorshift state per chain, so the result does not depend on threads),
    retaining samples_per_chain = ceil(samples / n_chains) configurations
    from each chain after burn-in, spaced by sweeps_between.  Predictions
    are available for the corner-marked rectangle (N=2); N=1 is the trivial
    {{1,2}}.
    """
    config.validate()
    n = len(config.marks) // 2
    if n > 3:
        raise ValueError("crossing_experiment supports N <= 3")
    if threads and _HAVE_NUMBA:
        import numba
        numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))
    n_chains = min(config.n_chains, config.samples)
    per_chain = -(-config.samples // n_chains)

    batch = BatchedIsingChains(config, n_chains, seed=config.seed)
    batch.sweep(config.burn_in)
    counts = {}
    remaining = config.samples
    for s in range(per_chain):
        if s > 0:
            batch.sweep(config.sweeps_between)
        take = min(n_chains, remaining)
        for ci in range(take):
            alpha = trace_interfaces(batch.spins[ci], config)
            counts[alpha] = counts.get(alpha, 0) + 1
        remaining -= take
    total = sum(counts.values())
    freqs = {a: k / total for a, k in counts.items()}
    errs = {a: math.sqrt(f * (1.0 - f) / total) for a, f in freqs.items()}

    predicted = None
    if predict:
        if n == 1:
            predicted = {LinkPattern(((1, 2),)): 1.0}
        elif n == 2 and tuple(config.marks) == corner_marks(config.width, config.height):
            predicted = predicted_corner_probs(config.width, config.height)
        else:
            raise ValueError("prediction supported only for N=1 or corner-marked N=2; "
                             "pass predict=False for empirical-only runs")
    return CrossingResult(
        counts=counts, frequencies=freqs, stderr=errs, predicted=predicted,
        n_samples=total, config=config,
        diagnostics={"n_chains": n_chains,
                     "samples_per_chain": per_chain,
                     "sweeps_between": config.sweeps_between,
                     "burn_in": config.burn_in},
    )


def boundary_image(r: float, side: str, fraction: float) -> float:
    """Half-plane image of a rectangle boundary point (aspect r = height/width).

    side in {bottom, right, top, left}; fraction runs counterclockwise along
    the side.  The top side maps through infinity at its midpoint-preimage and
    is rejected there.
    """
    k = rect_modulus(r)
    m = k * k
    kk = elliptic_k(k)
    kp = math.sqrt(1.0 - m)
    kkp = elliptic_k(kp)
    if side == "bottom":
        u = (2.0 * fraction - 1.0) * kk
        return float(ellipj(u, m)[0])
    if side == "right":
        v = fraction * kkp
        return 1.0 / float(ellipj(v, 1.0 - m)[2])
    if side == "left":
        v = (1.0 - fraction) * kkp
        return -1.0 / float(ellipj(v, 1.0 - m)[2])
    if side == "top":
        u = (1.0 - 2.0 * fraction) * kk
        sn = float(ellipj(u, m)[0])
        if abs(sn) < 1e-12:
            raise ValueError("top-side point maps through infinity")
        return 1.0 / (k * sn)
    raise ValueError(f"unknown side {side!r}")
