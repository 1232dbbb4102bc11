"""Planar link patterns and valenced link patterns.

A link pattern is a planar pair partition of {1, ..., 2N}: every index belongs
to exactly one link {a, b} and no two links cross (a < c < b < d is forbidden).
There are Catalan(N) of them.  A valenced link pattern allows an endpoint to
carry several link ends (its valence); links are counted with multiplicity and
must still be drawable without crossings in the upper half-plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

MAX_ENUM_N = 10


def _is_planar(links) -> bool:
    for i, (a, b) in enumerate(links):
        for (c, d) in links[i + 1:]:
            lo, hi = (a, b), (c, d)
            # strict interleaving = crossing
            if lo[0] < hi[0] < lo[1] < hi[1] or hi[0] < lo[0] < hi[1] < lo[1]:
                return False
    return True


@dataclass(frozen=True)
class LinkPattern:
    """Planar pair partition of {1..2N}, stored as sorted (min, max) pairs."""

    links: tuple

    def __init__(self, links: Iterable):
        canon = tuple(sorted((min(a, b), max(a, b)) for a, b in links))
        object.__setattr__(self, "links", canon)
        self._validate()

    def _validate(self):
        seen = set()
        for a, b in self.links:
            if a == b:
                raise ValueError(f"degenerate link ({a},{b})")
            for x in (a, b):
                if x in seen:
                    raise ValueError(f"index {x} used twice")
                seen.add(x)
        n2 = 2 * len(self.links)
        if seen and seen != set(range(1, n2 + 1)):
            raise ValueError(f"indices must be exactly 1..{n2}, got {sorted(seen)}")
        if not _is_planar(self.links):
            raise ValueError(f"links cross: {self.links}")

    @property
    def n_links(self) -> int:
        return len(self.links)

    def partner(self, j: int) -> int:
        for a, b in self.links:
            if a == j:
                return b
            if b == j:
                return a
        raise KeyError(j)

    def has_link(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.links

    def __str__(self):
        return format_pattern(self)

    def __iter__(self):
        return iter(self.links)


EMPTY_PATTERN = LinkPattern(())


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def enumerate_patterns(n: int):
    """All planar pair partitions of {1..2n}, lexicographic on sorted link lists.

    Guarded at n <= 10 against combinatorial blowup.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_ENUM_N:
        raise ValueError(f"n={n} exceeds enumeration cap {MAX_ENUM_N}")

    def rec(indices):
        if not indices:
            yield ()
            return
        first = indices[0]
        # first pairs with an index leaving an even count on each side
        for k in range(1, len(indices), 2):
            mate = indices[k]
            inner = indices[1:k]
            outer = indices[k + 1:]
            for li in rec(inner):
                for lo in rec(outer):
                    yield ((first, mate),) + li + lo

    pats = [LinkPattern(links) for links in rec(tuple(range(1, 2 * n + 1)))]
    pats.sort(key=lambda p: p.links)
    return pats


def remove_link(alpha: LinkPattern, j: int) -> LinkPattern:
    """Remove the link {j, j+1} and relabel remaining indices by 1..2N-2.

    The relabeling is order-preserving.
    """
    if not alpha.has_link(j, j + 1):
        raise ValueError(f"{{{j},{j + 1}}} is not a link of {alpha}")
    keep = [(a, b) for a, b in alpha.links if (a, b) != (j, j + 1)]

    def rel(x):
        return x - 2 if x > j + 1 else x

    return LinkPattern((rel(a), rel(b)) for a, b in keep)


def insert_link(alpha_hat: LinkPattern, j: int) -> LinkPattern:
    """Inverse of remove_link: insert a nearest-neighbor link at position j."""
    n2 = 2 * alpha_hat.n_links
    if not 1 <= j <= n2 + 1:
        raise ValueError(f"insertion position {j} out of range")

    def rel(x):
        return x + 2 if x >= j else x

    links = [(rel(a), rel(b)) for a, b in alpha_hat.links]
    links.append((j, j + 1))
    return LinkPattern(links)


class Crossing:
    """Sentinel returned by side_split when a link straddles the two sides."""

    def __repr__(self):
        return "Crossing"


CROSSING = Crossing()


def side_split(alpha_hat: LinkPattern, side_of: dict):
    """Split a pattern into per-side sub-patterns given a side assignment.

    side_of maps each index of alpha_hat to one of two side labels.  Returns
    {side: LinkPattern} with order-preserving relabeling per side, or the
    CROSSING sentinel if some link has endpoints on different sides.
    """
    indices = sorted(side_of)
    expect = list(range(1, 2 * alpha_hat.n_links + 1))
    if indices != expect:
        raise ValueError(f"side assignment must cover exactly {expect}")
    sides = {}
    for s in side_of.values():
        sides.setdefault(s, [])
    for s in sides:
        sides[s] = [i for i in expect if side_of[i] == s]
    out = {}
    for s, members in sides.items():
        rel = {idx: k + 1 for k, idx in enumerate(members)}
        links = []
        for a, b in alpha_hat.links:
            if (side_of[a] == s) != (side_of[b] == s):
                return CROSSING
            if side_of[a] == s:
                links.append((rel[a], rel[b]))
        out[s] = LinkPattern(links)
    return out


def format_pattern(alpha: LinkPattern) -> str:
    """Text encoding: comma-separated pairs, e.g. '1-2,3-4'; empty pattern -> ''."""
    return ",".join(f"{a}-{b}" for a, b in alpha.links)


def parse_pattern(text: str) -> LinkPattern:
    text = text.strip()
    if not text:
        return EMPTY_PATTERN
    links = []
    for chunk in text.split(","):
        a, _, b = chunk.partition("-")
        links.append((int(a), int(b)))
    return LinkPattern(links)


@dataclass(frozen=True)
class ValencedLinkPattern:
    """Multiset of links on n endpoints with prescribed valences.

    links: tuple of (a, b) pairs with a != b, repeated by multiplicity;
    valences[j-1] is the number of link ends at endpoint j.
    """

    valences: tuple
    links: tuple

    def __init__(self, valences: Iterable, links: Iterable):
        valences = tuple(int(v) for v in valences)
        canon = tuple(sorted((min(a, b), max(a, b)) for a, b in links))
        object.__setattr__(self, "valences", valences)
        object.__setattr__(self, "links", canon)
        self._validate()

    def _validate(self):
        n = len(self.valences)
        if any(v < 1 for v in self.valences):
            raise ValueError("valences must be positive")
        if sum(self.valences) % 2:
            raise ValueError("total valence must be even")
        deg = [0] * (n + 1)
        for a, b in self.links:
            if a == b:
                raise ValueError("no link may join an endpoint to itself")
            if not (1 <= a <= n and 1 <= b <= n):
                raise ValueError(f"link ({a},{b}) outside 1..{n}")
            deg[a] += 1
            deg[b] += 1
        if tuple(deg[1:]) != self.valences:
            raise ValueError(f"link-end counts {tuple(deg[1:])} do not match valences {self.valences}")
        # planarity for multisets: distinct links may not strictly interleave
        for i, (a, b) in enumerate(self.links):
            for (c, d) in self.links[i + 1:]:
                if a < c < b < d or c < a < d < b:
                    raise ValueError(f"links ({a},{b}) and ({c},{d}) cross")

    @property
    def n_endpoints(self) -> int:
        return len(self.valences)

    def multiplicity(self, a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        return sum(1 for l in self.links if l == key)


def collapse_map(omega: ValencedLinkPattern) -> LinkPattern:
    """Open up each endpoint of omega into unit-valence points, planarly.

    Endpoint j becomes valences[j-1] consecutive points.  At each endpoint the
    attachment order is forced by planarity: left-going link ends first (nearer
    targets leftmost, inner arcs of a parallel bundle leftmost), then
    right-going ends (farther targets leftmost, outer arcs leftmost).
    """
    n = omega.n_endpoints
    base = [0] * (n + 1)
    for j in range(1, n + 1):
        base[j] = base[j - 1] + omega.valences[j - 1]
    # offsets[j] = first new index (1-based) of endpoint j minus 1
    offsets = {j: base[j - 1] for j in range(1, n + 1)}

    # enumerate link instances with a bundle depth: for m parallel (a,b) links,
    # depth 0 is the innermost arc
    instances = []
    counted = {}
    for (a, b) in omega.links:
        d = counted.get((a, b), 0)
        counted[(a, b)] = d + 1
        instances.append([a, b, d])

    # at each endpoint, sort incident ends into left-to-right copy order
    def end_sort_key(inst, at):
        a, b, depth = inst            # depth 0 = innermost arc of a bundle
        other = b if at == a else a
        m = omega.multiplicity(a, b)
        if other < at:
            # left-going: nearer target leftmost; inner arcs first
            return (0, -other, depth)
        # right-going: farther target leftmost; outer arcs first
        return (1, -other, m - 1 - depth)

    new_links = {}
    for j in range(1, n + 1):
        ends = [(i, inst) for i, inst in enumerate(instances) if j in (inst[0], inst[1])]
        # each parallel instance contributes one end per endpoint it touches
        ends.sort(key=lambda pair: end_sort_key(pair[1], j))
        for copy_idx, (i, _inst) in enumerate(ends):
            new_links.setdefault(i, []).append(offsets[j] + copy_idx + 1)

    links = [tuple(sorted(v)) for v in new_links.values()]
    return LinkPattern(links)
