import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slepf.linkpat import (CROSSING, EMPTY_PATTERN, LinkPattern,
                           ValencedLinkPattern, catalan, collapse_map,
                           enumerate_patterns, format_pattern, insert_link,
                           parse_pattern, remove_link, side_split)


def test_enumerate_counts():
    assert [len(enumerate_patterns(n)) for n in range(7)] == \
        [catalan(n) for n in range(7)]
    assert enumerate_patterns(0) == [EMPTY_PATTERN]
    assert enumerate_patterns(2) == [LinkPattern(((1, 2), (3, 4))),
                                     LinkPattern(((1, 4), (2, 3)))]


def test_enumerate_cap():
    with pytest.raises(ValueError):
        enumerate_patterns(11)


def test_pattern_validation():
    with pytest.raises(ValueError):
        LinkPattern(((1, 3), (2, 4)))          # crossing
    with pytest.raises(ValueError):
        LinkPattern(((1, 2), (2, 3)))          # reused index
    with pytest.raises(ValueError):
        LinkPattern(((1, 3),))                 # gap in index set


def test_remove_link_examples():
    assert remove_link(LinkPattern(((1, 2), (3, 4))), 1) == LinkPattern(((1, 2),))
    assert remove_link(LinkPattern(((1, 4), (2, 3))), 2) == LinkPattern(((1, 2),))
    assert remove_link(LinkPattern(((1, 2),)), 1) == EMPTY_PATTERN
    with pytest.raises(ValueError):
        remove_link(LinkPattern(((1, 4), (2, 3))), 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.data())
def test_remove_insert_roundtrip(n, data):
    pats = enumerate_patterns(n)
    alpha = data.draw(st.sampled_from(pats))
    adjacents = [j for j in range(1, 2 * n) if alpha.has_link(j, j + 1)]
    j = data.draw(st.sampled_from(adjacents))
    assert insert_link(remove_link(alpha, j), j) == alpha


def test_side_split_examples():
    one = LinkPattern(((1, 2),))
    res = side_split(one, {1: "right", 2: "right"})
    assert res["right"] == one and res.get("left", EMPTY_PATTERN) == EMPTY_PATTERN
    assert side_split(one, {1: "left", 2: "right"}) is CROSSING
    two = LinkPattern(((1, 2), (3, 4)))
    res = side_split(two, {1: "left", 2: "left", 3: "right", 4: "right"})
    assert res["left"] == one and res["right"] == one


def test_parse_format_roundtrip():
    for n in range(4):
        for alpha in enumerate_patterns(n):
            assert parse_pattern(format_pattern(alpha)) == alpha
    assert parse_pattern("") == EMPTY_PATTERN


def test_valenced_validation():
    with pytest.raises(ValueError):
        ValencedLinkPattern((1,), [(1, 1)])             # self-link
    with pytest.raises(ValueError):
        ValencedLinkPattern((2, 1, 2, 1), [(1, 3), (2, 4), (1, 3)])   # crossing
    with pytest.raises(ValueError):
        ValencedLinkPattern((2, 1), [(1, 2)])           # degree mismatch


def test_collapse_map_examples():
    unit = ValencedLinkPattern((1, 1), [(1, 2)])
    assert collapse_map(unit) == LinkPattern(((1, 2),))
    double = ValencedLinkPattern((2, 2), [(1, 2), (1, 2)])
    assert collapse_map(double) == LinkPattern(((1, 4), (2, 3)))
    # a valenced pattern on six endpoints with total valence 10 -> LP_5
    omega = ValencedLinkPattern(
        (2, 1, 2, 1, 2, 2),
        [(1, 2), (1, 6), (3, 4), (3, 5), (5, 6)],
    )
    alpha = collapse_map(omega)
    assert alpha in enumerate_patterns(5)


def _random_valenced(rng, n_max=6, v_max=3):
    # rejection-sample a planar valenced pattern by collapsing a random
    # planar pair partition onto grouped endpoints
    n_half = rng.integers(1, 4)
    alpha = enumerate_patterns(n_half)[rng.integers(catalan(n_half))]
    cuts = sorted(rng.choice(np.arange(1, 2 * n_half), size=rng.integers(0, n_half), replace=False))
    groups = np.split(np.arange(1, 2 * n_half + 1), cuts)
    owner = {}
    for g, members in enumerate(groups, start=1):
        for m in members:
            owner[int(m)] = g
    links = [(owner[a], owner[b]) for a, b in alpha.links]
    if any(a == b for a, b in links):
        return None
    valences = [sum(len([x for x in (a, b) if x == g]) for a, b in links)
                for g in range(1, len(groups) + 1)]
    try:
        return ValencedLinkPattern(valences, links)
    except ValueError:
        return None


def test_collapse_map_preserves_invariants():
    rng = np.random.default_rng(42)
    found = 0
    while found < 40:
        omega = _random_valenced(rng)
        if omega is None:
            continue
        found += 1
        alpha = collapse_map(omega)
        assert alpha.n_links == sum(omega.valences) // 2
