import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import corpus
from corpus import group
from solvkit.classes import conjugacy_classes, rational_classes
from solvkit.perm import ElementSet, is_normal, is_subgroup, subgroup_span
from solvkit.solvability import commutator_subgroup, derived_series, is_solvable, solvable_radical


def as_tuples(G, H):
    return {tuple(G.images[i]) for i in H.ids()}


@pytest.mark.parametrize("spec,solvable", [
    ("c:6", True), ("s:3", True), ("a:4", True), ("s:4", True), ("d:12", True),
    ("a:5", False), ("s:5", False), ("sl2:5", False), ("psl2:7", False),
])
def test_is_solvable_matches_tuple_oracle(spec, solvable):
    G = group(spec)
    assert corpus.solvable(as_tuples(G, G.full()), G.degree) == solvable
    assert is_solvable(G) == solvable
    assert is_solvable(G, shortcuts=False) == solvable


@given(st.lists(st.integers(0, 119), min_size=1, max_size=2))
def test_is_solvable_on_random_subgroups(ids):
    G = group("s:5")
    H = subgroup_span(G, ids)
    oracle = corpus.solvable(as_tuples(G, H), G.degree)
    assert is_solvable(G, H, shortcuts=False) == oracle == is_solvable(G, H)


@pytest.mark.parametrize("spec", ["s:4", "a:5", "sl2:5", "d:12"])
def test_commutator_subgroup(spec):
    G = group(spec)
    assert as_tuples(G, commutator_subgroup(G, G.full())) == corpus.derived(as_tuples(G, G.full()), G.degree)


def test_derived_series_of_s4():
    G = group("s:4")
    series = derived_series(G, G.full())
    assert [len(H) for H in series.chain] == [24, 12, 4, 1]
    assert series.solvable and series.length == 3


def test_derived_series_of_a5_stalls():
    G = group("a:5")
    series = derived_series(G, G.full())
    assert not series.solvable
    assert [len(H) for H in series.chain] == [60]


@pytest.mark.parametrize("spec,order", [
    ("s:4", 24), ("a:5", 1), ("s:5", 1), ("sl2:5", 2), ("direct(a:5,c:6)", 6), ("direct(a:5,c:2)", 2),
])
def test_solvable_radical(spec, order):
    G = group(spec)
    R = solvable_radical(G)
    assert len(R) == order
    assert is_subgroup(R) and is_normal(G, R) and is_solvable(G, R)


def test_radical_of_direct_product_is_the_cyclic_factor():
    G = group("direct(a:5,c:6)")
    factor = ElementSet(G, np.all(G.images[:, :5] == np.arange(5), axis=1))
    assert solvable_radical(G) == factor


# -- classes ------------------------------------------------------------------------

@pytest.mark.parametrize("spec", ["s:4", "a:5", "psl2:7", "sl2:5"])
def test_conjugacy_classes_match_tuple_orbits(spec):
    G = group(spec)
    elements = [tuple(r) for r in G.images.tolist()]
    oracle = {frozenset(corpus.conj_class(x, elements)) for x in elements}
    got = {frozenset(as_tuples(G, c)) for c in conjugacy_classes(G)}
    assert got == oracle
    assert sum(len(c) for c in conjugacy_classes(G)) == G.order


@pytest.mark.parametrize("spec", ["a:5", "psl2:7", "psl2:8", "s:5"])
def test_rational_classes_match_definition(spec):
    G = group(spec)
    elements = [tuple(r) for r in G.images.tolist()]
    where = {e: i for i, e in enumerate(elements)}
    oracle = set()
    for x in elements:
        n = corpus.order(x)
        members = set()
        for k in range(1, n + 1):
            if math.gcd(k, n) == 1:
                members |= corpus.conj_class(corpus.power(x, k), elements)
        oracle.add(frozenset(where[m] for m in members))
    rcs = rational_classes(G)
    assert {frozenset(rc.members.ids().tolist()) for rc in rcs} == oracle
    for rc in rcs:
        assert rc.rep == rc.members.min_id()
        assert rc.element_order == G.element_orders[rc.rep]


def test_a5_has_four_rational_classes():
    # the two classes of 5-cycles fuse
    assert [len(rc) for rc in rational_classes(group("a:5"))] == [1, 20, 15, 24]
