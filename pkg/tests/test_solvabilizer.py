import math
import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

import corpus
from corpus import CORPUS, KNOWN_SOLV, NONSOLVABLE, SMALL, group
from solvkit.classes import rational_classes
from solvkit.perm import CapExceeded, closure, conjugate_set
from solvkit.solvabilizer import (
    RunTimeout,
    sol,
    sol_bruteforce,
    solv_count_naive,
    solv_count_rational,
    upper_bound_cor63,
)


def all_sols(G):
    return np.array([sol(G, x).mask for x in range(G.order)])


def test_sol_matches_tuple_oracle_on_a5():
    G = group("a:5")
    elements = [tuple(r) for r in G.images.tolist()]
    for rc in rational_classes(G):
        oracle = corpus.brute_sol(elements[rc.rep], elements, G.degree)
        assert {elements[i] for i in sol(G, rc.rep).ids()} == oracle


@pytest.mark.parametrize("spec", ["s:4", "a:5", "psl2:7", "sl2:5"])
def test_sol_matches_bruteforce(spec):
    G = group(spec)
    for rc in rational_classes(G):
        assert sol(G, rc.rep) == sol_bruteforce(G, rc.rep)


def test_sol_basics():
    G = group("psl2:7")
    assert sol(G, 0) == G.full()
    for x in range(G.order):
        assert x in sol(G, x)
        assert sol(G, x) <= G.full()


@pytest.mark.parametrize("spec", SMALL)
def test_solvabilizer_invariants_exhaustive(spec):
    """Conjugation equivariance, power invariance and symmetry for every x."""
    G = group(spec)
    S = all_sols(G)
    assert np.array_equal(S, S.T)  # y in Sol(x)  <=>  x in Sol(y)
    for x in range(G.order):
        n = int(G.element_orders[x])
        for k in range(2, n):
            if math.gcd(k, n) == 1:
                assert np.array_equal(S[G.power(x, k)], S[x])
    for g in range(G.order):
        table = G.conj_table(g)
        # Sol(x^g) = Sol(x)^g
        for x in range(G.order):
            assert np.array_equal(S[table[x]][table], S[x])


@pytest.mark.parametrize("spec", CORPUS)
def test_naive_equals_rational(spec):
    G = group(spec)
    naive = solv_count_naive(G)
    rational = solv_count_rational(G)
    assert naive.total == rational.total
    assert rational.total <= rational.upper_bound == upper_bound_cor63(G)
    if spec in NONSOLVABLE:
        assert rational.total == KNOWN_SOLV[spec]
        assert rational.total >= 32
    else:
        assert rational.total == 1


def test_a5_class_records():
    # |Sol| = 3q(q-1), 2q(q-1), 2(q+1) at q = 4 for orders 2, 3, 5
    rep = solv_count_rational(group("a:5"))
    by_order = {r.element_order: r for r in rep.classes}
    assert {o: r.sol_size for o, r in by_order.items()} == {1: 60, 2: 36, 3: 24, 5: 10}
    assert {o: r.contribution for o, r in by_order.items()} == {1: 1, 2: 15, 3: 10, 5: 6}
    assert all(r.dedup == "kept" for r in rep.classes)


def test_dedup_merges_conjugate_solvabilizers():
    rep = solv_count_rational(group("direct(a:5,c:6)"))
    merged = [r for r in rep.classes if r.dedup != "kept"]
    assert merged and rep.total == 32
    kept = {r.rep for r in rep.classes if r.dedup == "kept"}
    assert all(int(r.dedup.split()[1]) in kept for r in merged)


def test_report_json_shape():
    data = solv_count_rational(group("psl2:7"), spec="psl2:7").to_json()
    assert data["total"] == 79 and data["method"] == "rational" and data["spec"] == "psl2:7"
    assert {"rep", "sol_size", "normalizer_order", "contribution", "dedup"} <= set(data["classes"][0])


def test_parallel_run_matches_serial():
    G = group("psl2:8")
    a = solv_count_rational(G, jobs=1).to_json()
    b = solv_count_rational(G, jobs=3).to_json()
    a.pop("millis"), b.pop("millis")
    assert a == b


def test_deadline_in_the_past():
    G = group("psl2:11")
    with pytest.raises(RunTimeout):
        solv_count_rational(G, deadline=time.monotonic() - 1)
    with pytest.raises(RunTimeout):
        solv_count_naive(G, deadline=time.monotonic() - 1)


def test_naive_cap():
    with pytest.raises(CapExceeded):
        solv_count_naive(group("psl2:8"), cap=500)


@given(st.lists(st.integers(0, 119), min_size=1, max_size=2))
def test_subgroup_count_is_monotone(ids):
    # counting inside a subgroup H never exceeds counting inside G
    G = group("s:5")
    H = closure([G.element(i) for i in ids] + [G.element(0)])
    assert solv_count_rational(H).total <= solv_count_rational(G).total


@pytest.mark.parametrize("outer,inner", [("s:5", "a:5"), ("psl2:11", "a:5")])
def test_count_monotone_for_named_subgroups(outer, inner):
    assert solv_count_rational(group(inner)).total <= solv_count_rational(group(outer)).total


def test_sol_of_conjugate_set_helper_agrees():
    G = group("a:5")
    x = rational_classes(G)[2].rep
    for g in range(0, G.order, 7):
        assert sol(G, G.conjugate(x, g)) == conjugate_set(sol(G, x), g)
