"""Solvabilizers ``Sol_G(x) = {y : <x, y> solvable}`` and the count |Solv(G)|.

Two independent counting routes are provided:

* :func:`solv_count_naive` fills the full pair matrix "is <x, y> solvable"
  and counts distinct rows;
* :func:`solv_count_rational` computes one solvabilizer per rational class,
  counts its conjugates as ``[G : N_G(Sol(x))]`` and merges classes whose
  solvabilizers are conjugate.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .classes import rational_classes
from .perm import (
    CapExceeded,
    ConsistencyError,
    ElementSet,
    GroupTable,
    generators_of,
    normalizer_of_cyclic,
    normalizer_of_set,
    right_transversal,
    span_mask,
)
from .solvability import is_solvable

DEFAULT_NAIVE_CAP = 700


class RunTimeout(RuntimeError):
    """The cooperative deadline passed between two rational classes."""


def _orbit_closure(G: GroupTable, seed: np.ndarray, maps: list[np.ndarray]) -> np.ndarray:
    """Smallest superset of ``seed`` closed under the given id permutations."""
    mask = seed.copy()
    frontier = np.flatnonzero(mask)
    while frontier.size:
        nxt = np.concatenate([m[frontier] for m in maps]) if maps else frontier[:0]
        nxt = np.unique(nxt[~mask[nxt]])
        mask[nxt] = True
        frontier = nxt
    return mask


def _pair_solvable(G: GroupTable, x: int, y: int, start: np.ndarray | None, whole_solvable: bool):
    """Solvability of ``<x, y>``; returns ``(solvable, mask or None)``.

    The span stops early once it exceeds the largest proper divisor of |G|,
    at which point it must be all of G.
    """
    m = span_mask(G, [x, y], start=start, stop_above=G.largest_proper_divisor)
    if m is None:
        return whole_solvable, None
    return is_solvable(G, ElementSet(G, m), gens=[x, y]), m


def sol(G: GroupTable, x: int) -> ElementSet:
    """``Sol_G(x)``.

    Membership is constant on orbits of ``y -> y x`` and of conjugation by
    ``N_G(<x>)``, since both preserve ``<x, y>`` up to conjugation by an
    element normalising ``<x>``.  Each tested ``y`` settles its whole orbit,
    and a solvable ``<x, y>`` settles every element of it at once.
    """
    x = G.check_id(x)
    memo = G.memo.setdefault("sol", {})
    if x in memo:
        return memo[x]
    whole = is_solvable(G)
    if x == 0 or whole:
        result = G.full()
        memo[x] = result
        return result
    N = normalizer_of_cyclic(G, x)
    maps = [G.conj_table(h) for h in generators_of(G, N)]
    maps.append(G.mul_right(np.arange(G.order), x))
    xmask = span_mask(G, [x])
    status = np.full(G.order, -1, dtype=np.int8)
    pos = 0
    while True:
        unknown = np.flatnonzero(status[pos:] < 0)
        if unknown.size == 0:
            break
        y = pos + int(unknown[0])
        pos = y
        solv, m = _pair_solvable(G, x, y, xmask, whole)
        if solv:
            seed = m
        else:
            seed = np.zeros(G.order, dtype=bool)
            seed[y] = True
        orbit = _orbit_closure(G, seed, maps)
        prior = status[orbit]
        if np.any(prior == (0 if solv else 1)):
            raise ConsistencyError(f"conflicting solvabilizer marks for x={x}")
        status[orbit] = 1 if solv else 0
    result = ElementSet(G, status == 1)
    memo[x] = result
    return result


def sol_bruteforce(G: GroupTable, x: int) -> ElementSet:
    """Literal definition: test every ``y`` by its derived series."""
    x = G.check_id(x)
    mask = np.zeros(G.order, dtype=bool)
    for y in range(G.order):
        H = ElementSet(G, span_mask(G, [x, y]))
        mask[y] = is_solvable(G, H, gens=[x, y], shortcuts=False)
    return ElementSet(G, mask)


# -- reports ------------------------------------------------------------------

@dataclass
class ClassRecord:
    rep: int
    element_order: int
    class_size: int
    sol_size: int
    normalizer_order: int
    cyclic_normalizer_order: int
    contribution: int
    dedup: str = "kept"


@dataclass
class SolvReport:
    spec: str
    order: int
    method: str
    total: int
    upper_bound: int
    classes: list[ClassRecord] = field(default_factory=list)
    millis: float = 0.0

    def to_json(self) -> dict:
        out = asdict(self)
        out["millis"] = round(self.millis, 1)
        return out


def upper_bound_cor63(G: GroupTable) -> int:
    """Sum over rational-class representatives of ``[G : N_G(<x>)]``."""
    return sum(G.order // len(normalizer_of_cyclic(G, rc.rep)) for rc in rational_classes(G))


# -- naive count ----------------------------------------------------------------

def solv_count_naive(G: GroupTable, cap: int = DEFAULT_NAIVE_CAP, spec: str | None = None,
                     deadline: float | None = None) -> SolvReport:
    """Fill the symmetric matrix ``M[x, y] = <x, y> solvable`` and count distinct rows.

    A tested pair settles its orbit under simultaneous conjugation; a solvable
    ``<x, y>`` settles every pair inside it and inside each of its conjugates.
    """
    if G.order > cap:
        raise CapExceeded(f"|G| = {G.order} above naive cap {cap}; use the rational method")
    t0 = time.perf_counter()
    n = G.order
    conj = np.stack([G.conjugates_of(x) for x in range(n)])  # conj[x, g] = x^g
    whole = is_solvable(G)
    M = np.full((n, n), 1 if whole else -1, dtype=np.int8)
    M[0, :] = 1
    M[:, 0] = 1
    for x in range(n):
        if deadline is not None and time.monotonic() > deadline:
            raise RunTimeout("deadline passed")
        while True:
            unknown = np.flatnonzero(M[x] < 0)
            if unknown.size == 0:
                break
            y = int(unknown[0])
            solv, m = _pair_solvable(G, x, y, None, whole)
            if solv:
                ids = np.flatnonzero(m)
                seen = set()
                for g in range(n):
                    S = np.sort(conj[ids, g])
                    key = S.tobytes()
                    if key in seen:
                        continue
                    seen.add(key)
                    M[np.ix_(S, S)] = 1
            else:
                M[conj[x], conj[y]] = 0
                M[conj[y], conj[x]] = 0
    if np.any(M < 0):
        raise ConsistencyError("naive pair matrix left undecided entries")
    if not np.array_equal(M, M.T):
        raise ConsistencyError("pair matrix is not symmetric")
    rows = {np.packbits(M[x] == 1).tobytes() for x in range(n)}
    report = SolvReport(spec or G.name or "?", n, "naive", len(rows), upper_bound_cor63(G))
    report.millis = (time.perf_counter() - t0) * 1000
    return report


# -- rational-class count ---------------------------------------------------------

def _class_work(G: GroupTable, rep: int) -> tuple:
    s = sol(G, rep)
    nx = normalizer_of_cyclic(G, rep)
    ns = normalizer_of_set(G, s, seed=nx)
    return rep, s.mask, ns.mask, len(nx)


def _class_work_remote(args):
    G, rep = args
    return _class_work(G, rep)


def _conjugating_element(G: GroupTable, target: ElementSet, source: ElementSet,
                         source_normalizer: ElementSet) -> int | None:
    """Some ``g`` with ``source^g == target``, searching one ``g`` per right
    coset of ``N_G(source)``; ``None`` if the sets are not conjugate."""
    if len(target) != len(source):
        return None
    ids = source.ids()
    for g in right_transversal(G, source_normalizer, check=False).reps:
        if np.all(target.mask[G.conj_ids(ids, g)]):
            return g
    return None


def solv_count_rational(G: GroupTable, spec: str | None = None, jobs: int = 1,
                        deadline: float | None = None) -> SolvReport:
    """|Solv(G)| as the sum of ``[G : N_G(Sol(x))]`` over rational classes whose
    solvabilizers are pairwise non-conjugate.

    ``deadline`` is a ``time.monotonic()`` value checked between classes.
    """
    t0 = time.perf_counter()
    classes = rational_classes(G)
    by_rep = {rc.rep: rc for rc in classes}
    # largest classes first for load balance
    todo = sorted((rc.rep for rc in classes), key=lambda r: (-len(by_rep[r]), r))
    results = {}
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_class_work_remote, (G, r)) for r in todo]
            for fut in futures:
                if deadline is not None and time.monotonic() > deadline:
                    for f in futures:
                        f.cancel()
                    raise RunTimeout("deadline passed")
                rep, smask, nsmask, nx = fut.result()
                results[rep] = (ElementSet(G, smask), ElementSet(G, nsmask), nx)
                G.memo.setdefault("sol", {})[rep] = results[rep][0]
    else:
        for r in todo:
            if deadline is not None and time.monotonic() > deadline:
                raise RunTimeout("deadline passed")
            rep, smask, nsmask, nx = _class_work(G, r)
            results[rep] = (ElementSet(G, smask), ElementSet(G, nsmask), nx)

    records = []
    kept: list[ClassRecord] = []
    for rc in classes:
        s, ns, nx = results[rc.rep]
        rec = ClassRecord(rc.rep, rc.element_order, len(rc), len(s), len(ns), nx, G.order // len(ns))
        for k in kept:
            ks = results[k.rep][0]
            if k.sol_size == rec.sol_size and _conjugating_element(G, ks, s, ns) is not None:
                rec.dedup = f"merged-into {k.rep}"
                break
        else:
            kept.append(rec)
        records.append(rec)
    total = sum(r.contribution for r in kept)
    bound = sum(G.order // r.cyclic_normalizer_order for r in records)
    if total > bound:
        raise ConsistencyError(f"count {total} exceeds the rational-class upper bound {bound}")
    report = SolvReport(spec or G.name or "?", G.order, "rational", total, bound, records)
    report.millis = (time.perf_counter() - t0) * 1000
    return report


def sol_via_max_solvables(G: GroupTable, x: int, reps) -> ElementSet:
    """Union of the conjugates ``H^g`` of maximal solvable class representatives
    that contain ``x``; must agree with :func:`sol`."""
    x = G.check_id(x)
    ox = int(G.element_orders[x])
    mask = np.zeros(G.order, dtype=bool)
    conj = G.conjugates_of(x)
    for entry in reps:
        H = entry.subgroup
        if len(H) % ox:
            continue
        hids = H.ids()
        ts = np.array(entry.transversal.reps, dtype=np.intp)
        # x in H^g  <=>  x^(g^-1) in H
        for g in ts[H.mask[conj[G.inv[ts]]]]:
            mask[G.conj_ids(hids, int(g))] = True
    result = ElementSet(G, mask)
    if result != sol(G, x):
        raise ConsistencyError(f"union of maximal solvable subgroups differs from Sol(x) at x={x}")
    return result
