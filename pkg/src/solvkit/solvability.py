"""Derived series, solvability and the solvable radical."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .perm import (
    ConsistencyError,
    ElementSet,
    GroupTable,
    generators_of,
    is_normal,
    is_subgroup,
    span_mask,
)


@dataclass(frozen=True)
class DerivedSeries:
    chain: tuple[ElementSet, ...]

    @property
    def solvable(self) -> bool:
        return len(self.chain[-1]) == 1

    @property
    def length(self) -> int:
        return len(self.chain) - 1


def _normal_closure_in(G: GroupTable, seeds: list[int], over: list[int]) -> tuple[np.ndarray, list[int]]:
    """Normal closure of ``<seeds>`` in ``<over>``; returns mask and generators."""
    gens = [s for s in dict.fromkeys(seeds) if s != 0]
    mask = span_mask(G, gens)
    changed = True
    while changed:
        changed = False
        for h in over:
            table = G.conj_table(h)
            for s in list(gens):
                t = int(table[s])
                if not mask[t]:
                    gens.append(t)
                    mask = span_mask(G, gens, start=mask)
                    changed = True
    return mask, gens


def _commutator_step(G: GroupTable, gens: list[int]) -> tuple[np.ndarray, list[int]]:
    comms = [G.commutator(a, b) for i, a in enumerate(gens) for b in gens[i + 1:]]
    return _normal_closure_in(G, comms, gens)


def commutator_subgroup(G: GroupTable, H: ElementSet, gens: list[int] | None = None) -> ElementSet:
    """``[H, H]``: normal closure in ``H`` of the commutators of a generating set."""
    gens = list(gens) if gens is not None else generators_of(G, H)
    mask, _ = _commutator_step(G, gens)
    return ElementSet(G, mask)


def derived_series(G: GroupTable, H: ElementSet, gens: list[int] | None = None) -> DerivedSeries:
    gens = list(gens) if gens is not None else generators_of(G, H)
    chain = [H]
    cap = int(math.log2(max(len(H), 1))) + 2
    while len(chain[-1]) > 1:
        if len(chain) > cap + 1:
            raise ConsistencyError("derived series longer than log2|H| + 2")
        mask, gens = _commutator_step(G, gens)
        nxt = ElementSet(G, mask)
        if len(nxt) == len(chain[-1]):
            break
        chain.append(nxt)
    return DerivedSeries(tuple(chain))


def _order_says_solvable(n: int) -> bool:
    # groups of order < 60, of odd order, or of order p^a q^b are solvable
    if n < 60 or n % 2:
        return True
    primes = 0
    m = n
    for p in range(2, math.isqrt(m) + 1):
        if m % p == 0:
            primes += 1
            while m % p == 0:
                m //= p
    if m > 1:
        primes += 1
    return primes <= 2


def is_solvable(G: GroupTable, H: ElementSet | None = None, gens: list[int] | None = None,
                shortcuts: bool = True) -> bool:
    """Whether the subgroup ``H`` (default: all of ``G``) is solvable.

    Results are memoised on the group, keyed by the subgroup's mask digest.
    With ``shortcuts`` the order tests (below 60, odd, two prime divisors)
    answer before the derived series is computed.
    """
    if H is None:
        H = G.full()
    if shortcuts and _order_says_solvable(len(H)):
        return True
    memo = G.memo.setdefault("solvable", {})
    key = H.digest()
    hit = memo.get(key)
    if hit is None:
        hit = derived_series(G, H, gens).solvable
        memo[key] = hit
    return hit


def solvable_radical(G: GroupTable) -> ElementSet:
    """R(G) as the set of elements whose solvabilizer is all of G."""
    from .classes import rational_classes
    from .solvabilizer import sol

    mask = np.zeros(G.order, dtype=bool)
    for rc in rational_classes(G):
        if len(sol(G, rc.rep)) == G.order:
            mask |= rc.members.mask
    R = ElementSet(G, mask)
    if not is_subgroup(R):
        raise ConsistencyError("radical is not a subgroup")
    if not is_normal(G, R):
        raise ConsistencyError("radical is not normal")
    if not is_solvable(G, R):
        raise ConsistencyError("radical is not solvable")
    return R
