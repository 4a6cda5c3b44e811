"""Conjugacy classes and rational classes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .perm import ElementSet, GroupTable


@dataclass(frozen=True)
class RationalClass:
    rep: int
    members: ElementSet
    element_order: int

    def __len__(self):
        return len(self.members)


def conjugacy_classes(G: GroupTable) -> list[ElementSet]:
    """Conjugation orbits, ordered by least member id."""
    cached = G.memo.get("conjugacy_classes")
    if cached is not None:
        return cached
    label = np.full(G.order, -1, dtype=np.intp)
    out = []
    for x in range(G.order):
        if label[x] >= 0:
            continue
        mask = np.zeros(G.order, dtype=bool)
        mask[G.conjugates_of(x)] = True
        label[mask] = len(out)
        out.append(ElementSet(G, mask))
    G.memo["conjugacy_classes"] = out
    G.memo["class_label"] = label
    return out


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def rational_classes(G: GroupTable) -> list[RationalClass]:
    """Fuse conjugacy classes of ``x`` and ``x^i`` for ``i`` coprime to ``|x|``."""
    cached = G.memo.get("rational_classes")
    if cached is not None:
        return cached
    ccs = conjugacy_classes(G)
    label = G.memo["class_label"]
    parent = list(range(len(ccs)))
    for k, cc in enumerate(ccs):
        x = cc.min_id()
        n = int(G.element_orders[x])
        for i in range(2, n):
            if math.gcd(i, n) == 1:
                a, b = _find(parent, k), _find(parent, int(label[G.power(x, i)]))
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict[int, np.ndarray] = {}
    for k, cc in enumerate(ccs):
        root = _find(parent, k)
        groups[root] = cc.mask if root not in groups else groups[root] | cc.mask
    out = []
    for mask in groups.values():
        members = ElementSet(G, mask)
        rep = members.min_id()
        out.append(RationalClass(rep, members, int(G.element_orders[rep])))
    out.sort(key=lambda rc: rc.rep)
    G.memo["rational_classes"] = out
    return out
