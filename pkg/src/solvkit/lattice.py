"""Subgroup lattices of small groups, maximal solvable subgroups, structure
tags, and the per-element solvabilizer tables for PSL(2, q)."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .classes import rational_classes
from .families import is_prime, prime_power
from .perm import (
    CapExceeded,
    CosetTransversal,
    ElementSet,
    GroupError,
    GroupTable,
    generators_of,
    normalizer,
    right_transversal,
    span_mask,
)
from .solvability import commutator_subgroup, is_solvable

DEFAULT_LATTICE_CAP = 1200


@dataclass
class SubgroupLattice:
    group: GroupTable
    subgroups: list[ElementSet]
    class_of: np.ndarray      # conjugacy class index of each subgroup
    contains: np.ndarray      # contains[i, j]: subgroups[i] <= subgroups[j]
    _where: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._where = {H.digest(): i for i, H in enumerate(self.subgroups)}

    def __len__(self):
        return len(self.subgroups)

    def index(self, H: ElementSet) -> int:
        return self._where[H.digest()]

    def __contains__(self, H: ElementSet) -> bool:
        return H.digest() in self._where

    @property
    def num_classes(self) -> int:
        return int(self.class_of.max()) + 1

    def class_members(self, k: int) -> list[int]:
        return np.flatnonzero(self.class_of == k).tolist()


def all_subgroups(G: GroupTable, cap: int = DEFAULT_LATTICE_CAP) -> SubgroupLattice:
    """Every subgroup of ``G``.

    Joins are taken up to conjugacy: each class representative ``H`` is joined
    with one cyclic subgroup from every ``N_G(H)``-orbit, starting from the
    trivial group and the cyclic subgroups.  Every subgroup is reached because
    it is an iterated join of cyclic subgroups.
    """
    if G.order > cap:
        raise CapExceeded(f"|G| = {G.order} above lattice cap {cap}")
    cached = G.memo.get("lattice")
    if cached is not None:
        return cached
    n = G.order
    cyc_masks, cyc_gen = [], []
    cyc_of = np.full(n, -1, dtype=np.intp)
    seen_cyc: dict[bytes, int] = {}
    for x in range(n):
        m = span_mask(G, [x])
        key = np.packbits(m).tobytes()
        k = seen_cyc.get(key)
        if k is None:
            k = len(cyc_masks)
            seen_cyc[key] = k
            cyc_masks.append(m)
            cyc_gen.append(x)
        cyc_of[x] = k
    cyc_gen_arr = np.array(cyc_gen, dtype=np.intp)

    class_of: dict[bytes, int] = {}
    all_masks: list[np.ndarray] = []
    all_class: list[int] = []
    reps: list[tuple[np.ndarray, list[int]]] = []

    def register(mask, gens):
        key = np.packbits(mask).tobytes()
        if key in class_of:
            return
        k = len(reps)
        H = ElementSet(G, mask)
        hgens = gens if gens else []
        N = normalizer(G, H, gens=hgens)
        for g in right_transversal(G, N, check=False).reps:
            cm = np.zeros(n, dtype=bool)
            cm[G.conj_ids(H.ids(), g)] = True
            ck = np.packbits(cm).tobytes()
            if ck not in class_of:
                class_of[ck] = k
                all_masks.append(cm)
                all_class.append(k)
        reps.append((mask, hgens, N))

    trivial = np.zeros(n, dtype=bool)
    trivial[0] = True
    register(trivial, [])
    for k, x in enumerate(cyc_gen):
        if x:
            register(cyc_masks[k], [x])
    i = 0
    while i < len(reps):
        mask, hgens, N = reps[i]
        i += 1
        # one cyclic subgroup per N(H)-orbit
        images = [cyc_of[G.conj_table(h)[cyc_gen_arr]] for h in generators_of(G, N)]
        done = np.zeros(len(cyc_gen), dtype=bool)
        for k in range(len(cyc_gen)):
            if done[k]:
                continue
            orbit = np.zeros(len(cyc_gen), dtype=bool)
            orbit[k] = True
            frontier = np.array([k])
            while frontier.size:
                nxt = np.concatenate([img[frontier] for img in images]) if images else frontier[:0]
                nxt = np.unique(nxt[~orbit[nxt]])
                orbit[nxt] = True
                frontier = nxt
            done |= orbit
            c = cyc_gen[k]
            if mask[c]:
                continue
            gens = hgens + [c]
            joined = span_mask(G, gens, start=mask)
            register(joined, gens)

    order = sorted(range(len(all_masks)), key=lambda j: (int(all_masks[j].sum()), np.flatnonzero(all_masks[j]).tolist()))
    masks = np.array([all_masks[j] for j in order])
    # renumber classes by first appearance in the sorted list
    remap: dict[int, int] = {}
    cls = []
    for j in order:
        c = all_class[j]
        if c not in remap:
            remap[c] = len(remap)
        cls.append(remap[c])
    A = masks.astype(np.float32)
    contains = (A @ (1.0 - A).T) == 0
    L = SubgroupLattice(G, [ElementSet(G, m) for m in masks], np.array(cls), contains)
    G.memo["lattice"] = L
    return L


def _maximal_among(L: SubgroupLattice, candidates: list[int]) -> list[int]:
    cand = np.array(candidates, dtype=np.intp)
    if cand.size == 0:
        return []
    sub = L.contains[np.ix_(cand, cand)]
    np.fill_diagonal(sub, False)
    return cand[~sub.any(axis=1)].tolist()


def maximal_subgroups(G: GroupTable, L: SubgroupLattice | None = None) -> list[ElementSet]:
    L = L or all_subgroups(G)
    top = L.index(G.full())
    proper = [i for i in range(len(L)) if i != top]
    return [L.subgroups[i] for i in _maximal_among(L, proper)]


def _maximal_subgroups_of(L: SubgroupLattice, h: int) -> list[int]:
    inside = [i for i in np.flatnonzero(L.contains[:, h]).tolist() if i != h]
    return _maximal_among(L, inside)


@dataclass
class MaxSolvEntry:
    subgroup: ElementSet
    normalizer: ElementSet
    transversal: CosetTransversal

    @property
    def num_conjugates(self) -> int:
        return len(self.transversal)


def max_solv_reps(G: GroupTable, L: SubgroupLattice | None = None,
                  cap: int = DEFAULT_LATTICE_CAP) -> list[MaxSolvEntry]:
    """Conjugacy class representatives of the maximal solvable subgroups.

    Walk maximal-subgroup class representatives, keeping the solvable ones and
    recursing into the others; then drop any candidate conjugate to, or
    conjugate into, another kept candidate.
    """
    L = L or all_subgroups(G, cap)
    top = L.index(G.full())
    candidates: list[int] = []
    visited_classes: set[int] = set()

    def walk(h: int):
        reps_by_class: dict[int, int] = {}
        for m in _maximal_subgroups_of(L, h):
            reps_by_class.setdefault(int(L.class_of[m]), m)
        for c, m in sorted(reps_by_class.items(), key=lambda cm: cm[1]):
            if c in visited_classes:
                continue
            visited_classes.add(c)
            if is_solvable(G, L.subgroups[m]):
                candidates.append(m)
            else:
                walk(m)

    if is_solvable(G):
        candidates = [top]
    else:
        walk(top)

    kept: list[int] = []
    for m in sorted(candidates, key=lambda i: (-len(L.subgroups[i]), i)):
        conj = L.class_members(int(L.class_of[m]))
        if any(L.contains[conj, k].any() for k in kept):
            continue
        kept.append(m)
    out = []
    for m in sorted(kept, key=lambda i: (-len(L.subgroups[i]), i)):
        H = L.subgroups[m]
        N = normalizer(G, H)
        out.append(MaxSolvEntry(H, N, right_transversal(G, N, check=False)))
    return out


def expand_conjugates(G: GroupTable, entries: list[MaxSolvEntry]) -> list[tuple[int, ElementSet]]:
    """All conjugates ``H^g`` of each entry, tagged with the entry index."""
    out = []
    for k, e in enumerate(entries):
        hids = e.subgroup.ids()
        for g in e.transversal.reps:
            mask = np.zeros(G.order, dtype=bool)
            mask[G.conj_ids(hids, g)] = True
            out.append((k, ElementSet(G, mask)))
    return out


# -- structure tags ---------------------------------------------------------

@dataclass(frozen=True, order=True)
class StructureTag:
    kind: str
    params: tuple = ()

    def __str__(self):
        if not self.params:
            return self.kind
        return f"{self.kind}({', '.join(map(str, self.params))})"


def _is_abelian(G: GroupTable, gens: list[int]) -> bool:
    return all(G.mul(a, b) == G.mul(b, a) for i, a in enumerate(gens) for b in gens[i + 1:])


def classify_structure(G: GroupTable, H: ElementSet) -> StructureTag:
    """Tag ``H`` as one of the shapes that label the solvabilizer tables.

    Predicates are tried in order: trivial, cyclic, dihedral (order >= 6),
    elementary abelian, A4, S4, elementary-abelian-by-cyclic, other.
    """
    n = len(H)
    if n == 1:
        return StructureTag("trivial")
    ids = H.ids()
    orders = G.element_orders[ids]
    if orders.max() == n:
        return StructureTag("cyclic", (n,))
    if n % 2 == 0 and n >= 6:
        half = n // 2
        invols = ids[orders == 2]
        for c in ids[orders == half]:
            cinv = G.inverse(int(c))
            cyc = span_mask(G, [int(c)])
            outside = invols[~cyc[invols]]
            # t c t = c^-1 for some involution t outside <c>
            if any(G.conjugate(int(c), int(t)) == cinv for t in outside):
                return StructureTag("dihedral", (n,))
    gens = generators_of(G, H)
    if _is_abelian(G, gens):
        nontriv = set(orders.tolist()) - {1}
        if len(nontriv) == 1 and is_prime(next(iter(nontriv))):
            p = next(iter(nontriv))
            return StructureTag("elementary-abelian", (p, prime_power(n)[1]))
    if n in (12, 24):
        D = commutator_subgroup(G, H, gens)
        if n == 12 and len(D) == 4:
            return StructureTag("A4")
        if n == 24 and len(D) == 12 and len(commutator_subgroup(G, D)) == 4:
            return StructureTag("S4")
    for p in sorted({int(q) for q in _prime_factors(n)}):
        pk = p ** _valuation(n, p)
        m = n // pk
        if m == 1:
            continue
        pel = ids[orders == p]
        if pel.size != pk - 1:
            continue
        P = np.zeros(G.order, dtype=bool)
        P[0] = True
        P[pel] = True
        Pset = ElementSet(G, P)
        if len(ElementSet(G, span_mask(G, pel.tolist()))) != pk:
            continue
        if not _is_abelian(G, generators_of(G, Pset)):
            continue
        if np.any(orders == m):
            return StructureTag("elem-abelian-by-cyclic", (pk, m))
    return StructureTag("other", (n,))


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _valuation(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


# -- solvabilizer tables ------------------------------------------------------------

class NoTableApplies(GroupError):
    """The group is not covered by any solvabilizer table."""


class ExcludedSpecialCase(NoTableApplies):
    """PSL(2, 7): its element orders 3 and 4 fall in both torus columns."""


@dataclass(frozen=True)
class TableSpec:
    family: str
    q: int
    number: int
    columns: tuple[str, ...]
    rows: tuple[tuple[str, StructureTag], ...]
    counts: tuple[tuple[int, ...], ...]     # counts[row][column]
    sol_sizes: tuple[int, ...]


def _ints(*vals) -> tuple[int, ...]:
    out = []
    for v in vals:
        v = Fraction(v)
        if v.denominator != 1:
            raise GroupError(f"table cell {v} is not an integer")
        out.append(int(v))
    return tuple(out)


def table_family(q: int) -> str:
    pp = prime_power(q)
    if pp is None:
        raise NoTableApplies(f"{q} is not a prime power")
    p, n = pp
    if q == 7:
        raise ExcludedSpecialCase("PSL(2, 7) is excluded: elements of order 3 and 4 are overcounted")
    if p == 2 and n >= 2:
        return "psl2-even"
    if p == 3 and n % 2 == 1 and n >= 3:
        return "psl2-odd-3"
    if n == 1 and p > 7:
        return "psl2-prime"
    raise NoTableApplies(f"no solvabilizer table covers PSL(2, {q})")


def table_spec(q: int) -> TableSpec:
    fam = table_family(q)
    F = Fraction
    if fam == "psl2-even":
        top = StructureTag("A4") if q == 4 else StructureTag("elem-abelian-by-cyclic", (q, q - 1))
        return TableSpec(fam, q, 1, ("2", "q-1", "q+1"),
                         (("C_2^n : C_{q-1}", top),
                          ("D_{2(q-1)}", StructureTag("dihedral", (2 * (q - 1),))),
                          ("D_{2(q+1)}", StructureTag("dihedral", (2 * (q + 1),)))),
                         (_ints(1, 2, 0), _ints(F(q, 2), 1, 0), _ints(F(q, 2), 0, 1)),
                         _ints(3 * q * (q - 1), 2 * q * (q - 1), 2 * (q + 1)))
    if fam == "psl2-odd-3":
        return TableSpec(fam, q, 2, ("2", "3", "q-1", "q+1"),
                         (("C_3^n : C_{(q-1)/2}", StructureTag("elem-abelian-by-cyclic", (q, (q - 1) // 2))),
                          ("D_{q-1}", StructureTag("dihedral", (q - 1,))),
                          ("D_{q+1}", StructureTag("dihedral", (q + 1,))),
                          ("A_4", StructureTag("A4"))),
                         (_ints(0, 1, 2, 0), _ints(F(q + 1, 2), 0, 1, 0),
                          _ints(F(q + 3, 2), 0, 0, 1), _ints(F(q + 1, 4), F(q, 3), 0, 0)),
                         _ints(q * (q + 1), F(q * (q + 5), 2), q * (q - 1), q + 1))
    p = q
    case = p % 24
    h = F(1, 2)
    cp = ("C_p : C_{(p-1)/2}", StructureTag("elem-abelian-by-cyclic", (p, (p - 1) // 2)))
    dm = ("D_{p-1}", StructureTag("dihedral", (p - 1,)))
    dp = ("D_{p+1}", StructureTag("dihedral", (p + 1,)))
    s4 = ("S_4", StructureTag("S4"))
    a4 = ("A_4", StructureTag("A4"))
    six = ("2", "3", "4", "p", "p-1", "p+1")
    five = ("2", "3", "p", "p-1", "p+1")
    tail = (F(p * (p - 1), 2), p * (p - 1), p + 1)
    if case == 1:
        return TableSpec(fam, q, 4, six, (cp, dm, dp, s4),
                         (_ints(2, 2, 2, 1, 2, 0), _ints((p + 1) * h, 1, 1, 0, 1, 0),
                          _ints((p - 1) * h, 0, 0, 0, 0, 1), _ints(F(3 * (p - 1), 4), F(p - 1, 3), F(p - 1, 4), 0, 0, 0)),
                         _ints((p - 1) * (2 * p + 3), (p - 1) * (p + 6), (p - 1) * (p + 4), *tail))
    if case == 5:
        return TableSpec(fam, q, 5, five, (cp, dm, dp, a4),
                         (_ints(2, 0, 1, 2, 0), _ints((p + 1) * h, 0, 0, 1, 0),
                          _ints((p - 1) * h, 1, 0, 0, 1), _ints(F(p - 1, 4), F(p + 1, 3), 0, 0, 0)),
                         _ints((p - 1) * (2 * p - 1), 4 * (p + 1), *tail))
    if case == 7:
        return TableSpec(fam, q, 6, six, (cp, dm, dp, s4),
                         (_ints(0, 2, 0, 1, 2, 0), _ints((p + 1) * h, 1, 0, 0, 1, 0),
                          _ints((p + 3) * h, 0, 1, 0, 0, 1), _ints(F(3 * (p + 1), 4), F(p - 1, 3), F(p + 1, 4), 0, 0, 0)),
                         _ints((p + 1) * (p + 4), (p - 1) * (p + 6), 5 * (p + 1), *tail))
    if case == 11:
        return TableSpec(fam, q, 7, five, (cp, dm, dp, a4),
                         (_ints(0, 0, 1, 2, 0), _ints((p + 1) * h, 0, 0, 1, 0),
                          _ints((p + 3) * h, 1, 0, 0, 1), _ints(F(p + 1, 4), F(p + 1, 3), 0, 0, 0)),
                         _ints(p * (p + 1), 4 * (p + 1), *tail))
    if case == 13:
        return TableSpec(fam, q, 8, five, (cp, dm, dp, a4),
                         (_ints(2, 2, 1, 2, 0), _ints((p + 1) * h, 1, 0, 1, 0),
                          _ints((p - 1) * h, 0, 0, 0, 1), _ints(F(p - 1, 4), F(p - 1, 3), 0, 0, 0)),
                         _ints((p - 1) * (2 * p - 1), (p - 1) * (p + 3), *tail))
    if case == 17:
        return TableSpec(fam, q, 9, six, (cp, dm, dp, s4),
                         (_ints(2, 0, 2, 1, 2, 0), _ints((p + 1) * h, 0, 1, 0, 1, 0),
                          _ints((p - 1) * h, 1, 0, 0, 0, 1), _ints(F(3 * (p - 1), 4), F(p + 1, 3), F(p - 1, 4), 0, 0, 0)),
                         _ints((p - 1) * (2 * p + 3), 7 * (p + 1), (p - 1) * (p + 4), *tail))
    if case == 19:
        return TableSpec(fam, q, 10, five, (cp, dm, dp, a4),
                         (_ints(0, 2, 1, 2, 0), _ints((p + 1) * h, 1, 0, 1, 0),
                          _ints((p + 3) * h, 0, 0, 0, 1), _ints(F(p + 1, 4), F(p - 1, 3), 0, 0, 0)),
                         _ints(p * (p + 1), (p - 1) * (p + 3), *tail))
    if case == 23:
        return TableSpec(fam, q, 11, six, (cp, dm, dp, s4),
                         (_ints(0, 0, 0, 1, 2, 0), _ints((p + 1) * h, 0, 0, 0, 1, 0),
                          _ints((p + 3) * h, 1, 1, 0, 0, 1), _ints(F(3 * (p + 1), 4), F(p + 1, 3), F(p + 1, 4), 0, 0, 0)),
                         _ints((p + 1) * (p + 4), 7 * (p + 1), 5 * (p + 1), *tail))
    raise NoTableApplies(f"p = {p} is not a unit modulo 24")  # pragma: no cover


def column_for_order(spec: TableSpec, order: int) -> str | None:
    """Exact-order columns (2, 3, 4, p) win over the torus columns."""
    q = spec.q
    exact = {"2": 2, "3": 3, "4": 4, "p": q}
    for col in spec.columns:
        if col in exact and exact[col] == order:
            return col
    for col, d in (("q-1", q - 1), ("p-1", q - 1), ("q+1", q + 1), ("p+1", q + 1)):
        if col in spec.columns and d % order == 0:
            return col
    return None


@dataclass
class TableCell:
    rep: int
    element_order: int
    column: str
    row: str
    expected: int | None
    observed: int | None
    status: str   # pass | fail | skipped | absent


@dataclass
class TableReport:
    spec: str
    q: int
    family: str
    table: int
    cells: list[TableCell]
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """No checked cell disagrees (skipped cells do not count)."""
        return not self.failures

    @property
    def complete(self) -> bool:
        return all(c.status == "pass" for c in self.cells)

    @property
    def failures(self) -> list[TableCell]:
        return [c for c in self.cells if c.status == "fail"]

    def to_json(self) -> dict:
        return {
            "spec": self.spec, "q": self.q, "family": self.family, "table": self.table,
            "passed": self.passed, "complete": self.complete, "notes": self.notes,
            "cells": [vars(c) for c in self.cells],
        }

    def render(self) -> str:
        reps = list(dict.fromkeys((c.rep, c.element_order, c.column) for c in self.cells))
        rows = list(dict.fromkeys(c.row for c in self.cells))
        lookup = {(c.rep, c.row): c for c in self.cells}
        header = ["row"] + [f"|x|={o} [{col}]" for _, o, col in reps]
        body = []
        for r in rows:
            line = [r]
            for rep, _, _ in reps:
                c = lookup.get((rep, r))
                if c is None:
                    line.append("")
                elif c.status == "skipped":
                    line.append(f"{c.expected} (skip)")
                elif c.status == "absent":
                    line.append("absent")
                else:
                    mark = "ok" if c.status == "pass" else "FAIL"
                    line.append(f"{c.observed}/{c.expected} {mark}")
            body.append(line)
        widths = [max(len(x[i]) for x in [header] + body) for i in range(len(header))]
        fmt = lambda cells: "  ".join(s.ljust(w) for s, w in zip(cells, widths)).rstrip()
        out = [f"Table {self.table} ({self.family}, q = {self.q}) for {self.spec}: observed/expected",
               fmt(header), fmt(["-" * w for w in widths])]
        out += [fmt(b) for b in body]
        out += [f"note: {n}" for n in self.notes]
        out.append(("PASS" if self.complete else "PASS (partial)") if self.passed else "FAIL")
        return "\n".join(out)


def verify_table(G: GroupTable, q: int, lattice_cap: int = DEFAULT_LATTICE_CAP,
                 spec: str | None = None) -> TableReport:
    """Check, for one element per rational class, |Sol(x)| and the number of
    maximal solvable subgroups of each shape containing ``x`` against the
    table for PSL(2, q)."""
    from .families import psl2_order
    from .solvabilizer import sol

    if G.order != psl2_order(q):
        raise GroupError(f"group order {G.order} is not |PSL(2, {q})|")
    ts = table_spec(q)
    report = TableReport(spec or G.name or f"psl2:{q}", q, ts.family, ts.number, [])
    containing = None
    if G.order <= lattice_cap:
        entries = max_solv_reps(G, all_subgroups(G, lattice_cap))
        tags = [classify_structure(G, e.subgroup) for e in entries]
        conj = expand_conjugates(G, entries)
        conj_tags = [tags[k] for k, _ in conj]
        conj_masks = np.array([H.mask for _, H in conj])
        containing = (conj_tags, conj_masks)
    else:
        report.notes.append(f"|G| = {G.order} above lattice cap {lattice_cap}: containment cells skipped")
    row_tags = {tag: name for name, tag in ts.rows}
    for rc in sorted(rational_classes(G), key=lambda rc: (rc.element_order, rc.rep)):
        if rc.rep == 0:
            continue
        col = column_for_order(ts, rc.element_order)
        if col is None:
            report.cells.append(TableCell(rc.rep, rc.element_order, "-", "|Sol|", None, len(sol(G, rc.rep)), "absent"))
            continue
        ci = ts.columns.index(col)
        counts: dict[StructureTag, int] = {}
        if containing is not None:
            conj_tags, conj_masks = containing
            for t, hit in zip(conj_tags, conj_masks[:, rc.rep]):
                if hit:
                    counts[t] = counts.get(t, 0) + 1
        for ri, (name, tag) in enumerate(ts.rows):
            exp = ts.counts[ri][ci]
            if containing is None:
                report.cells.append(TableCell(rc.rep, rc.element_order, col, name, exp, None, "skipped"))
            else:
                obs = counts.get(tag, 0)
                report.cells.append(TableCell(rc.rep, rc.element_order, col, name, exp, obs,
                                              "pass" if obs == exp else "fail"))
        if containing is not None:
            for tag, c in sorted(counts.items()):
                if tag not in row_tags:
                    report.cells.append(TableCell(rc.rep, rc.element_order, col, f"other: {tag}", 0, c, "fail"))
        size = len(sol(G, rc.rep))
        exp = ts.sol_sizes[ci]
        report.cells.append(TableCell(rc.rep, rc.element_order, col, "|Sol|", exp, size,
                                      "pass" if size == exp else "fail"))
    return report
