"""Permutations and fully enumerated permutation groups.

Conventions used throughout the package:

* composition ``(p * q)(i) = p(q(i))`` -- ``q`` is applied first;
* the group product of element ids ``a`` and ``b`` is the id of ``E[a] * E[b]``;
* conjugation is ``x^g = g^-1 * x * g`` and ``X^g = {x^g : x in X}``;
* right cosets are ``H g = {h * g : h in H}``.

Every group is enumerated in full.  Elements are sorted lexicographically by
their image lists, so the identity is always element id 0.  Subsets of a group
are dense boolean masks over element ids (:class:`ElementSet`).
"""
from __future__ import annotations

import math
import re
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_CLOSURE_CAP = 200_000
CONJ_CACHE_SIZE = 256


class GroupError(ValueError):
    """Invalid input to a group operation."""


class CapExceeded(GroupError):
    """A configured size cap was exceeded; raised instead of truncating."""


class ConsistencyError(RuntimeError):
    """An internal cross-check failed.  Always a bug, never bad input."""


class Permutation:
    """A bijection on ``{0, ..., n-1}`` stored as its image list."""

    __slots__ = ("images",)

    def __init__(self, images: Iterable[int]):
        images = tuple(int(i) for i in images)
        n = len(images)
        if n == 0:
            raise GroupError("degree-0 permutations are not allowed")
        if sorted(images) != list(range(n)):
            raise GroupError(f"not a permutation of 0..{n - 1}: {images}")
        self.images = images

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(range(n))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> Permutation:
        images = list(range(n))
        seen = set()
        for cyc in cycles:
            for a in cyc:
                if not 0 <= a < n:
                    raise GroupError(f"point {a} out of range for degree {n}")
                if a in seen:
                    raise GroupError(f"point {a} repeated in cycle notation")
                seen.add(a)
            for a, b in zip(cyc, list(cyc[1:]) + list(cyc[:1])):
                images[a] = b
        return cls(images)

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def __pow__(self, k: int) -> Permutation:
        result = Permutation.identity(self.degree)
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> Permutation:
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(inv)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self) -> list[tuple[int, ...]]:
        """Nontrivial cycles, each starting at its least point."""
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.images[start]
            while j != start:
                cyc.append(j)
                seen[j] = True
                j = self.images[j]
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def order(self) -> int:
        return element_order(self)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.images == other.images

    def __lt__(self, other: Permutation):
        return self.images < other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        cyc = "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles())
        return f"Permutation({cyc or '()'}, degree={self.degree})"


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Return ``p * q`` with ``(p * q)(i) = p(q(i))``."""
    if p.degree != q.degree:
        raise GroupError(f"degree mismatch: {p.degree} vs {q.degree}")
    pi = p.images
    return Permutation(pi[j] for j in q.images)


def element_order(p: Permutation) -> int:
    """Least ``k >= 1`` with ``p**k`` the identity (lcm of cycle lengths)."""
    return math.lcm(1, *(len(c) for c in p.cycles()))


class GroupTable:
    """A finite permutation group with every element enumerated.

    Elements are addressed by integer id; ``images[i]`` is the image list of
    element ``i``.  Instances are treated as immutable; the only mutable state
    is a handful of caches that never change observable results.
    """

    def __init__(self, images: np.ndarray, generators: Sequence[Permutation] = (), name: str | None = None):
        images = np.ascontiguousarray(images, dtype=np.int32)
        if images.ndim != 2 or images.shape[0] == 0 or images.shape[1] == 0:
            raise GroupError("a group needs at least one element of positive degree")
        order = np.lexsort(images.T[::-1])
        images = images[order]
        images.setflags(write=False)
        self.images = images
        self.order, self.degree = images.shape
        self.generators = list(generators)
        self.name = name
        if np.any(images[0] != np.arange(self.degree)):
            raise GroupError("element list does not contain the identity")
        self._build_index()
        self.inv = self._lookup_rows(self._inverse_images())
        self.gen_ids = [self.index(g) for g in self.generators]
        self._conj_cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self.memo: dict = {}

    # -- indexing -----------------------------------------------------
    def _build_index(self):
        # Pick a base: points whose pointwise stabiliser is trivial.  The
        # images of the base points then identify an element uniquely.
        E = self.images
        mask = np.ones(self.order, dtype=bool)
        base = []
        for j in range(self.degree):
            if mask.sum() == 1:
                break
            stab = mask & (E[:, j] == j)
            if stab.sum() < mask.sum():
                base.append(j)
                mask = stab
        if not base:
            base = [0]
        if self.degree ** len(base) >= 2**62:
            raise GroupError("base too long for integer element keys")
        self.base = np.array(base, dtype=np.intp)
        self._radix = self.degree ** np.arange(len(base), dtype=np.int64)
        keys = E[:, self.base].astype(np.int64) @ self._radix
        self._key_order = np.argsort(keys, kind="stable")
        self._keys_sorted = keys[self._key_order]
        if np.any(np.diff(self._keys_sorted) == 0):
            raise GroupError("duplicate elements in group table")

    def _lookup_keys(self, keys: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self._keys_sorted, keys)
        pos = np.minimum(pos, self.order - 1)
        if not np.array_equal(self._keys_sorted[pos], keys):
            raise GroupError("product left the group (element not found)")
        return self._key_order[pos]

    def _lookup_base_images(self, rows: np.ndarray) -> np.ndarray:
        """Ids of elements given their images at the base points."""
        return self._lookup_keys(rows.astype(np.int64) @ self._radix)

    def _lookup_rows(self, rows: np.ndarray) -> np.ndarray:
        ids = self._lookup_base_images(rows[..., self.base])
        if not np.array_equal(self.images[ids], rows):
            raise GroupError("permutation is not an element of this group")
        return ids

    def _inverse_images(self) -> np.ndarray:
        inv = np.empty_like(self.images)
        rows = np.arange(self.order)[:, None]
        inv[rows, self.images] = np.arange(self.degree, dtype=np.int32)[None, :]
        return inv

    def index(self, p: Permutation) -> int:
        if p.degree != self.degree:
            raise GroupError(f"degree mismatch: {p.degree} vs {self.degree}")
        return int(self._lookup_rows(np.array([p.images], dtype=np.int32))[0])

    def __contains__(self, p: Permutation) -> bool:
        try:
            self.index(p)
        except GroupError:
            return False
        return True

    def element(self, i: int) -> Permutation:
        return Permutation(self.images[i].tolist())

    @cached_property
    def elements(self) -> list[Permutation]:
        return [Permutation(row) for row in self.images.tolist()]

    def __len__(self):
        return self.order

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<GroupTable{label} order={self.order} degree={self.degree}>"

    # pickling drops the caches
    def __getstate__(self):
        state = self.__dict__.copy()
        state["_conj_cache"] = OrderedDict()
        state["memo"] = {}
        state.pop("elements", None)
        return state

    # -- arithmetic on ids ----------------------------------------------
    def check_id(self, i) -> int:
        i = int(i)
        if not 0 <= i < self.order:
            raise GroupError(f"element id {i} out of range for order {self.order}")
        return i

    def mul(self, a: int, b: int) -> int:
        row = self.images[a][self.images[b][self.base]]
        return int(self._lookup_base_images(row[None, :])[0])

    def mul_right(self, ids: np.ndarray, g: int) -> np.ndarray:
        """Ids of ``x * g`` for each ``x`` in ``ids``."""
        ids = np.asarray(ids, dtype=np.intp)
        return self._lookup_base_images(self.images[ids][:, self.images[g][self.base]])

    def mul_left(self, g: int, ids: np.ndarray) -> np.ndarray:
        """Ids of ``g * x`` for each ``x`` in ``ids``."""
        ids = np.asarray(ids, dtype=np.intp)
        return self._lookup_base_images(self.images[g][self.images[ids][:, self.base]])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def power(self, a: int, k: int) -> int:
        p = self.element(a) ** k
        return self.index(p)

    def commutator(self, a: int, b: int) -> int:
        """``[a, b] = a^-1 b^-1 a b``."""
        ai, bi = self.inverse(a), self.inverse(b)
        return self.mul(self.mul(ai, bi), self.mul(a, b))

    def conjugate(self, x: int, g: int) -> int:
        return self.mul(self.mul(self.inverse(g), x), g)

    def conjugates_of(self, x: int) -> np.ndarray:
        """``x^g`` for every ``g`` in the group, indexed by ``g``."""
        E, Einv = self.images, self._inverse_images_cached
        rows = Einv[np.arange(self.order)[:, None], E[x][E[:, self.base]]]
        return self._lookup_base_images(rows)

    @cached_property
    def _inverse_images_cached(self) -> np.ndarray:
        return self.images[self.inv]

    def conj_ids(self, ids: np.ndarray, g: int) -> np.ndarray:
        """Ids of ``x^g`` for each ``x`` in ``ids`` (uncached)."""
        E = self.images
        ginv = E[self.inv[g]]
        return self._lookup_base_images(ginv[E[np.asarray(ids, dtype=np.intp)][:, E[g][self.base]]])

    def conj_table(self, g: int) -> np.ndarray:
        """Id permutation ``i -> id(E[i]^g)``; LRU-cached per conjugator."""
        cache = self._conj_cache
        table = cache.get(g)
        if table is not None:
            cache.move_to_end(g)
            return table
        E = self.images
        ginv = E[self.inv[g]]
        rows = ginv[E[:, E[g][self.base]]]
        table = self._lookup_base_images(rows)
        table.setflags(write=False)
        cache[g] = table
        if len(cache) > CONJ_CACHE_SIZE:
            cache.popitem(last=False)
        return table

    @cached_property
    def element_orders(self) -> np.ndarray:
        out = np.empty(self.order, dtype=np.int64)
        for i, row in enumerate(self.images.tolist()):
            out[i] = element_order(Permutation(row))
        out.setflags(write=False)
        return out

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.element_orders.tolist())

    @cached_property
    def largest_proper_divisor(self) -> int:
        n = self.order
        for p in range(2, math.isqrt(n) + 1):
            if n % p == 0:
                return n // p
        return 1

    # -- subsets ----------------------------------------------------------
    def full(self) -> ElementSet:
        return ElementSet(self, np.ones(self.order, dtype=bool))

    def trivial(self) -> ElementSet:
        return self.subset([0])

    def subset(self, ids: Iterable[int]) -> ElementSet:
        mask = np.zeros(self.order, dtype=bool)
        ids = np.fromiter((self.check_id(i) for i in ids), dtype=np.intp)
        mask[ids] = True
        return ElementSet(self, mask)


class ElementSet:
    """A subset of a :class:`GroupTable`, as a dense mask over element ids."""

    __slots__ = ("owner", "mask", "_size", "_digest")

    def __init__(self, owner: GroupTable, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (owner.order,):
            raise GroupError("mask length does not match group order")
        mask.setflags(write=False)
        self.owner = owner
        self.mask = mask
        self._size = None
        self._digest = None

    def __len__(self):
        if self._size is None:
            self._size = int(np.count_nonzero(self.mask))
        return self._size

    def ids(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def __iter__(self):
        return iter(self.ids().tolist())

    def __contains__(self, i) -> bool:
        return bool(self.mask[i])

    def digest(self) -> bytes:
        if self._digest is None:
            self._digest = np.packbits(self.mask).tobytes()
        return self._digest

    def __eq__(self, other):
        return (isinstance(other, ElementSet) and other.owner is self.owner
                and np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash(self.digest())

    def __le__(self, other: ElementSet) -> bool:
        return not np.any(self.mask & ~other.mask)

    def __lt__(self, other: ElementSet) -> bool:
        return self <= other and len(self) < len(other)

    def __and__(self, other: ElementSet) -> ElementSet:
        return ElementSet(self.owner, self.mask & other.mask)

    def __or__(self, other: ElementSet) -> ElementSet:
        return ElementSet(self.owner, self.mask | other.mask)

    def min_id(self) -> int:
        return int(np.argmax(self.mask))

    def __repr__(self):
        return f"<ElementSet size={len(self)} of order {self.owner.order}>"


@dataclass(frozen=True)
class CosetTransversal:
    subgroup: ElementSet
    reps: tuple[int, ...]

    def __len__(self):
        return len(self.reps)


# -- construction -----------------------------------------------------------

def closure(generators: Sequence[Permutation], cap: int | None = DEFAULT_CLOSURE_CAP,
            name: str | None = None) -> GroupTable:
    """Enumerate the group generated by ``generators`` breadth first."""
    generators = list(generators)
    if not generators:
        raise GroupError("closure needs at least one generator")
    n = generators[0].degree
    if any(g.degree != n for g in generators):
        raise GroupError("generators have different degrees")
    gens = np.array([g.images for g in generators], dtype=np.int32)
    row_dtype = np.dtype((np.void, 4 * n))

    ident = np.arange(n, dtype=np.int32)[None, :]
    seen = {ident.view(row_dtype)[0, 0].tobytes()}
    chunks = [ident]
    frontier = ident
    total = 1
    while frontier.shape[0]:
        cand = np.ascontiguousarray(np.concatenate([frontier[:, g] for g in gens]))
        _, first = np.unique(cand.view(row_dtype)[:, 0], return_index=True)
        cand = np.ascontiguousarray(cand[np.sort(first)])
        keys = cand.view(row_dtype)[:, 0]
        keep = np.fromiter((k.tobytes() not in seen for k in keys), dtype=bool, count=len(keys))
        frontier = cand[keep]
        seen.update(k.tobytes() for k in keys[keep])
        total += frontier.shape[0]
        if cap is not None and total > cap:
            raise CapExceeded(f"group order exceeds closure cap {cap}")
        chunks.append(frontier)
    return GroupTable(np.concatenate(chunks), generators, name=name)


def direct_product(G: GroupTable, H: GroupTable, cap: int | None = DEFAULT_CLOSURE_CAP) -> GroupTable:
    """``G x H`` acting on ``degree(G) + degree(H)`` points, factors on disjoint blocks."""
    m, n = G.degree, H.degree
    gens = []
    for g in G.generators or [G.element(0)]:
        gens.append(Permutation(list(g.images) + [m + i for i in range(n)]))
    for h in H.generators or [H.element(0)]:
        gens.append(Permutation(list(range(m)) + [m + i for i in h.images]))
    name = f"{G.name}x{H.name}" if G.name and H.name else None
    return closure(gens, cap=cap, name=name)


# -- subgroups --------------------------------------------------------------

def span_mask(G: GroupTable, gens: Sequence[int], start: np.ndarray | None = None,
              stop_above: int | None = None) -> np.ndarray | None:
    """Mask of the subgroup generated by ``gens`` (ids).

    ``start`` is an optional mask of a known subset of the result to grow
    from.  When ``stop_above`` is given and more than that many elements are
    reached, returns ``None`` early.
    """
    gens = [int(g) for g in gens if g != 0]
    if start is None:
        seen = np.zeros(G.order, dtype=bool)
        seen[0] = True
    else:
        seen = start.copy()
    frontier = np.flatnonzero(seen)
    count = frontier.size
    while frontier.size and gens:
        nxt = np.concatenate([G.mul_right(frontier, g) for g in gens])
        nxt = np.unique(nxt[~seen[nxt]])
        seen[nxt] = True
        count += nxt.size
        if stop_above is not None and count > stop_above:
            return None
        frontier = nxt
    return seen


def subgroup_span(G: GroupTable, ids: Iterable[int]) -> ElementSet:
    ids = [G.check_id(i) for i in ids]
    return ElementSet(G, span_mask(G, ids))


def generators_of(G: GroupTable, H: ElementSet) -> list[int]:
    """A small generating set of the subgroup ``H``, picked greedily."""
    gens: list[int] = []
    cur = np.zeros(G.order, dtype=bool)
    cur[0] = True
    target = H.mask
    orders = G.element_orders
    # prefer high-order elements: fewer generators, fewer span passes
    candidates = H.ids()
    candidates = candidates[np.argsort(-orders[candidates], kind="stable")]
    for c in candidates:
        if cur[c]:
            continue
        gens.append(int(c))
        cur = span_mask(G, gens, start=cur)
        if np.array_equal(cur, target):
            break
    if not np.array_equal(cur, target):
        raise GroupError("set is not a subgroup")
    return gens


def is_subgroup(H: ElementSet) -> bool:
    G = H.owner
    if not H.mask[0]:
        return False
    ids = H.ids()
    if not np.all(H.mask[G.inv[ids]]):
        return False
    try:
        gens = generators_of(G, H)
    except GroupError:
        return False
    return all(np.all(H.mask[G.mul_right(ids, g)]) for g in gens)


def right_coset(G: GroupTable, H: ElementSet, g: int) -> np.ndarray:
    return G.mul_right(H.ids(), g)


def right_transversal(G: GroupTable, H: ElementSet, check: bool = True) -> CosetTransversal:
    """One representative per right coset ``H g``: the least id in the coset."""
    if check and not is_subgroup(H):
        raise GroupError("right_transversal needs a subgroup")
    covered = np.zeros(G.order, dtype=bool)
    hids = H.ids()
    reps = []
    pos = 0
    while True:
        rest = np.flatnonzero(~covered[pos:])
        if rest.size == 0:
            break
        g = pos + int(rest[0])
        reps.append(g)
        covered[G.mul_right(hids, g)] = True
        pos = g + 1
    if len(reps) * len(H) != G.order:
        raise ConsistencyError("cosets do not partition the group")
    return CosetTransversal(H, tuple(reps))


def conjugate_set(X: ElementSet, g: int) -> ElementSet:
    """``X^g = {g^-1 x g : x in X}``."""
    G = X.owner
    table = G.conj_table(G.check_id(g))
    mask = np.zeros(G.order, dtype=bool)
    mask[table[X.ids()]] = True
    return ElementSet(G, mask)


def fixes_set(X: ElementSet, g: int) -> bool:
    return bool(np.all(X.mask[X.owner.conj_ids(X.ids(), g)]))


def normalizer_of_set(G: GroupTable, X: ElementSet, seed: ElementSet | None = None) -> ElementSet:
    """``N_G(X) = {g : X^g = X}`` for an arbitrary subset ``X``.

    With ``seed`` (a subgroup known to normalise ``X``) only one element per
    right coset of the seed is tested.
    """
    if X.owner is not G:
        raise GroupError("set belongs to a different group")
    if len(X) in (0, G.order):
        return G.full()
    if seed is None:
        mask = np.fromiter((fixes_set(X, g) for g in range(G.order)), dtype=bool, count=G.order)
        return ElementSet(G, mask)
    for s in generators_of(G, seed):
        if not fixes_set(X, s):
            raise GroupError("seed does not normalise the set")
    hids = seed.ids()
    mask = np.zeros(G.order, dtype=bool)
    for g in right_transversal(G, seed, check=False).reps:
        if fixes_set(X, g):
            mask[G.mul_right(hids, g)] = True
    return ElementSet(G, mask)


def normalizer(G: GroupTable, H: ElementSet, gens: Sequence[int] | None = None) -> ElementSet:
    """Normaliser of a subgroup: the ``g`` mapping each generator of ``H`` into ``H``."""
    if gens is None:
        gens = generators_of(G, H)
    mask = np.ones(G.order, dtype=bool)
    for h in gens:
        mask &= H.mask[G.conjugates_of(h)]
    return ElementSet(G, mask)


def normalizer_of_cyclic(G: GroupTable, x: int) -> ElementSet:
    """``N_G(<x>)``: the ``g`` with ``x^g`` in ``<x>``."""
    return normalizer(G, cyclic_subgroup(G, x), gens=[x])


def cyclic_subgroup(G: GroupTable, x: int) -> ElementSet:
    return ElementSet(G, span_mask(G, [x]))


def is_normal(G: GroupTable, N: ElementSet) -> bool:
    gens = G.gen_ids or generators_of(G, G.full())
    return all(fixes_set(N, g) for g in gens)


def quotient_group(G: GroupTable, N: ElementSet, cap: int | None = DEFAULT_CLOSURE_CAP) -> GroupTable:
    """``G/N`` as the permutation action of ``G`` on the right cosets of ``N``."""
    if not is_subgroup(N) or not is_normal(G, N):
        raise GroupError("quotient needs a normal subgroup")
    coset_of = np.full(G.order, -1, dtype=np.intp)
    reps = right_transversal(G, N, check=False).reps
    nids = N.ids()
    for k, r in enumerate(reps):
        coset_of[G.mul_right(nids, r)] = k
    gens = G.gen_ids or generators_of(G, G.full())
    reps_arr = np.array(reps, dtype=np.intp)
    perms = []
    for g in gens:
        perms.append(Permutation(coset_of[G.mul_right(reps_arr, g)].tolist()))
    if len(reps) == 1:
        perms = [Permutation([0])]
    return closure(perms, cap=cap)


# -- text format ------------------------------------------------------------

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_generator(text: str, degree: int) -> Permutation:
    """Parse an image list ``0 2 1`` / ``0,2,1`` or cycle notation ``(0 1 2)(3 4)``."""
    text = text.strip()
    if text.startswith("("):
        if _CYCLE_RE.sub("", text).strip():
            raise GroupError(f"bad cycle notation: {text!r}")
        cycles = []
        for body in _CYCLE_RE.findall(text):
            pts = [int(t) for t in body.replace(",", " ").split()]
            if pts:
                cycles.append(pts)
        return Permutation.from_cycles(degree, cycles)
    images = [int(t) for t in text.replace(",", " ").split()]
    if len(images) != degree:
        raise GroupError(f"image list has {len(images)} entries, expected {degree}")
    return Permutation(images)


def parse_group_text(text: str) -> list[Permutation]:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("degree"):
        raise GroupError("group file must start with 'degree <n>'")
    try:
        degree = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise GroupError(f"bad degree line: {lines[0]!r}") from None
    if degree < 1:
        raise GroupError("degree must be positive")
    gens = []
    for ln in lines[1:]:
        if not ln.startswith("g"):
            raise GroupError(f"expected a generator line 'g ...', got {ln!r}")
        gens.append(parse_generator(ln[1:], degree))
    if not gens:
        gens.append(Permutation.identity(degree))
    return gens


def format_group_text(G_or_gens) -> str:
    if isinstance(G_or_gens, GroupTable):
        gens = G_or_gens.generators or [G_or_gens.element(0)]
    else:
        gens = list(G_or_gens)
    lines = [f"degree {gens[0].degree}"]
    lines += ["g " + " ".join(map(str, g.images)) for g in gens]
    return "\n".join(lines) + "\n"


def read_group_file(path: str | Path, cap: int | None = DEFAULT_CLOSURE_CAP) -> GroupTable:
    gens = parse_group_text(Path(path).read_text())
    return closure(gens, cap=cap, name=f"file:{path}")
