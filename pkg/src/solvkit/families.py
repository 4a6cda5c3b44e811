"""Named groups: finite fields, PSL(2, q), PSL(3, 3), classical small families,
and the group-spec mini language used on the command line.

Group specs::

    a:n  s:n  c:n  d:2n          alternating, symmetric, cyclic, dihedral (order 2n)
    psl2:q  psl3:3               projective special linear groups
    direct(spec,spec)            direct product
    file:path                    group text file
    perm:n:gen;gen;...           inline generators of degree n, each either
                                 cycle notation (0 1 2)(3 4) or images 0,2,1
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

from .perm import (
    DEFAULT_CLOSURE_CAP,
    CapExceeded,
    GroupError,
    GroupTable,
    Permutation,
    closure,
    direct_product,
    parse_generator,
    read_group_file,
)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def prime_power(q: int) -> tuple[int, int] | None:
    """``(p, n)`` with ``q = p**n`` and ``p`` prime, or ``None``."""
    if q < 2:
        return None
    for p in range(2, q + 1):
        if q % p == 0:
            n = 0
            while q % p == 0:
                q //= p
                n += 1
            return (p, n) if q == 1 else None
    return None


# -- finite fields ----------------------------------------------------------

def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of ``a`` modulo monic ``m``; coefficient lists, low degree first."""
    a = a[:]
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] % p
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    return [c % p for c in a[:dm]] + [0] * max(0, dm - len(a))


def _is_irreducible(m: list[int], p: int) -> bool:
    n = len(m) - 1
    for d in range(1, n // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            f = list(low) + [1]
            if not any(_poly_mod(m, f, p)):
                return False
    return True


def least_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Monic irreducible of degree ``n`` over GF(p) with the least coefficient
    vector, comparing the highest non-leading coefficient first."""
    if n == 1:
        return (0, 1)
    for k in range(p**n):
        low = [(k // p**i) % p for i in range(n)]
        if low[0] == 0:
            continue
        m = low + [1]
        if _is_irreducible(m, p):
            return tuple(m)
    raise GroupError(f"no irreducible polynomial of degree {n} over GF({p})")


class FiniteField:
    """GF(p^n) with elements as coefficient vectors (low degree first).

    Elements are also numbered ``0 .. q-1`` by reading the coefficient vector
    as base-``p`` digits; this numbering is the canonical element order.
    """

    MAX_ORDER = 2048

    def __init__(self, p: int, n: int = 1):
        if not is_prime(p) or n < 1:
            raise GroupError(f"GF({p}^{n}) is not a finite field")
        if p**n > self.MAX_ORDER:
            raise GroupError(f"field order {p**n} above supported maximum {self.MAX_ORDER}")
        self.p, self.n, self.q = p, n, p**n
        self.modulus = least_irreducible(p, n)
        self._build_tables()

    def _build_tables(self):
        p, n, q = self.p, self.n, self.q
        m = list(self.modulus)
        self._mul = [[0] * q for _ in range(q)]
        for a in range(q):
            va = self.vector(a)
            for b in range(a, q):
                vb = self.vector(b)
                prod = [0] * (2 * n - 1)
                for i, x in enumerate(va):
                    if x:
                        for j, y in enumerate(vb):
                            prod[i + j] += x * y
                c = self.from_vector(_poly_mod(prod, m, p) if n > 1 else [prod[0] % p])
                self._mul[a][b] = self._mul[b][a] = c
        for g in range(1, q):
            if self._mult_order(g) == q - 1:
                self.generator = g
                break
        else:  # pragma: no cover - a finite field always has one
            raise GroupError("multiplicative group is not cyclic: bad modulus")
        self._inv = [0] * q
        for a in range(1, q):
            for b in range(1, q):
                if self._mul[a][b] == 1:
                    self._inv[a] = b
                    break

    def _mult_order(self, a: int) -> int:
        x, k = a, 1
        while x != 1:
            x = self._mul[x][a]
            k += 1
            if k > self.q:
                return 0
        return k

    # coefficient-vector view
    def vector(self, a: int) -> tuple[int, ...]:
        return tuple((a // self.p**i) % self.p for i in range(self.n))

    def from_vector(self, v) -> int:
        v = list(v)
        if len(v) > self.n or any(not 0 <= c < self.p for c in v):
            raise GroupError(f"{v} is not a reduced element of GF({self.q})")
        return sum(c * self.p**i for i, c in enumerate(v))

    def elements(self) -> range:
        return range(self.q)

    # arithmetic on element numbers
    def add(self, a: int, b: int) -> int:
        va, vb = self.vector(a), self.vector(b)
        return self.from_vector((x + y) % self.p for x, y in zip(va, vb))

    def neg(self, a: int) -> int:
        return self.from_vector((-x) % self.p for x in self.vector(a))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self._inv[a]

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        r = 1
        for _ in range(k):
            r = self._mul[r][a]
        return r

    def order_of(self, a: int) -> int:
        if a == 0:
            raise GroupError("zero has no multiplicative order")
        return self._mult_order(a)

    def __repr__(self):
        return f"GF({self.p}^{self.n})"


def field_arith(F: FiniteField, op: str, a, b=None):
    """Coefficient-vector arithmetic: ``op`` in add, sub, mul, inv, pow."""
    x = F.from_vector(a)
    if op == "inv":
        return F.vector(F.inv(x))
    if op == "pow":
        return F.vector(F.pow(x, int(b)))
    y = F.from_vector(b)
    return F.vector({"add": F.add, "sub": F.sub, "mul": F.mul}[op](x, y))


# -- groups -------------------------------------------------------------------

def psl2_order(q: int) -> int:
    return q * (q * q - 1) // math.gcd(2, q - 1)


def psl2(q: int, cap: int | None = DEFAULT_CLOSURE_CAP) -> GroupTable:
    """PSL(2, q) acting on the projective line.

    Points ``0 .. q-1`` are ``[a:1]`` in field-element order and point ``q``
    is ``[1:0]``.  Generators: ``z -> z + 1``, ``z -> mu z`` with ``mu`` the
    square of a primitive element, and ``z -> -1/z``.
    """
    pp = prime_power(q)
    if pp is None:
        raise GroupError(f"PSL(2, {q}): q must be a prime power")
    if cap is not None and psl2_order(q) > cap:
        raise CapExceeded(f"PSL(2, {q}) has order {psl2_order(q)}, above closure cap {cap}")
    F = FiniteField(*pp)
    inf = q
    mu = F.mul(F.generator, F.generator)
    one = 1
    translate = [F.add(a, one) for a in range(q)] + [inf]
    scale = [F.mul(mu, a) for a in range(q)] + [inf]
    invert = [inf] + [F.neg(F.inv(a)) for a in range(1, q)] + [0]
    gens = [Permutation(g) for g in (translate, scale, invert)]
    G = closure(gens, cap=cap, name=f"psl2:{q}")
    if G.order != psl2_order(q):
        raise GroupError(f"PSL(2, {q}) closure has order {G.order}, expected {psl2_order(q)}")
    return G


def sl2(q: int, cap: int | None = DEFAULT_CLOSURE_CAP) -> GroupTable:
    """SL(2, q) acting on the ``q^2 - 1`` nonzero vectors of GF(q)^2.

    Not part of the spec grammar; used as a perfect group with a nontrivial
    solvable radical (its centre).
    """
    pp = prime_power(q)
    if pp is None:
        raise GroupError(f"SL(2, {q}): q must be a prime power")
    F = FiniteField(*pp)
    vecs = [v for v in itertools.product(F.elements(), repeat=2) if any(v)]
    where = {v: i for i, v in enumerate(vecs)}
    lam = F.generator

    def act(m):
        (a, b), (c, d) = m
        return Permutation([where[(F.add(F.mul(a, x), F.mul(b, y)), F.add(F.mul(c, x), F.mul(d, y)))]
                            for x, y in vecs])

    gens = [act(((1, 1), (0, 1))), act(((0, F.neg(1)), (1, 0))), act(((lam, 0), (0, F.inv(lam))))]
    G = closure(gens, cap=cap, name=f"sl2:{q}")
    if G.order != q * (q * q - 1):
        raise GroupError(f"SL(2, {q}) closure has order {G.order}")
    return G


def _projective_points(F: FiniteField, dim: int) -> list[tuple[int, ...]]:
    pts = []
    for v in itertools.product(F.elements(), repeat=dim):
        nz = [c for c in v if c]
        if nz and nz[0] == 1:
            pts.append(v)
    return sorted(pts)


def psl3_3(cap: int | None = DEFAULT_CLOSURE_CAP) -> GroupTable:
    """PSL(3, 3) = SL(3, 3) acting on the 13 points of the projective plane."""
    F = FiniteField(3)
    pts = _projective_points(F, 3)
    where = {v: i for i, v in enumerate(pts)}

    def normalise(v):
        lead = next(c for c in v if c)
        s = F.inv(lead)
        return tuple(F.mul(s, c) for c in v)

    gens = []
    for i, j in itertools.permutations(range(3), 2):
        # elementary transvection: row i += row j
        images = []
        for v in pts:
            w = list(v)
            w[i] = F.add(w[i], w[j])
            images.append(where[normalise(w)])
        gens.append(Permutation(images))
    G = closure(gens, cap=cap, name="psl3:3")
    if G.order != 5616:
        raise GroupError(f"PSL(3, 3) closure has order {G.order}")
    return G


def cyclic(n: int, cap=DEFAULT_CLOSURE_CAP) -> GroupTable:
    if n < 1:
        raise GroupError("cyclic group needs n >= 1")
    return closure([Permutation([(i + 1) % n for i in range(n)])], cap=cap, name=f"c:{n}")


def symmetric(n: int, cap=DEFAULT_CLOSURE_CAP) -> GroupTable:
    if n < 1:
        raise GroupError("symmetric group needs n >= 1")
    if n <= 2:
        gens = [Permutation([(i + 1) % n for i in range(n)])]
    else:
        gens = [Permutation([1, 0] + list(range(2, n))), Permutation([(i + 1) % n for i in range(n)])]
    return closure(gens, cap=cap, name=f"s:{n}")


def alternating(n: int, cap=DEFAULT_CLOSURE_CAP) -> GroupTable:
    if n < 1:
        raise GroupError("alternating group needs n >= 1")
    if n < 3:
        gens = [Permutation.identity(n)]
    else:
        # 3-cycles (0 1 k) generate A_n
        gens = [Permutation.from_cycles(n, [(0, 1, k)]) for k in range(2, n)]
    return closure(gens, cap=cap, name=f"a:{n}")


def dihedral(order: int, cap=DEFAULT_CLOSURE_CAP) -> GroupTable:
    """Dihedral group of the given order ``2n`` acting on ``n >= 3`` points."""
    if order % 2 or order < 6:
        raise GroupError("dihedral order must be even and at least 6")
    n = order // 2
    rot = Permutation([(i + 1) % n for i in range(n)])
    ref = Permutation([(-i) % n for i in range(n)])
    return closure([rot, ref], cap=cap, name=f"d:{order}")


# -- specs ------------------------------------------------------------------

class SpecError(GroupError):
    """Malformed group spec; ``pos`` is the character offset of the problem."""

    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


@dataclass(frozen=True)
class GroupSpec:
    family: str
    params: tuple = ()

    def __str__(self):
        if self.family == "direct":
            return f"direct({self.params[0]},{self.params[1]})"
        if self.family == "file":
            return f"file:{self.params[0]}"
        if self.family == "perm":
            degree, gens = self.params
            cyc = []
            for g in gens:
                cs = Permutation(g).cycles()
                cyc.append("".join("(" + " ".join(map(str, c)) + ")" for c in cs) or "()")
            return f"perm:{degree}:" + ";".join(cyc)
        return f"{self.family}:{self.params[0]}"

    @cached_property
    def psl2_q(self) -> int | None:
        if self.family == "psl2":
            return self.params[0]
        return None


_INT_FAMILIES = ("a", "s", "c", "d", "psl2", "psl3")


class _SpecParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg, pos=None):
        raise SpecError(msg, self.text, self.pos if pos is None else pos)

    def parse(self) -> GroupSpec:
        spec = self.spec()
        if self.pos != len(self.text):
            self.error("unexpected trailing input")
        return spec

    def spec(self) -> GroupSpec:
        t = self.text
        start = self.pos
        if t.startswith("direct(", start):
            self.pos += len("direct(")
            left = self.spec()
            self.expect(",")
            right = self.spec()
            self.expect(")")
            return GroupSpec("direct", (left, right))
        colon = t.find(":", start)
        if colon < 0:
            self.error("expected '<family>:'")
        family = t[start:colon]
        self.pos = colon + 1
        if family in _INT_FAMILIES:
            num_start = self.pos
            while self.pos < len(t) and t[self.pos].isdigit():
                self.pos += 1
            if self.pos == num_start:
                self.error("expected an integer parameter")
            value = int(t[num_start:self.pos])
            self._check_int(family, value, num_start)
            return GroupSpec(family, (value,))
        if family == "file":
            end = self._stop()
            path = t[self.pos:end]
            if not path:
                self.error("empty file path")
            self.pos = end
            return GroupSpec("file", (path,))
        if family == "perm":
            return self._perm()
        self.error(f"unknown group family {family!r}", start)

    def _stop(self) -> int:
        # inline values end at the next ',' or ')' at this nesting level
        t, i, depth = self.text, self.pos, 0
        while i < len(t):
            if t[i] == "(":
                depth += 1
            elif t[i] == ")":
                if depth == 0:
                    break
                depth -= 1
            elif t[i] == "," and depth == 0:
                break
            i += 1
        return i

    def _perm(self) -> GroupSpec:
        t = self.text
        colon = t.find(":", self.pos)
        if colon < 0 or not t[self.pos:colon].isdigit():
            self.error("expected perm:<degree>:<generators>")
        degree = int(t[self.pos:colon])
        if degree < 1:
            self.error("degree must be positive", self.pos)
        self.pos = colon + 1
        # generators use ',' inside image lists, so read to the end or to an unmatched ')'
        end, depth = self.pos, 0
        while end < len(t):
            if t[end] == "(":
                depth += 1
            elif t[end] == ")":
                if depth == 0:
                    break
                depth -= 1
            end += 1
        body = t[self.pos:end]
        if end < len(t):
            # inside direct(...): the image-list form is ambiguous with ',', allow cycles only
            if "," in body.replace(" ", "") and not body.strip().startswith("("):
                self.error("inside direct(...) inline generators must use cycle notation")
            cut = body.find(",")
            while cut >= 0 and body[:cut].count("(") != body[:cut].count(")"):
                cut = body.find(",", cut + 1)
            if cut >= 0:
                end = self.pos + cut
                body = body[:cut]
        gens = []
        for piece in body.split(";"):
            if not piece.strip():
                continue
            try:
                gens.append(parse_generator(piece, degree).images)
            except (GroupError, ValueError) as exc:
                self.error(f"bad generator {piece!r}: {exc}")
        if not gens:
            self.error("no generators given")
        self.pos = end
        return GroupSpec("perm", (degree, tuple(gens)))

    def _check_int(self, family, value, pos):
        if family == "d" and (value % 2 or value < 6):
            self.error("dihedral order must be even and >= 6", pos)
        if family == "psl2" and (prime_power(value) is None or value < 2):
            self.error("psl2 parameter must be a prime power", pos)
        if family == "psl3" and value != 3:
            self.error("only psl3:3 is supported", pos)
        if family in ("a", "s", "c") and value < 1:
            self.error("parameter must be positive", pos)

    def expect(self, ch):
        if not self.text.startswith(ch, self.pos):
            self.error(f"expected {ch!r}")
        self.pos += len(ch)


def parse_spec(text: str) -> GroupSpec:
    return _SpecParser(text.strip()).parse()


def named_group(spec: GroupSpec | str, cap: int | None = DEFAULT_CLOSURE_CAP) -> GroupTable:
    if isinstance(spec, str):
        spec = parse_spec(spec)
    fam, params = spec.family, spec.params
    if fam == "a":
        G = alternating(params[0], cap)
    elif fam == "s":
        G = symmetric(params[0], cap)
    elif fam == "c":
        G = cyclic(params[0], cap)
    elif fam == "d":
        G = dihedral(params[0], cap)
    elif fam == "psl2":
        G = psl2(params[0], cap)
    elif fam == "psl3":
        G = psl3_3(cap)
    elif fam == "direct":
        G = direct_product(named_group(params[0], cap), named_group(params[1], cap), cap=cap)
    elif fam == "file":
        G = read_group_file(params[0], cap=cap)
    elif fam == "perm":
        G = closure([Permutation(g) for g in params[1]], cap=cap)
    else:
        raise GroupError(f"unsupported family {fam!r}")
    G.name = str(spec)
    return G
