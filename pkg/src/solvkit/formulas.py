"""Closed-form values of |Solv(G)| for the families where they are known,
the distinctness check over minimal simple groups, and the lower bound 32."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .families import GroupSpec, is_prime, prime_power

INT64_MAX = 2 ** 63 - 1

TAGS = ("psl2-even", "psl2-3odd", "psl2-prime", "suzuki", "psl3-3", "psl2-7-special")

# |Solv(PSL(2, p))| for p > 7, by p mod 24, as (a, b, c) in a p^2 + b p + c
PRIME_CASES = {
    1: (Fraction(5, 2), Fraction(5, 2), 2),
    5: (2, 1, 2),
    7: (Fraction(5, 2), Fraction(1, 2), 2),
    11: (2, 0, 2),
    13: (2, 2, 2),
    17: (Fraction(5, 2), Fraction(3, 2), 2),
    19: (2, 1, 2),
    23: (Fraction(5, 2), Fraction(-1, 2), 2),
}


class UnsupportedFormula(ValueError):
    """No closed form covers the requested group or parameter."""


@dataclass(frozen=True)
class FormulaFamily:
    """A family tag with its parameter.

    ``param`` is the exponent ``n`` for ``psl2-even`` (q = 2^n) and
    ``psl2-3odd`` (q = 3^n), the prime ``p`` for ``psl2-prime``, the odd prime
    ``p`` for ``suzuki`` (q = 2^p), and unused for the two single groups.
    """

    tag: str
    param: int | None = None

    def __post_init__(self):
        t, n = self.tag, self.param
        if t not in TAGS:
            raise UnsupportedFormula(f"unknown formula family {t!r}")
        if t == "psl2-even" and not (isinstance(n, int) and n >= 2):
            raise UnsupportedFormula("2q^2 needs q = 2^n with n >= 2")
        if t == "psl2-3odd" and not (isinstance(n, int) and n >= 3 and n % 2 == 1):
            raise UnsupportedFormula("(4q^2 - q + 1)/2 needs q = 3^n with n an odd integer, n >= 3")
        if t == "psl2-prime":
            if n == 5:
                raise UnsupportedFormula("p = 5: PSL(2, 5) is A5, use a:5 or the value 32")
            if n == 7:
                raise UnsupportedFormula("p = 7 is the special case psl2-7-special (79)")
            if not (isinstance(n, int) and n > 7 and is_prime(n)):
                raise UnsupportedFormula("the PSL(2, p) values need p > 7 prime")
        if t == "suzuki" and not (isinstance(n, int) and n > 2 and is_prime(n)):
            raise UnsupportedFormula("(3q^4 + q^3 - q^2 + q)/2 needs q = 2^p with p an odd prime")

    @property
    def q(self) -> int | None:
        return {
            "psl2-even": lambda: 2 ** self.param,
            "psl2-3odd": lambda: 3 ** self.param,
            "psl2-prime": lambda: self.param,
            "suzuki": lambda: 2 ** self.param,
            "psl3-3": lambda: 3,
            "psl2-7-special": lambda: 7,
        }[self.tag]()

    @property
    def case(self) -> int | None:
        return self.param % 24 if self.tag == "psl2-prime" else None

    @property
    def group_order(self) -> int:
        q = self.q
        if self.tag == "suzuki":
            return q * q * (q * q + 1) * (q - 1)
        if self.tag == "psl3-3":
            return 5616
        return q * (q * q - 1) // (1 if q % 2 == 0 else 2)

    @property
    def minimal_simple(self) -> bool:
        t, n = self.tag, self.param
        if t == "psl2-even":
            return is_prime(n)
        if t == "psl2-3odd":
            return is_prime(n)
        if t == "psl2-prime":
            return n % 5 in (2, 3)
        return True

    @property
    def label(self) -> str:
        if self.tag == "suzuki":
            return f"Sz({self.q})"
        if self.tag == "psl3-3":
            return "PSL(3,3)"
        return f"PSL(2,{self.q})"

    def __str__(self):
        return self.tag if self.param is None else f"{self.tag}({self.param})"


def _exact(value) -> int:
    value = Fraction(value)
    if value.denominator != 1:
        raise ArithmeticError(f"formula produced a non-integer {value}")
    v = int(value)
    if abs(v) > INT64_MAX:
        raise OverflowError(f"formula value {v} exceeds 64 bits")
    return v


def solv_formula(f: FormulaFamily) -> int:
    q = f.q
    if f.tag == "psl2-even":
        return _exact(2 * q * q)
    if f.tag == "psl2-3odd":
        return _exact(Fraction(4 * q * q - q + 1, 2))
    if f.tag == "suzuki":
        return _exact(Fraction(3 * q ** 4 + q ** 3 - q * q + q, 2))
    if f.tag == "psl3-3":
        return 1562
    if f.tag == "psl2-7-special":
        return 79
    a, b, c = PRIME_CASES[f.case]
    return _exact(a * q * q + b * q + c)


def family_for_q(q: int) -> FormulaFamily:
    """Formula family of PSL(2, q)."""
    pp = prime_power(q)
    if pp is None:
        raise UnsupportedFormula(f"{q} is not a prime power")
    p, n = pp
    if p == 2:
        return FormulaFamily("psl2-even", n)
    if p == 3:
        if n % 2 == 0:
            raise UnsupportedFormula(
                f"PSL(2, {q}): q = 3^{n} has even exponent; the 3^n formula needs n odd")
        return FormulaFamily("psl2-3odd", n)
    if n > 1:
        raise UnsupportedFormula(f"PSL(2, {q}): no formula for q = p^k with k > 1 and p > 3")
    if p == 7:
        return FormulaFamily("psl2-7-special")
    return FormulaFamily("psl2-prime", p)


def family_for_spec(spec: GroupSpec) -> FormulaFamily:
    """Formula family covering a group spec, or :class:`UnsupportedFormula`."""
    fam, params = spec.family, spec.params
    if fam == "psl2":
        return family_for_q(params[0])
    if fam == "psl3" and params[0] == 3:
        return FormulaFamily("psl3-3")
    if fam == "a" and params[0] == 5:
        return FormulaFamily("psl2-even", 2)
    if fam == "a" and params[0] == 6:
        raise UnsupportedFormula("a:6 is PSL(2, 9); q = 3^2 has even exponent, the 3^n formula needs n odd")
    raise UnsupportedFormula(f"no formula family covers {spec}")


def minimal_simple_families(bound: int) -> list[FormulaFamily]:
    """Minimal simple groups of order at most ``bound``, with PSL(2, 7) and
    PSL(3, 3) always included."""
    out = [FormulaFamily("psl2-7-special"), FormulaFamily("psl3-3")]
    p = 2
    while FormulaFamily("psl2-even", p).group_order <= bound:
        out.append(FormulaFamily("psl2-even", p))
        p = _next_prime(p)
    p = 3
    while FormulaFamily("psl2-3odd", p).group_order <= bound:
        out.append(FormulaFamily("psl2-3odd", p))
        p = _next_prime(p)
    p = 11
    while p * (p * p - 1) // 2 <= bound:
        if p % 5 in (2, 3):
            out.append(FormulaFamily("psl2-prime", p))
        p = _next_prime(p)
    p = 3
    while FormulaFamily("suzuki", p).group_order <= bound:
        out.append(FormulaFamily("suzuki", p))
        p = _next_prime(p)
    return out


def _next_prime(p: int) -> int:
    p += 1
    while not is_prime(p):
        p += 1
    return p


@dataclass
class DistinctnessReport:
    bound: int
    entries: list[tuple[str, str, int, int]]           # (family, label, |G|, |Solv|)
    collisions: list[tuple[int, list[str]]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.collisions

    def to_json(self) -> dict:
        return {
            "bound": self.bound, "ok": self.ok, "notes": self.notes,
            "entries": [dict(zip(("family", "group", "order", "solv"), e)) for e in self.entries],
            "collisions": [{"solv": v, "groups": g} for v, g in self.collisions],
        }


def minimal_simple_distinctness(bound: int) -> DistinctnessReport:
    fams = minimal_simple_families(bound)
    entries = sorted(((str(f), f.label, f.group_order, solv_formula(f)) for f in fams), key=lambda e: (e[2], e[0]))
    by_value: dict[int, list[str]] = {}
    for e in entries:
        by_value.setdefault(e[3], []).append(e[1])
    report = DistinctnessReport(bound, entries)
    report.collisions = sorted((v, g) for v, g in by_value.items() if len(g) > 1)
    report.notes.append("PSL(2,4) = PSL(2,5) = A5 enters once, as q = 4 of the 2^p family")
    return report


@dataclass(frozen=True)
class BoundCheck:
    applicable: bool
    holds: bool
    conjecture_flag: bool = False

    def __bool__(self):
        return self.holds


def check_lower_bound(report) -> BoundCheck:
    """``total >= 32`` for nonsolvable groups; a total of exactly 32 is flagged
    for manual inspection (expected to have an A5 composition factor).

    A total of 1 means the group is solvable and the bound does not apply.
    """
    total = report.total
    if total == 1:
        return BoundCheck(False, True)
    return BoundCheck(True, total >= 32, total == 32)
