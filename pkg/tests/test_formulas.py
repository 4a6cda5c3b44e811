import os
from fractions import Fraction

import pytest

from corpus import group
from solvkit.families import is_prime, parse_spec
from solvkit.formulas import (
    PRIME_CASES,
    FormulaFamily,
    UnsupportedFormula,
    check_lower_bound,
    family_for_q,
    family_for_spec,
    minimal_simple_distinctness,
    minimal_simple_families,
    solv_formula,
)
from solvkit.solvabilizer import SolvReport, solv_count_rational


@pytest.mark.parametrize("family,value", [
    (FormulaFamily("psl2-even", 3), 128),
    (FormulaFamily("psl2-even", 2), 32),
    (FormulaFamily("psl2-prime", 11), 244),
    (FormulaFamily("psl2-prime", 13), 366),
    (FormulaFamily("psl2-3odd", 3), 1445),
    (FormulaFamily("suzuki", 3), 6372),
    (FormulaFamily("psl3-3"), 1562),
    (FormulaFamily("psl2-7-special"), 79),
])
def test_formula_values(family, value):
    assert solv_formula(family) == value


def test_formulas_by_hand():
    for n in range(2, 12):
        q = 2 ** n
        assert solv_formula(FormulaFamily("psl2-even", n)) == 2 * q * q
    for n in (3, 5, 7):
        q = 3 ** n
        assert 2 * solv_formula(FormulaFamily("psl2-3odd", n)) == 4 * q * q - q + 1
    for p in (3, 5, 7, 11):
        q = 2 ** p
        assert 2 * solv_formula(FormulaFamily("suzuki", p)) == 3 * q ** 4 + q ** 3 - q * q + q


@pytest.mark.parametrize("tag,param,needle", [
    ("psl2-prime", 5, "A5"), ("psl2-prime", 7, "special"), ("psl2-prime", 9, "p > 7"),
    ("psl2-prime", 3, "p > 7"), ("psl2-3odd", 2, "odd"), ("psl2-3odd", 1, "n >= 3"),
    ("psl2-even", 1, "n >= 2"), ("suzuki", 2, "odd prime"), ("suzuki", 9, "odd prime"),
    ("nonsense", None, "unknown"),
])
def test_out_of_range_parameters(tag, param, needle):
    with pytest.raises(UnsupportedFormula) as info:
        FormulaFamily(tag, param)
    assert needle in str(info.value)


def test_prime_cases_partition_units_mod_24():
    units = [r for r in range(24) if r % 2 and r % 3]
    assert sorted(PRIME_CASES) == units
    for p in range(11, 20000):
        if is_prime(p):
            f = FormulaFamily("psl2-prime", p)
            assert f.case in PRIME_CASES
            assert isinstance(solv_formula(f), int)


def test_prime_case_coefficients():
    # a p^2 + b p + c with the published coefficients
    assert PRIME_CASES[11] == (2, 0, 2)
    assert PRIME_CASES[23] == (Fraction(5, 2), Fraction(-1, 2), 2)


@pytest.mark.parametrize("text,family", [
    ("psl2:8", "psl2-even(3)"), ("psl2:4", "psl2-even(2)"), ("a:5", "psl2-even(2)"),
    ("psl2:27", "psl2-3odd(3)"), ("psl2:11", "psl2-prime(11)"), ("psl2:7", "psl2-7-special"),
    ("psl3:3", "psl3-3"),
])
def test_family_for_spec(text, family):
    assert str(family_for_spec(parse_spec(text))) == family


@pytest.mark.parametrize("text,needle", [
    ("a:6", "even exponent"), ("psl2:9", "even exponent"), ("psl2:25", "k > 1"),
    ("psl2:5", "A5"), ("s:5", "no formula"), ("psl2:3", "n >= 3"),
])
def test_family_not_covered(text, needle):
    with pytest.raises(UnsupportedFormula) as info:
        family_for_spec(parse_spec(text))
    assert needle in str(info.value)


@pytest.mark.parametrize("spec", [
    "a:5", "psl2:7", "psl2:8", "psl2:11", "psl2:13", "psl2:16", "psl2:17", "psl2:19",
    "psl2:23", "psl2:29", "psl2:31", "psl2:27", "psl3:3",
])
def test_formula_equals_computation(spec):
    s = parse_spec(spec)
    assert solv_count_rational(group(spec)).total == solv_formula(family_for_spec(s))


@pytest.mark.skipif(not os.environ.get("SOLVKIT_SLOW"), reason="about 7 minutes; set SOLVKIT_SLOW=1")
def test_formula_equals_computation_case_one_mod_24():
    assert solv_count_rational(group("psl2:73")).total == 13507 == solv_formula(family_for_q(73))


def test_group_orders():
    assert FormulaFamily("suzuki", 3).group_order == 29120
    assert FormulaFamily("psl2-prime", 11).group_order == 660
    assert FormulaFamily("psl2-even", 3).group_order == 504
    assert FormulaFamily("psl2-3odd", 3).group_order == 9828


def test_distinctness_up_to_a_million():
    rep = minimal_simple_distinctness(10 ** 6)
    assert rep.ok and rep.collisions == []
    labels = [e[1] for e in rep.entries]
    assert {"PSL(2,4)", "PSL(2,7)", "PSL(2,8)", "PSL(2,13)", "PSL(3,3)", "PSL(2,27)", "Sz(8)", "PSL(2,32)"} <= set(labels)
    assert "PSL(2,11)" not in labels  # 11 = 1 mod 5: not minimal simple
    values = [e[3] for e in rep.entries]
    assert values.count(32) == 1 and min(values) == 32
    assert all(e[2] <= 10 ** 6 for e in rep.entries)


def test_distinctness_reports_duplicates():
    fams = minimal_simple_families(10 ** 4)
    assert all(f.minimal_simple for f in fams)
    twice = FormulaFamily("psl2-even", 3)
    assert solv_formula(twice) == solv_formula(FormulaFamily("psl2-even", 3))


def test_lower_bound_check():
    a5 = SolvReport("a:5", 60, "rational", 32, 32)
    assert check_lower_bound(a5).holds and check_lower_bound(a5).conjecture_flag
    psl27 = SolvReport("psl2:7", 168, "rational", 79, 79)
    assert check_lower_bound(psl27) and not check_lower_bound(psl27).conjecture_flag
    s4 = check_lower_bound(SolvReport("s:4", 24, "rational", 1, 1))
    assert not s4.applicable
