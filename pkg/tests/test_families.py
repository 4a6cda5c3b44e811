import itertools
import math

import pytest
from hypothesis import given, strategies as st

from corpus import group
from solvkit.families import (
    FiniteField,
    GroupSpec,
    SpecError,
    field_arith,
    least_irreducible,
    named_group,
    parse_spec,
    prime_power,
    psl2,
    psl2_order,
    psl3_3,
)
from solvkit.perm import GroupError
from solvkit.solvability import is_solvable

FIELDS = [(2, 1), (3, 1), (5, 1), (2, 2), (2, 3), (3, 2), (3, 3), (5, 2), (2, 4)]


def poly_mul_mod(a, b, modulus, p):
    """Schoolbook product of coefficient vectors reduced by a monic modulus."""
    n = len(modulus) - 1
    prod = [0] * (2 * n)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] += x * y
    for d in range(len(prod) - 1, n - 1, -1):
        c = prod[d] % p
        if c:
            for k in range(n + 1):
                prod[d - n + k] -= c * modulus[k]
    return tuple(c % p for c in prod[:n])


def has_factor(m, p):
    """Whether monic ``m`` has a monic factor of degree 1 .. deg/2 (brute force)."""
    n = len(m) - 1
    for d in range(1, n // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            f = list(low) + [1]
            r = list(m)
            for k in range(len(r) - 1, d - 1, -1):
                c = r[k] % p
                if c:
                    for j in range(d + 1):
                        r[k - d + j] -= c * f[j]
            if all(x % p == 0 for x in r[:d]):
                return True
    return False


def test_gf4_square_of_x():
    F = FiniteField(2, 2)
    assert F.modulus == (1, 1, 1)
    assert field_arith(F, "mul", (0, 1), (0, 1)) == (1, 1)


@pytest.mark.parametrize("p,n", FIELDS)
def test_field_multiplication_matches_polynomials(p, n):
    F = FiniteField(p, n)
    for a in F.elements():
        for b in F.elements():
            assert F.vector(F.mul(a, b)) == poly_mul_mod(F.vector(a), F.vector(b), F.modulus, p)


@pytest.mark.parametrize("p,n", FIELDS)
def test_field_axioms(p, n):
    F = FiniteField(p, n)
    q = F.q
    for a in range(q):
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1
        for b in range(q):
            assert F.mul(a, b) == F.mul(b, a)
            for c in range(0, q, max(1, q // 5)):
                assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
                assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    assert F.order_of(F.generator) == q - 1
    assert len({F.pow(F.generator, k) for k in range(q - 1)}) == q - 1


def test_gf27_generator_order():
    F = FiniteField(3, 3)
    assert F.order_of(F.generator) == 26


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        FiniteField(5).inv(0)


@pytest.mark.parametrize("p,n", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (2, 5)])
def test_least_irreducible_is_least(p, n):
    m = least_irreducible(p, n)
    assert not has_factor(m, p)
    key = lambda low: tuple(reversed(low))
    for low in itertools.product(range(p), repeat=n):
        if key(low) < key(m[:n]):
            assert has_factor(list(low) + [1], p)


def test_field_size_limits():
    with pytest.raises(GroupError):
        FiniteField(4)
    with pytest.raises(GroupError):
        FiniteField(2, 12)


# -- named groups ------------------------------------------------------------------------

@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 27])
def test_psl2_order(q):
    assert psl2(q).order == q * (q * q - 1) // math.gcd(2, q - 1) == psl2_order(q)


@pytest.mark.parametrize("q", [4, 7, 8, 11])
def test_psl2_is_transitive_on_projective_line(q):
    G = group(f"psl2:{q}")
    assert G.degree == q + 1
    assert set(G.images[:, 0].tolist()) == set(range(q + 1))


@pytest.mark.parametrize("q,expected", [(4, 15), (8, 63), (7, 21), (11, 55)])
def test_involution_counts(q, expected):
    # q^2 - 1 for even q; p(p-1)/2 for p = 3 mod 4
    G = group(f"psl2:{q}")
    assert int((G.element_orders == 2).sum()) == expected
    assert expected == (q * q - 1 if q % 2 == 0 else q * (q - 1) // 2)


def test_a5_constructions_agree():
    for spec in ("a:5", "psl2:4", "psl2:5"):
        G = group(spec)
        assert G.order == 60 and not is_solvable(G)
        assert sorted(G.element_orders.tolist()) == sorted(group("a:5").element_orders.tolist())


def test_psl3_3():
    G = psl3_3()
    assert (G.order, G.degree) == (5616, 13)
    assert not is_solvable(G)
    # 2-transitive: the stabiliser of point 0 is transitive on the other 12 points
    stab = G.images[G.images[:, 0] == 0]
    assert set(stab[:, 1].tolist()) == set(range(1, 13))


def test_sl2_5_is_a_central_extension():
    G = group("sl2:5")
    assert G.order == 120
    central = [z for z in range(G.order) if all(G.mul(z, g) == G.mul(g, z) for g in G.gen_ids)]
    assert len(central) == 2


@pytest.mark.parametrize("spec,order", [
    ("a:5", 60), ("s:4", 24), ("c:6", 6), ("d:10", 10), ("direct(a:5,c:6)", 360),
    ("psl3:3", 5616), ("perm:4:(0 1 2 3);(0 1)", 24), ("direct(c:2,perm:3:(0 1 2))", 6),
])
def test_named_group_orders(spec, order):
    assert named_group(spec).order == order


def test_file_spec(tmp_path):
    path = tmp_path / "s3.txt"
    path.write_text("degree 3\ng (0 1)\ng 1 2 0\n")
    assert named_group(f"file:{path}").order == 6


def test_dihedral_convention():
    G = group("d:10")
    assert G.order == 10 and int((G.element_orders == 2).sum()) == 5


# -- spec grammar ------------------------------------------------------------------------

ROUND_TRIP = ["a:5", "s:4", "c:6", "d:10", "psl2:8", "psl3:3", "direct(a:5,c:6)",
              "direct(direct(c:2,c:3),psl2:7)", "perm:4:(0 1 2 3);(0 1)", "file:groups/x.txt"]


@pytest.mark.parametrize("text", ROUND_TRIP)
def test_spec_round_trip(text):
    spec = parse_spec(text)
    assert str(spec) == text
    assert parse_spec(str(spec)) == spec


leaf = st.sampled_from(["a", "s", "c"]).flatmap(lambda f: st.integers(1, 9).map(lambda n: f"{f}:{n}")) | \
    st.sampled_from(["psl2:4", "psl2:7", "d:6", "d:12", "psl3:3"])
specs = st.recursive(leaf, lambda inner: st.tuples(inner, inner).map(lambda t: f"direct({t[0]},{t[1]})"), max_leaves=4)


@given(specs)
def test_spec_round_trip_generated(text):
    assert str(parse_spec(text)) == text


@pytest.mark.parametrize("text,pos", [
    ("x:5", 0), ("a:", 2), ("psl2:6", 5), ("d:7", 2), ("psl3:4", 5), ("direct(a:5 c:6)", 10),
    ("a:5junk", 3), ("bogus", 0),
])
def test_spec_errors_carry_position(text, pos):
    with pytest.raises(SpecError) as info:
        parse_spec(text)
    assert info.value.pos == pos


def test_prime_power():
    assert prime_power(27) == (3, 3)
    assert prime_power(12) is None
    assert prime_power(1) is None
    assert GroupSpec("psl2", (9,)).psl2_q == 9
