import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from posetsat.errors import InvalidSpecError, ResourceLimitError
from posetsat.family import FamilySpec, boolean, rpower, subspace
from posetsat.fields import field, is_prime_power
from posetsat.poset import (
    ElementCode,
    build_poset,
    check_matching_lym,
    chain_poset,
    compare,
    complement,
    decode,
    rref,
)
from posetsat.ranks import (
    check_log_concavity,
    check_ratio_bounds,
    ell,
    gaussian_binomial,
    level_profile_csv,
    level_sizes,
)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9, 16])
def test_field_axioms(q):
    F = field(q)
    for a in range(q):
        assert F.add(a, 0) == a and F.mul(a, 1) == a
        assert F.sub(a, a) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1
        for b in range(q):
            assert F.add(a, b) == F.add(b, a)
            assert F.mul(a, b) == F.mul(b, a)


def test_prime_power_detection():
    assert [q for q in range(1, 20) if is_prime_power(q)] == [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19]


def test_family_validation():
    with pytest.raises(InvalidSpecError):
        subspace(3, 6)
    with pytest.raises(InvalidSpecError):
        FamilySpec("rpower", 2)
    with pytest.raises(InvalidSpecError):
        FamilySpec("boolean", -1)
    with pytest.raises(InvalidSpecError):
        subspace(2, 25)  # prime power beyond the table limit
    spec = subspace(3, 2)
    assert FamilySpec.from_json(spec.to_json()) == spec


def test_gaussian_binomial_values():
    assert gaussian_binomial(4, 2, 2) == 35
    assert gaussian_binomial(3, 1, 2) == 7
    assert gaussian_binomial(2, 1, 4) == 5
    with pytest.raises(InvalidSpecError):
        gaussian_binomial(3, 4, 2)


@pytest.mark.parametrize(
    "spec,sizes",
    [
        (boolean(2), [1, 2, 1]),
        (rpower(2, 2), [1, 2, 3, 2, 1]),
        (subspace(3, 2), [1, 7, 7, 1]),
        (subspace(2, 4), [1, 5, 1]),
        (subspace(3, 3), [1, 13, 13, 1]),
    ],
)
def test_level_sizes(spec, sizes):
    assert level_sizes(spec) == sizes
    assert build_poset(spec).level_sizes() == sizes


def test_ell_matches_enumeration():
    for n in range(0, 6):
        for r in (1, 2, 3):
            counts = [0] * (r * n + 1)
            for v in product(range(r + 1), repeat=n):
                counts[sum(v)] += 1
            assert [ell(i, n, r) for i in range(r * n + 1)] == counts
    assert ell(3, 3) == 7


def test_level_profile_csv():
    assert level_profile_csv(boolean(2)) == "i,size\n0,1\n1,2\n2,1\n"


def test_encodings_roundtrip():
    for spec in (boolean(3), rpower(2, 2), rpower(1, 11), subspace(3, 2), subspace(2, 4), subspace(2, 17)):
        P = build_poset(spec)
        for x in P.elements:
            assert decode(spec, x.encode()) == x
    assert decode(boolean(3), "101").payload == 0b101
    assert build_poset(subspace(2, 2)).elements[0].encode() == "~"
    with pytest.raises(InvalidSpecError):
        decode(boolean(3), "1x1")
    with pytest.raises(InvalidSpecError):
        decode(rpower(2, 2), "3,0")
    assert decode(subspace(2, 17), "1,16").payload == ((1, 16),)
    with pytest.raises(InvalidSpecError):
        decode(subspace(2, 17), "1,17")
    with pytest.raises(InvalidSpecError):
        decode(subspace(2, 4), "1z")


def test_compare_and_complement():
    a = ElementCode("boolean", 3, 0b001)
    b = ElementCode("boolean", 3, 0b011)
    assert compare(a, b) == "<" and compare(b, a) == ">" and compare(a, a) == "="
    assert compare(ElementCode("boolean", 3, 0b010), a) is None
    with pytest.raises(InvalidSpecError):
        compare(a, ElementCode("rpower", 3, (0, 0, 1)))
    for spec in (boolean(3), rpower(2, 2), subspace(3, 2)):
        P = build_poset(spec)
        for x in P.elements:
            cx = complement(x, spec)
            assert cx.rank == P.N - x.rank
            assert complement(cx, spec) == x
        # anti-automorphism: order reversed
        for x in P.elements:
            for y in P.elements:
                rel = compare(x, y)
                flipped = {"<": ">", ">": "<", "=": "=", None: None}[rel]
                assert compare(complement(x, spec), complement(y, spec)) == flipped


def test_subspace_order_is_inclusion():
    P = build_poset(subspace(3, 2))
    for a, b in P.comparable_pairs():
        x, y = P.elements[a], P.elements[b]
        assert rref(x.payload + y.payload, 2) == y.payload


def test_chain_poset():
    P = build_poset(chain_poset(5))
    assert len(P) == 5 and len(P.comparable_pairs()) == 10


def test_normalised_matching_and_lym():
    for spec in (rpower(2, 2), subspace(2, 3), boolean(4), rpower(3, 2)):
        assert check_matching_lym(build_poset(spec))["violations"] == []
    P = build_poset(boolean(4))
    mid = list(P.level(2))
    assert check_matching_lym(P, mid)["lym_sum"] == 1
    assert check_matching_lym(P, [0])["lym_sum"] == 1
    with pytest.raises(InvalidSpecError):
        check_matching_lym(P, [0, 1])
    with pytest.raises(ResourceLimitError):
        check_matching_lym(build_poset(subspace(4, 2)))


def test_element_limit():
    with pytest.raises(ResourceLimitError):
        build_poset(boolean(10), limit=100)


def test_appendix_small():
    assert check_log_concavity(60)["violations"] == []
    assert check_ratio_bounds(12)["violations"] == []
    with pytest.raises(InvalidSpecError):
        check_ratio_bounds(4)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 7), st.sampled_from([2, 3, 4, 5]))
def test_q_binomial_symmetry_and_pascal(n, i, q):
    if i > n:
        return
    assert gaussian_binomial(n, i, q) == gaussian_binomial(n, n - i, q)
    if 0 < i < n:
        assert gaussian_binomial(n, i, q) == gaussian_binomial(n - 1, i - 1, q) + q**i * gaussian_binomial(n - 1, i, q)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 60))
def test_grid_profile_symmetric_and_total(n):
    sizes = [ell(i, n) for i in range(2 * n + 1)]
    assert sizes == sizes[::-1]
    assert sum(sizes) == 3**n
    assert max(sizes) == ell(n, n)
