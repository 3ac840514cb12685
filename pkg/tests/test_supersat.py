import math
import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from posetsat.chains import ElementChains, build_digraph, default_distribution
from posetsat.errors import InvalidSpecError, ResourceLimitError
from posetsat.family import boolean, rpower, subspace
from posetsat.matching import brute_max_antichain, max_antichain_in, width
from posetsat.poset import build_poset, chain_poset, complement
from posetsat.ranks import ell, gaussian_binomial
from posetsat.supersat import (
    _branch_and_bound,
    brute_min_comp,
    centered_construction,
    comp_of,
    empirical_n0,
    explore_conjecture,
    extremal_construction,
    make_witness,
    min_comp_profile,
    random_chain_lower_bound,
    theorem_bound,
)


def _naive_min(P, m):
    return min(comp_of(P, S) for S in combinations(range(len(P)), m))


def test_comp_examples():
    P = build_poset(boolean(2))
    assert comp_of(P, [0, 1, 3]) == 3
    assert comp_of(P, range(4)) == 5
    Q = build_poset(boolean(4))
    assert comp_of(Q, Q.level(2)) == 0
    assert make_witness(P, [0, 1, 3]).to_dict() == {"poset": {"family": "boolean", "n": 2}, "members": ["00", "01", "11"], "comp": 3}


def test_comp_complement_symmetry():
    rng = random.Random(3)
    for spec in (boolean(4), rpower(2, 2), subspace(3, 2)):
        P = build_poset(spec)
        for _ in range(50):
            S = rng.sample(range(len(P)), rng.randrange(len(P) + 1))
            cS = [P.index[complement(P.elements[a], spec)] for a in S]
            assert comp_of(P, S) == comp_of(P, cS)


def test_brute_examples():
    P = build_poset(boolean(2))
    assert brute_min_comp(P, 3)[0] == 2
    Q = build_poset(rpower(2, 2))
    # every 4-subset of {0,1,2}^2 has at least two comparable pairs
    assert brute_min_comp(Q, 4)[0] == 2 == _naive_min(Q, 4)
    assert brute_min_comp(Q, 4)[1].comp == 2


@pytest.mark.parametrize("spec", [boolean(3), rpower(2, 2), subspace(2, 3), rpower(2, 3)])
def test_brute_profile_matches_naive(spec):
    P = build_poset(spec)
    minima, masks = min_comp_profile(P)
    for m in range(len(P) + 1):
        assert minima[m] == _naive_min(P, m)
        assert comp_of(P, P.indices_of(masks[m])) == minima[m]
        assert bin(masks[m]).count("1") == m


def test_brute_zero_iff_m_at_most_width():
    for spec in (boolean(4), subspace(3, 2), rpower(2, 3)):
        P = build_poset(spec)
        w = width(P)[0]
        minima = min_comp_profile(P)[0]
        assert all((minima[m] == 0) == (m <= w) for m in range(len(P) + 1))


def test_branch_and_bound_agrees_with_exhaustive():
    for spec in (boolean(4), subspace(3, 2)):
        P = build_poset(spec)
        minima = min_comp_profile(P)[0]
        for m in range(len(P) + 1):
            start = centered_construction(P, m)
            assert _branch_and_bound(P, m, (start.comp + 1, 0))[0] == minima[m]


def test_brute_limits():
    with pytest.raises(ResourceLimitError):
        brute_min_comp(build_poset(boolean(6)), 10)
    with pytest.raises(InvalidSpecError):
        brute_min_comp(build_poset(boolean(2)), 5)


def test_centered_construction():
    P4 = build_poset(boolean(4))
    assert centered_construction(P4, 6).comp == 0
    assert centered_construction(build_poset(boolean(2)), 4).comp == 5
    Q = build_poset(rpower(2, 2))
    S = centered_construction(Q, 5)
    assert [Q.rank[a] for a in S.members] == [1, 1, 2, 2, 2]
    assert S.comp == 4


def test_random_chain_bound_examples():
    P = build_poset(boolean(2))
    dg = build_digraph(P)
    bound = random_chain_lower_bound(P, dg, default_distribution(P.spec), 4)
    assert bound == 2 and bound <= 5
    C = build_poset(chain_poset(5))
    dist = ElementChains.uniform_maximal(C)
    for m in range(6):
        assert random_chain_lower_bound(C, build_digraph(C), dist, m) == max(0, m - 1)
    # an antichain poset has no arcs
    A = build_poset(boolean(0))
    assert random_chain_lower_bound(A, build_digraph(A), ElementChains.uniform_maximal(A), 1) == 0


def test_random_chain_bound_rejects_zero_probability():
    P = build_poset(boolean(2))
    dist = ElementChains(P, {(0, 1): Fraction(1), (0, 2): Fraction(0), (1, 3): Fraction(1), (2, 3): Fraction(1)})
    with pytest.raises(InvalidSpecError):
        random_chain_lower_bound(P, build_digraph(P), dist, 3)


def test_theorem_bound_examples():
    b = theorem_bound("booleanThm", 4, 1)
    assert (b.threshold, b.rate) == (6, 3)
    v = theorem_bound("vecSpThm", 3, 1, 2)
    assert (v.threshold, v.rate) == (7, 3)
    for n in range(2, 15):
        assert theorem_bound("multisetThm", n, 1).rate == Fraction(n - 1, 2)
        assert theorem_bound("multisetThm", n, 1).threshold == ell(n, n)
        assert theorem_bound("booleanThm", n, 1).threshold == math.comb(n, n // 2)
    assert b.bound(3) == 0 and b.bound(8) == 6
    with pytest.raises(InvalidSpecError):
        theorem_bound("booleanThm", 4, 0)
    with pytest.raises(InvalidSpecError):
        theorem_bound("vecSpThm", 4, 1)
    with pytest.raises(InvalidSpecError):
        theorem_bound("booleanThm", 4, 1, 2)


def test_theorem_bound_k2_thresholds_are_two_levels():
    assert theorem_bound("booleanThm", 6, 2).threshold == math.comb(6, 3) + math.comb(6, 4)
    assert theorem_bound("multisetThm", 6, 2).threshold == ell(6, 6) + ell(7, 6)


def test_extremal_subspace():
    assert extremal_construction("subspace", 3, 2, 2).comp == 6
    assert extremal_construction("subspace", 3, 0, 2).comp == 0
    with pytest.raises(InvalidSpecError):
        extremal_construction("subspace", 3, 8, 2)


def test_extremal_multiset():
    S = extremal_construction("rpower", 3, 1)
    # minimum nonzero coordinates in rank 4 means the element (2,2,0) family
    added = [a for a in S.members if S.poset.rank[a] == 4]
    assert S.poset.elements[added[0]].payload.count(0) == 1
    assert S.comp == 2
    with pytest.raises(InvalidSpecError):
        extremal_construction("boolean", 3, 1)


def test_explore_conjecture():
    r = explore_conjecture(4, 1)
    assert all(row["equal"] for row in r["rows"])
    r2 = explore_conjecture(2, 2)
    assert r2["violations"] == [] and len(r2["rows"]) == 10
    assert r2["rows"][-1]["brute_min"] == r2["rows"][-1]["centered"] == comp_of(build_poset(rpower(2, 2)), range(9))


def test_empirical_n0_reports():
    r = empirical_n0("booleanThm", 1, range(1, 5))
    assert r["smallest_passing_n"] == 1


def test_max_antichain_examples():
    P = build_poset(boolean(4))
    assert max_antichain_in(P, [0, 1, 5, 15])[0] == 1
    assert max_antichain_in(P, P.level(2))[0] == 6
    assert max_antichain_in(P, [])[0] == 0


def test_max_antichain_vs_oracle():
    rng = random.Random(11)
    for spec in (boolean(5), rpower(3, 2), subspace(3, 2)):
        P = build_poset(spec)
        for _ in range(150):
            S = rng.sample(range(len(P)), min(len(P), rng.randrange(1, 25)))
            size, wit = max_antichain_in(P, S)
            assert size == brute_max_antichain(P, S) == len(wit)
            assert set(wit) <= set(S) and P.is_antichain(P.mask_of(wit))


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(0, 26), max_size=24))
def test_random_chain_bound_below_brute(subset):
    P = build_poset(rpower(3, 2))
    m = len(subset)
    dg = build_digraph(P)
    bound = random_chain_lower_bound(P, dg, default_distribution(P.spec), m)
    assert bound <= comp_of(P, subset)
