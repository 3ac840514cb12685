import math
import random
from fractions import Fraction

import pytest

from posetsat.chains import (
    ElementChains,
    MuChains,
    UniformBooleanChains,
    UniformSubspaceChains,
    build_digraph,
    build_weight_table,
    conditional_threshold,
    default_distribution,
    verify_conditional_bound,
    verify_weight_identities,
    verify_weight_inequalities,
)
from posetsat.errors import InvalidSpecError
from posetsat.family import boolean, rpower, subspace
from posetsat.poset import ElementCode, build_poset, compare
from posetsat.ranks import ell

F = Fraction


def test_weight_table_n2_frozen():
    t = build_weight_table(2)
    assert t.w[1, 0] == F(1, 3) and t.wprime[1, 0] == F(1, 6)
    assert t.to_csv().splitlines()[2] == "1,0,1/3,1/6"
    # boundary zeros
    assert t.w[2, 1] == 0 and t.wprime[2, 0] == 0
    assert t.wprime[0, 0] == F(1, 2)


def test_weight_table_n3_frozen():
    # cross-checked against the chain-enumeration oracle below (level uniformity)
    t = build_weight_table(3)
    assert t.w[2, 0] == F(5, 84) and t.wprime[2, 0] == F(1, 21)
    assert t.w[3, 1] == F(1, 12) and t.wprime[3, 1] == F(5, 84)


def test_mu_transitions_n2():
    mu = MuChains(2)
    x = ElementCode("rpower", 2, (1, 0))
    assert mu.transition(x, ElementCode("rpower", 2, (2, 0))) == F(2, 3)
    assert mu.transition(x, ElementCode("rpower", 2, (1, 1))) == F(1, 3)
    assert mu.element_probability(ElementCode("rpower", 2, (1, 1))) == F(1, 3)
    with pytest.raises(InvalidSpecError):
        mu.transition(x, ElementCode("rpower", 2, (2, 1)))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_mu_against_chain_enumeration(n):
    """Element probabilities and all conditionals (both directions) from the
    type DP agree with brute-force path sums over every maximal chain."""
    P = build_poset(rpower(n))
    mu = MuChains(n)
    oracle = ElementChains.from_distribution(P, mu)
    chains = oracle.enumerate_chains()
    assert sum(p for _, p in chains) == 1
    hit = [F(0)] * len(P)
    pair = {}
    for path, p in chains:
        for a in path:
            hit[a] += p
        for ia, a in enumerate(path):
            for b in path[ia + 1 :]:
                pair[a, b] = pair.get((a, b), 0) + p
    for a in range(len(P)):
        assert hit[a] == F(1, ell(P.rank[a], n))
        assert mu.element_probability(P.elements[a]) == hit[a]
    for (a, b), p in pair.items():
        x, y = P.elements[a], P.elements[b]
        assert mu.conditional_probability(x, y) == p / hit[a]
        assert mu.conditional_probability(y, x) == p / hit[b]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_memorylessness(n):
    P = build_poset(rpower(n))
    oracle = ElementChains.from_distribution(P, MuChains(n))
    triple, pair, single = {}, {}, [F(0)] * len(P)
    for path, p in oracle.enumerate_chains():
        for a in path:
            single[a] += p
        for i, a in enumerate(path):
            for j in range(i + 1, len(path)):
                pair[a, path[j]] = pair.get((a, path[j]), 0) + p
                for c in path[j + 1 :]:
                    triple[a, path[j], c] = triple.get((a, path[j], c), 0) + p
    for (a, b, c), p in triple.items():
        assert p / pair[a, b] == pair[b, c] / single[b]


def test_uniform_boolean_matches_element_level():
    for n in range(1, 6):
        P = build_poset(boolean(n))
        fast = UniformBooleanChains(n)
        slow = ElementChains.uniform_maximal(P)
        for a in range(len(P)):
            x = P.elements[a]
            assert fast.element_probability(x) == slow.element_probability(x)
            for b in P.indices_of(P.comp_mask[a]):
                y = P.elements[b]
                assert fast.conditional_probability(x, y) == slow.conditional_probability(x, y)


def test_uniform_subspace_matches_element_level():
    for n, q in ((2, 2), (3, 2), (2, 3), (3, 3)):
        P = build_poset(subspace(n, q))
        fast = UniformSubspaceChains(n, q)
        slow = ElementChains.uniform_maximal(P)
        for a in range(len(P)):
            x = P.elements[a]
            assert fast.element_probability(x) == slow.element_probability(x)
            for b in P.indices_of(P.comp_mask[a]):
                y = P.elements[b]
                assert fast.conditional_probability(x, y) == slow.conditional_probability(x, y)


def test_uniform_maximal_on_grid_not_level_uniform():
    P = build_poset(rpower(2, 2))
    dist = ElementChains.uniform_maximal(P)
    probs = {dist.element_probability(P.elements[a]) for a in P.level(2)}
    assert len(probs) > 1


def test_sample_chain_deterministic_and_valid():
    for dist in (MuChains(4), UniformBooleanChains(5), UniformSubspaceChains(3, 2), default_distribution(rpower(2, 3))):
        c1, c2 = dist.sample_chain(7), dist.sample_chain(7)
        assert c1 == c2
        assert len(c1) == dist.spec.top_rank + 1
        for x, y in zip(c1, c1[1:]):
            assert compare(x, y) == "<" and y.rank == x.rank + 1


@pytest.mark.parametrize(
    "dist,target",
    [
        (MuChains(3), ElementCode("rpower", 3, (1, 1, 1))),
        (MuChains(3), ElementCode("rpower", 3, (2, 1, 0))),
        (UniformSubspaceChains(3, 2), None),
    ],
)
def test_monte_carlo_frequency(dist, target):
    trials = 3000
    if target is None:
        P = build_poset(dist.spec)
        target = P.elements[P.level_start[1] + 3]
    p = float(dist.element_probability(target))
    hits = sum(target in dist.sample_chain(s) for s in range(trials))
    sigma = math.sqrt(trials * p * (1 - p))
    assert abs(hits - trials * p) <= 3 * sigma


@pytest.mark.parametrize("n", [1, 2, 5, 12, 25])
def test_weight_identities(n):
    assert verify_weight_identities(n)["violations"] == []


def test_weight_inequalities_small():
    r = verify_weight_inequalities(2)
    assert r["violations"] == [] and r["skipped"] == ["b", "c"]
    assert verify_weight_inequalities(5)["violations"] == []


def test_conditional_threshold_k1():
    for n in range(3, 20):
        assert conditional_threshold(n, 1) == F(2, n - 1)


def test_conditional_bound_report_shape():
    r = verify_conditional_bound(6, 1)
    assert r["threshold"] == F(2, 5)
    assert r["pairs_checked"] > 0
    with pytest.raises(InvalidSpecError):
        verify_conditional_bound(6, 0)


def test_digraph_p2():
    P = build_poset(boolean(2))
    dg = build_digraph(P)
    assert dg.has_arc(0, 1)  # {} -> {1}
    assert dg.has_arc(0, 3)  # {} -> {1,2}, complement-rank clause
    assert dg.audit() == []


def test_digraph_audit_grid_and_custom_rule():
    P = build_poset(rpower(2, 2))
    assert build_digraph(P).audit() == []
    up = build_digraph(P, lambda poset, a, b: poset.less(a, b))
    assert up.audit() == [] and len(up.arcs) == len(P.comparable_pairs())
    with pytest.raises(InvalidSpecError):
        build_digraph(P, lambda poset, a, b: True)
    with pytest.raises(InvalidSpecError):
        build_digraph(P, "sideways")


def test_element_chains_rejects_bad_transitions():
    P = build_poset(boolean(2))
    with pytest.raises(InvalidSpecError):
        ElementChains(P, {(0, 1): F(1, 2), (0, 2): F(1, 3), (1, 3): F(1), (2, 3): F(1)})
