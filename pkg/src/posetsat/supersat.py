"""Comparable-pair counts, supersaturation lower bounds, and brute-force
minima with the constructions they are compared against."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from .chains import ChainDistribution, ComparabilityDigraph
from .errors import InvalidSpecError, ResourceLimitError
from .family import boolean, rpower, subspace
from .matching import width
from .poset import RankedPoset, build_poset
from .ranks import ell, gaussian_binomial

EXHAUSTIVE_LIMIT = 24
BRANCH_AND_BOUND_LIMIT = 40


@dataclass(frozen=True)
class SubsetWitness:
    poset: RankedPoset
    members: tuple[int, ...]
    comp: int

    def to_dict(self) -> dict:
        return {
            "poset": self.poset.spec.to_dict(),
            "members": [self.poset.elements[a].encode() for a in self.members],
            "comp": self.comp,
        }


def comp_of(poset: RankedPoset, members: Iterable[int]) -> int:
    """Number of unordered comparable pairs among ``members``."""
    mask = poset.mask_of(members)
    return sum(bin(poset.up[a] & mask).count("1") for a in poset.indices_of(mask))


def comp(S: SubsetWitness) -> int:
    return comp_of(S.poset, S.members)


def make_witness(poset: RankedPoset, members: Iterable[int]) -> SubsetWitness:
    mem = tuple(sorted(set(members)))
    if mem and not 0 <= mem[0] <= mem[-1] < len(poset):
        raise InvalidSpecError("witness members must be element indices of the poset")
    return SubsetWitness(poset, mem, comp_of(poset, mem))


# -- lower bound from a random chain -----------------------------------------


def random_chain_lower_bound(
    poset: RankedPoset, digraph: ComparabilityDigraph, dist: ChainDistribution, m: int
) -> Fraction:
    """max(0, (m - 1/B) / A) with A the largest arc conditional and B the
    smallest element probability over the digraph's vertex set."""
    els = poset.elements
    B = None
    for a in digraph.members:
        p = dist.element_probability(els[a])
        if p <= 0:
            raise InvalidSpecError(f"distribution gives {els[a]} probability zero")
        B = p if B is None or p < B else B
    if not digraph.arcs:
        return Fraction(0)
    A = max(dist.conditional_probability(els[a], els[b]) for a, b in digraph.arcs)
    return max(Fraction(0), (m - 1 / B) / A)


# -- theorem bounds ------------------------------------------------------------


THEOREMS = ("booleanThm", "vecSpThm", "multisetThm")


@dataclass(frozen=True)
class BoundResult:
    theorem: str
    n: int
    k: int
    q: Optional[int]
    threshold: int
    rate: Fraction
    caveat: str = "holds only for n >= n_0(k), which is unspecified"

    def bound(self, m: int) -> Fraction:
        return self.rate * max(0, m - self.threshold)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "n": self.n,
            "k": self.k,
            "q": self.q,
            "threshold": self.threshold,
            "rate": self.rate,
            "caveat": self.caveat,
        }


def theorem_bound(theorem: str, n: int, k: int, q: Optional[int] = None) -> BoundResult:
    if k < 1:
        raise InvalidSpecError("k must be >= 1")
    if n < 1:
        raise InvalidSpecError("n must be >= 1")
    if (theorem == "vecSpThm") != (q is not None):
        raise InvalidSpecError("q is required for vecSpThm and only for it")
    top = -(-(n + k) // 2)
    if theorem == "booleanThm":
        idx = [-(-(n - k + 1 + 2 * r) // 2) for r in range(k)]
        if any(not 0 <= i <= n for i in idx) or k > top:
            raise InvalidSpecError(f"k={k} too large for n={n}")
        threshold = sum(math.comb(n, i) for i in idx)
        rate = Fraction(math.comb(top, k))
    elif theorem == "vecSpThm":
        subspace(n, q)  # validates q
        idx = [-(-(n - k + 1 + 2 * r) // 2) for r in range(k)]
        if any(not 0 <= i <= n for i in idx) or k > top:
            raise InvalidSpecError(f"k={k} too large for n={n}")
        threshold = sum(gaussian_binomial(n, i, q) for i in idx)
        rate = Fraction(gaussian_binomial(top, k, q))
    elif theorem == "multisetThm":
        lo, hi = n - (k - 1) // 2, n + -(-(k - 1) // 2)
        if 3 * k - 1 > 2 * n:
            raise InvalidSpecError(f"k={k} too large for n={n}")
        threshold = sum(ell(r, n) for r in range(lo, hi + 1))
        rate = Fraction(ell(3 * k - 1, n), ell(2 * k - 1, n)) - 1
    else:
        raise InvalidSpecError(f"unknown theorem {theorem!r}")
    return BoundResult(theorem, n, k, q, threshold, rate)


# -- brute force ---------------------------------------------------------------


def _neighbour_lists(poset: RankedPoset) -> list[int]:
    return [poset.comp_mask[a] for a in range(len(poset))]


@lru_cache(maxsize=32)
def min_comp_profile(poset: RankedPoset) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Exhaustive min comp over m-subsets for every m, as (minima, witness
    bitmasks); ties go to the numerically smallest bitmask."""
    N = len(poset)
    if N > EXHAUSTIVE_LIMIT:
        raise ResourceLimitError(f"exhaustive search is capped at {EXHAUSTIVE_LIMIT} elements")
    dtype = np.uint16 if N <= 24 else np.uint32
    cost = np.zeros(1 << N, dtype=dtype)
    idx = np.arange(1 << N, dtype=np.uint32)
    lower = [poset.comp_mask[b] & ((1 << b) - 1) for b in range(N)]
    for b in range(N):
        half = 1 << b
        added = np.bitwise_count(idx[:half] & np.uint32(lower[b])).astype(dtype)
        cost[half : 2 * half] = cost[:half] + added
    pc = np.bitwise_count(idx)
    minima, witnesses = [], []
    for m in range(N + 1):
        sel = pc == m
        mn = int(cost[sel].min())
        minima.append(mn)
        witnesses.append(int(np.flatnonzero(sel & (cost == mn))[0]))
    return tuple(minima), tuple(witnesses)


def _turan_min_edges(r: int, alpha: int) -> int:
    """Fewest edges in an r-vertex graph with independence number <= alpha."""
    if alpha <= 0 or r <= 0:
        return 0
    q, rem = divmod(r, alpha)
    return rem * math.comb(q + 1, 2) + (alpha - rem) * math.comb(q, 2)


def _branch_and_bound(poset: RankedPoset, m: int, incumbent: tuple[int, int], stop_below=None):
    """Exact min comp over m-subsets. ``incumbent`` is (comp, mask). With
    ``stop_below`` set, returns as soon as a subset of comp < stop_below is found."""
    N = len(poset)
    nbr = _neighbour_lists(poset)
    order = sorted(range(N), key=lambda a: (bin(nbr[a]).count("1"), a))
    alpha = width(poset)[0]
    best_cost, best_mask = incumbent

    def search(pos: int, chosen: int, count: int, cost: int):
        nonlocal best_cost, best_mask
        if stop_below is not None and best_cost < stop_below:
            return
        need = m - count
        if need == 0:
            if cost < best_cost or (cost == best_cost and chosen < best_mask):
                best_cost, best_mask = cost, chosen
            return
        rest = order[pos:]
        if len(rest) < need:
            return
        gains = sorted(bin(nbr[v] & chosen).count("1") for v in rest)
        if cost + sum(gains[:need]) + _turan_min_edges(need, alpha) > best_cost:
            return
        v = rest[0]
        search(pos + 1, chosen | (1 << v), count + 1, cost + bin(nbr[v] & chosen).count("1"))
        search(pos + 1, chosen, count, cost)

    search(0, 0, 0, 0)
    return best_cost, best_mask


def brute_min_comp(poset: RankedPoset, m: int) -> tuple[int, SubsetWitness]:
    """Exact minimum of comp over all m-subsets and one witness."""
    N = len(poset)
    if not 0 <= m <= N:
        raise InvalidSpecError(f"m must lie in 0..{N}")
    if N <= EXHAUSTIVE_LIMIT:
        minima, masks = min_comp_profile(poset)
        return minima[m], make_witness(poset, poset.indices_of(masks[m]))
    if N > BRANCH_AND_BOUND_LIMIT:
        raise ResourceLimitError(f"brute force is capped at {BRANCH_AND_BOUND_LIMIT} elements")
    start = centered_construction(poset, m)
    best, mask = _branch_and_bound(poset, m, (start.comp + 1, 0))
    return best, make_witness(poset, poset.indices_of(mask))


def exists_subset_below(poset: RankedPoset, m: int, bound: int) -> bool:
    """Whether some m-subset has comp < bound."""
    N = len(poset)
    if N <= EXHAUSTIVE_LIMIT:
        return min_comp_profile(poset)[0][m] < bound
    if N > BRANCH_AND_BOUND_LIMIT:
        raise ResourceLimitError(f"brute force is capped at {BRANCH_AND_BOUND_LIMIT} elements")
    start = centered_construction(poset, m)
    if start.comp < bound:
        return True
    best, _ = _branch_and_bound(poset, m, (bound, 0), stop_below=bound)
    return best < bound


# -- constructions ---------------------------------------------------------------


def centered_construction(poset: RankedPoset, m: int) -> SubsetWitness:
    """Whole levels by distance of rank from N/2 (lower rank first on ties),
    the last one filled in canonical order."""
    if not 0 <= m <= len(poset):
        raise InvalidSpecError(f"m must lie in 0..{len(poset)}")
    N = poset.N
    order = sorted(range(N + 1), key=lambda i: (abs(2 * i - N), i))
    members = []
    for i in order:
        take = min(m - len(members), len(poset.level(i)))
        members.extend(list(poset.level(i))[:take])
        if len(members) == m:
            break
    return make_witness(poset, members)


def extremal_construction(family: str, n: int, t: int, q: Optional[int] = None) -> SubsetWitness:
    if family == "subspace":
        P = build_poset(subspace(n, q))
        lo = (n - 1) // 2
        if not 0 <= t <= gaussian_binomial(n, lo, q):
            raise InvalidSpecError("t out of range")
        members = list(P.level(-(-n // 2))) + list(P.level(lo))[:t]
    elif family == "rpower":
        P = build_poset(rpower(n, 2))
        if not 0 <= t <= ell(n + 1, n):
            raise InvalidSpecError("t out of range")
        upper = sorted(
            P.level(n + 1),
            key=lambda a: (sum(1 for d in P.elements[a].payload if d), P.elements[a].sort_key()),
        )
        members = list(P.level(n)) + upper[:t]
    else:
        raise InvalidSpecError("extremal constructions exist for subspace and rpower only")
    return make_witness(P, members)


def explore_conjecture(n: int, r: int, m: Optional[int] = None) -> dict:
    """Brute minimum against the centred construction on {0..r}^n."""
    P = build_poset(rpower(n, r))
    ms = [m] if m is not None else list(range(len(P) + 1))
    rows = []
    for mm in ms:
        best, wit = brute_min_comp(P, mm)
        cen = centered_construction(P, mm)
        rows.append(
            {
                "m": mm,
                "brute_min": best,
                "centered": cen.comp,
                "equal": best == cen.comp,
                "counterexample": None if best == cen.comp else wit.to_dict()["members"],
            }
        )
    return {
        "check": "centered_levels_explorer",
        "poset": P.spec.to_dict(),
        "assertion": "equality expected" if r == 1 else "none; the conjecture fails for r >= 2",
        "rows": rows,
        "violations": [row for row in rows if row["centered"] < row["brute_min"]],
    }


def empirical_n0(theorem: str, k: int, ns: Iterable[int], q: Optional[int] = None) -> dict:
    """For each n, whether theorem_bound(m) <= brute min for every m; reports
    the smallest n from which every tested n passes."""
    results = {}
    for n in ns:
        try:
            res = theorem_bound(theorem, n, k, q)
        except InvalidSpecError:
            continue
        spec = {
            "booleanThm": lambda: boolean(n),
            "vecSpThm": lambda: subspace(n, q),
            "multisetThm": lambda: rpower(n, 2),
        }[theorem]()
        P = build_poset(spec)
        minima = min_comp_profile(P)[0]
        results[n] = all(res.bound(m) <= minima[m] for m in range(len(P) + 1))
    smallest = None
    for n in sorted(results, reverse=True):
        if not results[n]:
            break
        smallest = n
    return {"theorem": theorem, "k": k, "q": q, "passes": results, "smallest_passing_n": smallest}
