"""Chain distributions and comparability digraphs.

Three distributions on maximal chains are provided:

* uniform maximal chains on P(n) and V(q, n) (closed forms),
* the memoryless distribution ``mu`` on {0,1,2}^n, which moves from
  x in L_i^s to a cover with probability |L_i| w[i][s] (a coordinate goes
  1 -> 2) or |L_i| w'[i][s] (a coordinate goes 0 -> 1),
* an element-level distribution on any materialised poset, used for the
  uniform maximal chain measure on general grids and as a brute-force
  oracle for the two above.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Callable, Iterable, Optional

from .errors import InvalidSpecError
from .family import FamilySpec, boolean, rpower, subspace
from .fields import field
from .poset import ElementCode, RankedPoset, compare, in_span, rref, upper_covers
from .ranks import (
    ell,
    gaussian_binomial,
    level_slice_size,
    slice_range,
    slices_at_least,
    slices_at_most,
)

GENERATOR_ID = "python-random-mt19937"


# -- weight table ------------------------------------------------------------


@dataclass(frozen=True)
class WeightTable:
    """Exact weights w[i][s] (x in L_i^s to a cover with one more 2) and
    w'[i][s] (to a cover with the same number of 2s), for 0 <= i <= 2n-1."""

    n: int
    w: dict = dc_field(repr=False)
    wprime: dict = dc_field(repr=False)

    def rows(self):
        for i in range(2 * self.n):
            for s in slice_range(self.n, i):
                yield i, s, self.w[i, s], self.wprime[i, s]

    def to_csv(self) -> str:
        lines = ["i,s,w,wprime"]
        lines += [f"{i},{s},{_frac(a)},{_frac(b)}" for i, s, a, b in self.rows()]
        return "\n".join(lines) + "\n"


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@lru_cache(maxsize=64)
def build_weight_table(n: int) -> WeightTable:
    if n < 1:
        raise InvalidSpecError("weight table needs n >= 1")
    w, wp = {}, {}
    for i in range(2 * n):
        Li, Li1 = ell(i, n), ell(i + 1, n)
        for s in slice_range(n, i):
            Lis = level_slice_size(n, i, s)
            if 2 * s == i:
                w[i, s] = Fraction(0)
            else:
                num = Li * slices_at_least(n, i + 1, s + 1) - Li1 * slices_at_least(n, i, s + 1)
                w[i, s] = Fraction(num, Lis * Li * Li1 * (i - 2 * s))
            if s == i - n:
                wp[i, s] = Fraction(0)
            else:
                num = Li * slices_at_most(n, i + 1, s) - Li1 * slices_at_most(n, i, s - 1)
                wp[i, s] = Fraction(num, Lis * Li * Li1 * (n - i + s))
    return WeightTable(n, w, wp)


# -- distributions -----------------------------------------------------------


class ChainDistribution:
    """Common interface. Subclasses implement ``transition``,
    ``element_probability`` and ``upward_conditional``."""

    kind: str
    spec: FamilySpec

    def covers(self, x: ElementCode) -> list[ElementCode]:
        return sorted(upper_covers(x, self.spec), key=ElementCode.sort_key)

    def bottom(self) -> ElementCode:
        s = self.spec
        if s.family == "boolean":
            return ElementCode("boolean", s.n, 0)
        if s.family == "rpower":
            return ElementCode("rpower", s.n, (0,) * s.n)
        return ElementCode("subspace", s.n, (), s.q)

    def transition(self, x: ElementCode, y: ElementCode) -> Fraction:
        raise NotImplementedError

    def element_probability(self, x: ElementCode) -> Fraction:
        raise NotImplementedError

    def upward_conditional(self, x: ElementCode, y: ElementCode) -> Fraction:
        raise NotImplementedError

    def conditional_probability(self, x: ElementCode, y: ElementCode) -> Fraction:
        """P(y in C | x in C) for comparable x, y; downward via Bayes."""
        rel = compare(x, y)
        if rel == "=":
            return Fraction(1)
        if rel == "<":
            return self.upward_conditional(x, y)
        if rel == ">":
            return (
                self.upward_conditional(y, x)
                * self.element_probability(y)
                / self.element_probability(x)
            )
        raise InvalidSpecError("conditional probability needs a comparable pair")

    def sample_chain(self, seed: int) -> list[ElementCode]:
        rng = random.Random(seed)
        x = self.bottom()
        chain = [x]
        for _ in range(self.spec.top_rank):
            options = self.covers(x)
            probs = [self.transition(x, y) for y in options]
            x = _choose(rng, options, probs)
            chain.append(x)
        return chain


def _choose(rng: random.Random, options, probs):
    den = math.lcm(*(p.denominator for p in probs))
    draw = rng.randrange(den)
    acc = 0
    for y, p in zip(options, probs):
        acc += p.numerator * (den // p.denominator)
        if draw < acc:
            return y
    raise ValueError("transition probabilities do not sum to one")


def _check_cover(x: ElementCode, y: ElementCode):
    if compare(x, y) != "<" or y.rank != x.rank + 1:
        raise InvalidSpecError(f"{y} is not an upper cover of {x}")


class UniformBooleanChains(ChainDistribution):
    """Uniform maximal chains in P(n)."""

    kind = "uniform_maximal"

    def __init__(self, n: int):
        self.spec = boolean(n)

    def transition(self, x, y):
        _check_cover(x, y)
        return Fraction(1, self.spec.n - x.rank)

    def element_probability(self, x):
        return Fraction(1, math.comb(self.spec.n, x.rank))

    def upward_conditional(self, x, y):
        return Fraction(1, math.comb(self.spec.n - x.rank, y.rank - x.rank))

    def sample_chain(self, seed):
        rng = random.Random(seed)
        order = list(range(self.spec.n))
        rng.shuffle(order)
        chain, mask = [self.bottom()], 0
        for j in order:
            mask |= 1 << j
            chain.append(ElementCode("boolean", self.spec.n, mask))
        return chain


class UniformSubspaceChains(ChainDistribution):
    """Uniform maximal chains (complete flags) in V(q, n)."""

    kind = "uniform_maximal"

    def __init__(self, n: int, q: int):
        self.spec = subspace(n, q)

    def transition(self, x, y):
        _check_cover(x, y)
        return Fraction(1, gaussian_binomial(self.spec.n - x.rank, 1, self.spec.q))

    def element_probability(self, x):
        return Fraction(1, gaussian_binomial(self.spec.n, x.rank, self.spec.q))

    def upward_conditional(self, x, y):
        n, q = self.spec.n, self.spec.q
        return Fraction(1, gaussian_binomial(n - x.rank, y.rank - x.rank, q))

    def sample_chain(self, seed):
        # a uniform vector outside x lands in each cover equally often
        rng = random.Random(seed)
        n, q = self.spec.n, self.spec.q
        x = self.bottom()
        chain = [x]
        for _ in range(n):
            while True:
                v = tuple(rng.randrange(q) for _ in range(n))
                if any(v) and not in_span(v, x.payload, q):
                    break
            x = ElementCode("subspace", n, rref(x.payload + (v,), q), q)
            chain.append(x)
        return chain


class MuChains(ChainDistribution):
    """The memoryless level-uniform distribution on maximal chains of {0,1,2}^n."""

    kind = "mu_multiset"

    def __init__(self, n: int):
        self.spec = rpower(n, 2)
        self.table = build_weight_table(n)
        n_ = n
        self.to_two = {}
        self.to_one = {}
        for i in range(2 * n_):
            Li = ell(i, n_)
            for s in slice_range(n_, i):
                self.to_two[i, s] = Li * self.table.w[i, s]
                self.to_one[i, s] = Li * self.table.wprime[i, s]
        self._slice_mass = None

    @staticmethod
    def _twos(x: ElementCode) -> int:
        return sum(1 for d in x.payload if d == 2)

    def transition(self, x, y):
        _check_cover(x, y)
        key = (x.rank, self._twos(x))
        return self.to_two[key] if self._twos(y) > key[1] else self.to_one[key]

    def slice_masses(self) -> dict:
        """P(C meets L_i^s), by forward dynamic programming over (i, s)."""
        if self._slice_mass is None:
            n = self.spec.n
            mass = {(0, 0): Fraction(1)}
            for i in range(2 * n):
                for s in slice_range(n, i):
                    m = mass.get((i, s), Fraction(0))
                    if not m:
                        continue
                    if i - 2 * s:
                        key = (i + 1, s + 1)
                        mass[key] = mass.get(key, 0) + m * (i - 2 * s) * self.to_two[i, s]
                    if n - i + s:
                        key = (i + 1, s)
                        mass[key] = mass.get(key, 0) + m * (n - i + s) * self.to_one[i, s]
            self._slice_mass = mass
        return self._slice_mass

    def slice_probability(self, i: int, s: int) -> Fraction:
        """Probability that one fixed element of L_i^s lies on the chain."""
        return self.slice_masses().get((i, s), Fraction(0)) / level_slice_size(self.spec.n, i, s)

    def element_probability(self, x):
        return self.slice_probability(x.rank, self._twos(x))

    def conditionals_from_type(self, zeros: int, ones: int, twos: int) -> dict:
        """P(y in C | x in C) for every y >= x, where x has the given
        coordinate counts.

        Keys are (u1, u2, v): u1 of x's zero coordinates became 1, u2 became 2,
        and v of x's one coordinates became 2. The result depends only on this
        type because mu is invariant under coordinate permutations.
        """
        return _mu_type_conditionals(self.spec.n, zeros, ones, twos)

    def upward_conditional(self, x, y):
        a0 = sum(1 for d in x.payload if d == 0)
        a1 = sum(1 for d in x.payload if d == 1)
        u1 = sum(1 for a, b in zip(x.payload, y.payload) if a == 0 and b == 1)
        u2 = sum(1 for a, b in zip(x.payload, y.payload) if a == 0 and b == 2)
        v = sum(1 for a, b in zip(x.payload, y.payload) if a == 1 and b == 2)
        return self.conditionals_from_type(a0, a1, self.spec.n - a0 - a1)[u1, u2, v]


@lru_cache(maxsize=4096)
def _mu_type_conditionals(n: int, a0: int, a1: int, a2: int) -> dict:
    dist = _mu(n)
    base_rank = a1 + 2 * a2
    frontier = {(0, 0, 0): Fraction(1)}
    out = {}
    while frontier:
        nxt = {}
        for (u1, u2, v), m in frontier.items():
            out[u1, u2, v] = m
            i = base_rank + u1 + 2 * u2 + v
            if i == 2 * n:
                continue
            s = a2 + u2 + v
            zeros_left = a0 - u1 - u2
            if zeros_left:
                key = (u1 + 1, u2, v)
                nxt[key] = nxt.get(key, 0) + m * zeros_left * dist.to_one[i, s]
            if u1:
                key = (u1 - 1, u2 + 1, v)
                nxt[key] = nxt.get(key, 0) + m * u1 * dist.to_two[i, s]
            if a1 - v:
                key = (u1, u2, v + 1)
                nxt[key] = nxt.get(key, 0) + m * (a1 - v) * dist.to_two[i, s]
        frontier = nxt
    # aggregated mass over all y of a type -> probability of one such y
    return {
        (u1, u2, v): m / (math.comb(a0, u1) * math.comb(a0 - u1, u2) * math.comb(a1, v))
        for (u1, u2, v), m in out.items()
    }


@lru_cache(maxsize=64)
def _mu(n: int) -> MuChains:
    return MuChains(n)


class ElementChains(ChainDistribution):
    """A memoryless chain distribution on a materialised poset given by
    explicit cover-transition probabilities. Probabilities are computed by
    element-level dynamic programming."""

    def __init__(self, poset: RankedPoset, trans: dict, kind: str = "custom"):
        self.poset = poset
        self.spec = poset.spec
        self.kind = kind
        self.trans = trans  # (a, b) index pair -> Fraction, b an upper cover of a
        for a in range(len(poset)):
            outs = poset.covers_up[a]
            if outs and sum(trans.get((a, b), 0) for b in outs) != 1:
                raise InvalidSpecError(f"transitions out of {poset.elements[a]} do not sum to 1")
        self._forward = {}

    @classmethod
    def uniform_maximal(cls, poset: RankedPoset) -> "ElementChains":
        """Uniform measure on maximal chains: step to cover y with probability
        (#maximal chains above y) / (#maximal chains above x)."""
        ups = [0] * len(poset)
        for a in range(len(poset) - 1, -1, -1):
            outs = poset.covers_up[a]
            ups[a] = sum(ups[b] for b in outs) if outs else 1
        trans = {
            (a, b): Fraction(ups[b], ups[a]) for a in range(len(poset)) for b in poset.covers_up[a]
        }
        return cls(poset, trans, "uniform_maximal")

    @classmethod
    def from_distribution(cls, poset: RankedPoset, dist: ChainDistribution) -> "ElementChains":
        els = poset.elements
        trans = {
            (a, b): dist.transition(els[a], els[b])
            for a in range(len(poset))
            for b in poset.covers_up[a]
        }
        return cls(poset, trans, dist.kind)

    def covers(self, x):
        return [self.poset.elements[b] for b in self.poset.covers_up[self.poset.index[x]]]

    def bottom(self):
        return self.poset.elements[0]

    def transition(self, x, y):
        a, b = self.poset.index[x], self.poset.index[y]
        if (a, b) not in self.trans:
            raise InvalidSpecError(f"{y} is not an upper cover of {x}")
        return self.trans[a, b]

    def forward_from(self, a: int) -> list:
        """P(element in C | element a in C) for every element (0 if not above)."""
        if a not in self._forward:
            probs = [Fraction(0)] * len(self.poset)
            probs[a] = Fraction(1)
            for i in range(self.poset.rank[a], self.poset.N):
                for c in self.poset.level(i):
                    if probs[c]:
                        for b in self.poset.covers_up[c]:
                            probs[b] += probs[c] * self.trans[c, b]
            self._forward[a] = probs
        return self._forward[a]

    def element_probability(self, x):
        return self.forward_from(0)[self.poset.index[x]]

    def upward_conditional(self, x, y):
        return self.forward_from(self.poset.index[x])[self.poset.index[y]]

    def enumerate_chains(self):
        """Every maximal chain (as index tuple) with its probability."""
        out = []

        def walk(path, p):
            a = path[-1]
            outs = self.poset.covers_up[a]
            if not outs:
                out.append((tuple(path), p))
                return
            for b in outs:
                walk(path + [b], p * self.trans[a, b])

        walk([0], Fraction(1))
        return out


def default_distribution(spec: FamilySpec, poset: Optional[RankedPoset] = None) -> ChainDistribution:
    """Uniform maximal chains for P(n) and V(q, n), mu for {0,1,2}^n, and the
    element-level uniform maximal chain measure for other grids."""
    if spec.family == "boolean":
        return UniformBooleanChains(spec.n)
    if spec.family == "subspace":
        return UniformSubspaceChains(spec.n, spec.q)
    if spec.r == 2 and spec.n >= 1:
        return _mu(spec.n)
    from .poset import build_poset

    return ElementChains.uniform_maximal(poset or build_poset(spec))


# -- element probabilities and conditionals (functional API) -----------------


def transition_probability(dist: ChainDistribution, x: ElementCode, y: ElementCode) -> Fraction:
    return dist.transition(x, y)


def element_probability(dist: ChainDistribution, x: ElementCode) -> Fraction:
    return dist.element_probability(x)


def conditional_probability(dist: ChainDistribution, x: ElementCode, y: ElementCode) -> Fraction:
    return dist.conditional_probability(x, y)


def sample_chain(dist: ChainDistribution, seed: int) -> list[ElementCode]:
    return dist.sample_chain(seed)


# -- comparability digraphs --------------------------------------------------


class ComparabilityDigraph:
    """Exactly one arc per comparable pair of a (sub)poset."""

    def __init__(self, poset: RankedPoset, arcs: list, rule: str, members: Optional[list] = None):
        self.poset = poset
        self.arcs = arcs
        self.rule = rule
        self.members = members if members is not None else list(range(len(poset)))
        self._arcset = set(arcs)

    def has_arc(self, a: int, b: int) -> bool:
        return (a, b) in self._arcset

    def audit(self) -> list:
        """Pairs breaking the exactly-one-arc rule."""
        bad = []
        mem = self.members
        for ia, a in enumerate(mem):
            for b in mem[ia + 1 :]:
                n_arcs = self.has_arc(a, b) + self.has_arc(b, a)
                if n_arcs != (1 if self.poset.comparable(a, b) else 0):
                    bad.append((a, b))
        return bad


def toward_middle(poset: RankedPoset, a: int, b: int) -> bool:
    """Arc a -> b iff rank(b) is strictly closer to N/2, or a < b with
    rank(a) = N - rank(b)."""
    N = poset.N
    ra, rb = poset.rank[a], poset.rank[b]
    da, db = abs(2 * ra - N), abs(2 * rb - N)
    if db < da:
        return True
    return db == da and ra == N - rb and poset.less(a, b)


def build_digraph(
    poset: RankedPoset,
    rule: str | Callable = "toward_middle",
    members: Optional[Iterable[int]] = None,
) -> ComparabilityDigraph:
    mem = sorted(members) if members is not None else list(range(len(poset)))
    if rule == "toward_middle":
        orient, name = toward_middle, "toward_middle_with_complement_arcs"
    elif callable(rule):
        orient, name = rule, "custom"
    else:
        raise InvalidSpecError(f"unknown orientation rule {rule!r}")
    arcs = []
    memset = set(mem)
    for a in mem:
        for b in poset.indices_of(poset.comp_mask[a]):
            if b in memset and orient(poset, a, b):
                arcs.append((a, b))
    dg = ComparabilityDigraph(poset, arcs, name, mem)
    if name == "custom" and dg.audit():
        raise InvalidSpecError("custom rule does not give exactly one arc per comparable pair")
    return dg


# -- verification sweeps -----------------------------------------------------


def verify_weight_identities(n: int) -> dict:
    """Non-negativity, flow conservation, boundary zeros, the two symmetry
    identities and the incoming-weight identity, all exact."""
    t = build_weight_table(n)
    w, wp = t.w, t.wprime
    v = []
    for i in range(2 * n):
        Li = ell(i, n)
        for s in slice_range(n, i):
            if w[i, s] < 0 or wp[i, s] < 0:
                v.append({"identity": "nonnegative", "i": i, "s": s})
            if (i - 2 * s) * w[i, s] + (n - i + s) * wp[i, s] != Fraction(1, Li):
                v.append({"identity": "flow", "i": i, "s": s})
            if 2 * s == i and w[i, s] != 0:
                v.append({"identity": "boundary_w", "i": i, "s": s})
            if s == i - n and wp[i, s] != 0:
                v.append({"identity": "boundary_wprime", "i": i, "s": s})
            j = 2 * n - i - 1
            if (j, n - i + s) in wp and wp[j, n - i + s] != w[i, s]:
                v.append({"identity": "sym1", "i": i, "s": s})
            if (j, n - i + s - 1) in w and w[j, n - i + s - 1] != wp[i, s]:
                v.append({"identity": "sym2", "i": i, "s": s})
        target = Fraction(1, ell(i + 1, n))
        for t_ in slice_range(n, i + 1):
            got = t_ * w.get((i, t_ - 1), 0) + (i + 1 - 2 * t_) * wp.get((i, t_), 0)
            if got != target:
                v.append({"identity": "incoming", "i": i, "t": t_})
    return {"check": "weight_identities", "n": n, "violations": v}


def verify_weight_inequalities(n: int) -> dict:
    """(a) w' < w below the middle, (b) the upper bound on w, (c) the
    one-step transition bound, (d) the symmetry identities."""
    t = build_weight_table(n)
    w, wp = t.w, t.wprime
    v, skipped = [], []
    if n < 2:
        skipped.append("a")
    else:
        for i in range(1, n):
            for s in range(0, (i + 1) // 2):
                if not wp[i, s] < w[i, s]:
                    v.append({"clause": "a", "i": i, "s": s})
    if n < 5:
        skipped += ["b", "c"]
    else:
        for i in range(1, n):
            bound = Fraction(2, (i + 1) * ell(i + 1, n))
            for s in range(0, (i + 1) // 2):
                if w[i, s] > bound:
                    v.append({"clause": "b", "i": i, "s": s})
        for i in range(2 * n):
            Li = ell(i, n)
            if i <= n - 1:
                bound = Fraction(2 * Li, (i + 1) * ell(i + 1, n))
            else:
                bound = Fraction(2, 2 * n - i)
            for s in slice_range(n, i):
                if (i - 2 * s and Li * w[i, s] > bound) or (n - i + s and Li * wp[i, s] > bound):
                    v.append({"clause": "c", "i": i, "s": s})
    for i in range(2 * n):
        for s in slice_range(n, i):
            j = 2 * n - i - 1
            if (j, n - i + s) in wp and wp[j, n - i + s] != w[i, s]:
                v.append({"clause": "d", "identity": "sym1", "i": i, "s": s})
            if (j, n - i + s - 1) in w and w[j, n - i + s - 1] != wp[i, s]:
                v.append({"clause": "d", "identity": "sym2", "i": i, "s": s})
    return {"check": "weight_inequalities", "n": n, "violations": v, "skipped": skipped}


def conditional_threshold(n: int, k: int) -> Fraction:
    """(l_{3k-1}(n) / l_{2k-1}(n) - 1)^{-1}."""
    return 1 / (Fraction(ell(3 * k - 1, n), ell(2 * k - 1, n)) - 1)


def _bound_hypotheses(n: int, k: int, i: int, j: int) -> bool:
    return (
        abs(i - j) >= k
        and (min(i, j) >= 2 * k or max(i, j) <= 2 * n - 2 * k)
        and abs(j - n) <= abs(i - n)
    )


def verify_conditional_bound(n: int, k: int) -> dict:
    """Every comparable pair type (x, y) with rank(x) = i, rank(y) = j
    satisfying the three hypotheses, against the threshold."""
    if k < 1:
        raise InvalidSpecError("k must be >= 1")
    dist = _mu(n)
    thr = conditional_threshold(n, k)
    max_ratio = Fraction(0)
    worst = None
    violations = []
    checked = 0
    for a2 in range(n + 1):
        for a1 in range(n + 1 - a2):
            a0 = n - a1 - a2
            i = a1 + 2 * a2
            px = dist.slice_probability(i, a2)
            for (u1, u2, v), p_up in dist.conditionals_from_type(a0, a1, a2).items():
                j = i + u1 + 2 * u2 + v
                if j == i:
                    continue
                s_y = a2 + u2 + v
                # lower element x, upper element y: both orientations of the pair
                for lo_first in (True, False):
                    if lo_first:
                        ii, jj, p = i, j, p_up
                    else:
                        ii, jj = j, i
                        p = p_up * px / dist.slice_probability(j, s_y)
                    if not _bound_hypotheses(n, k, ii, jj):
                        continue
                    checked += 1
                    ratio = p / thr
                    if ratio > max_ratio:
                        max_ratio = ratio
                        worst = {"i": ii, "j": jj, "type": [a0, a1, a2, u1, u2, v]}
                    if p > thr:
                        violations.append(
                            {"i": ii, "j": jj, "x_counts": [a0, a1, a2], "moves": [u1, u2, v], "p": p}
                        )
    return {
        "check": "conditional_bound",
        "n": n,
        "k": k,
        "threshold": thr,
        "pairs_checked": checked,
        "max_ratio": max_ratio,
        "worst": worst,
        "violations": violations,
    }


def case1_constant(c: float) -> float:
    """(2c)^c (1 - c/2) / (e^{c/2} (1 - c/2)^{c/2}); display-only."""
    return (2 * c) ** c * (1 - c / 2) / (math.exp(c / 2) * (1 - c / 2) ** (c / 2))
