"""Element codes, ranked posets and their comparability structure."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Optional, Union

import numpy as np

from .errors import InvalidSpecError, ResourceLimitError
from .family import FamilySpec
from .fields import field
from .ranks import ground_size, level_sizes

DEFAULT_ELEMENT_LIMIT = 10**7
NORMALISED_MATCHING_LEVEL_CAP = 22
_HEX = "0123456789abcdef"

Payload = Union[int, tuple]


@dataclass(frozen=True)
class ElementCode:
    """Canonical encoding of one poset element.

    ``payload`` is a bitmask for boolean elements (bit j set iff j+1 is a
    member), a digit tuple for rpower elements, and a tuple of reduced row
    echelon rows for subspace elements.
    """

    family: str
    n: int
    payload: Payload
    q: Optional[int] = None

    @property
    def rank(self) -> int:
        if self.family == "boolean":
            return bin(self.payload).count("1")
        if self.family == "rpower":
            return sum(self.payload)
        return len(self.payload)

    def encode(self) -> str:
        if self.family == "boolean":
            return "".join("1" if self.payload >> j & 1 else "0" for j in range(self.n))
        if self.family == "rpower":
            if all(d < 10 for d in self.payload):
                return "".join(map(str, self.payload))
            return ",".join(map(str, self.payload))
        if not self.payload:
            return "~"
        if self.q > len(_HEX):
            return "|".join(",".join(map(str, row)) for row in self.payload)
        return "|".join("".join(_HEX[c] for c in row) for row in self.payload)

    def sort_key(self):
        return (self.rank, self.encode())

    def __str__(self) -> str:
        return self.encode()


def decode(spec: FamilySpec, text: str) -> ElementCode:
    """Inverse of :meth:`ElementCode.encode` (validates canonical form)."""
    if spec.family == "boolean":
        if len(text) != spec.n or set(text) - {"0", "1"}:
            raise InvalidSpecError(f"bad boolean element {text!r}")
        return ElementCode("boolean", spec.n, sum(1 << j for j, c in enumerate(text) if c == "1"))
    if spec.family == "rpower":
        try:
            parts = text.split(",") if "," in text or spec.n == 1 else list(text)
            digits = tuple(int(c) for c in parts)
        except ValueError:
                raise InvalidSpecError(f"bad rpower element {text!r}") from None
        if len(digits) != spec.n or any(not 0 <= d <= spec.r for d in digits):
            raise InvalidSpecError(f"bad rpower element {text!r}")
        return ElementCode("rpower", spec.n, digits)
    if text == "~":
        return ElementCode("subspace", spec.n, (), spec.q)
    try:
        if spec.q > len(_HEX):
            rows = tuple(tuple(int(c) for c in row.split(",")) for row in text.split("|"))
        else:
            rows = tuple(tuple(_HEX.index(c) for c in row) for row in text.split("|"))
    except ValueError:
        raise InvalidSpecError(f"bad subspace element {text!r}") from None
    if any(len(row) != spec.n or max(row) >= spec.q or min(row) < 0 for row in rows):
        raise InvalidSpecError(f"bad subspace element {text!r}")
    canon = rref(rows, spec.q)
    if canon != rows:
        raise InvalidSpecError(f"subspace element {text!r} is not in reduced row echelon form")
    return ElementCode("subspace", spec.n, rows, spec.q)


# -- linear algebra over GF(q) ----------------------------------------------


def rref(rows: Iterable[Iterable[int]], q: int) -> tuple:
    """Reduced row echelon form (zero rows dropped) as a tuple of row tuples."""
    F = field(q)
    mat = [list(r) for r in rows]
    if not mat:
        return ()
    ncols = len(mat[0])
    out = []
    for col in range(ncols):
        pivot = next((r for r in mat if r[col]), None)
        if pivot is None:
            continue
        mat.remove(pivot)
        inv = F.inv(pivot[col])
        pivot = [F.mul(inv, a) for a in pivot]
        for other in out + mat:
            c = other[col]
            if c:
                for j in range(ncols):
                    other[j] = F.sub(other[j], F.mul(c, pivot[j]))
        out.append(pivot)
    out.sort(key=lambda r: next(j for j, a in enumerate(r) if a))
    return tuple(tuple(r) for r in out)


def in_span(vector, basis_rref: tuple, q: int) -> bool:
    """Membership of ``vector`` in the row space of an RREF basis."""
    F = field(q)
    v = list(vector)
    for row in basis_rref:
        piv = next(j for j, a in enumerate(row) if a)
        c = v[piv]
        if c:
            v = [F.sub(a, F.mul(c, b)) for a, b in zip(v, row)]
    return not any(v)


def orthogonal_complement(basis_rref: tuple, n: int, q: int) -> tuple:
    """RREF basis of the orthogonal complement under the standard dot product."""
    F = field(q)
    pivots = [next(j for j, a in enumerate(row) if a) for row in basis_rref]
    free = [j for j in range(n) if j not in pivots]
    vectors = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for row, p in zip(basis_rref, pivots):
            v[p] = F.sub(0, row[f])
        vectors.append(v)
    return rref(vectors, q)


def _rref_enumerate(n: int, k: int, q: int):
    """All k-dimensional subspaces of GF(q)^n as RREF tuples."""
    if k == 0:
        yield ()
        return
    for pivots in combinations(range(n), k):
        free_slots = [
            (t, c) for t, p in enumerate(pivots) for c in range(p + 1, n) if c not in pivots
        ]
        for values in product(range(q), repeat=len(free_slots)):
            rows = [[0] * n for _ in range(k)]
            for t, p in enumerate(pivots):
                rows[t][p] = 1
            for (t, c), v in zip(free_slots, values):
                rows[t][c] = v
            yield tuple(tuple(r) for r in rows)


# -- the comparability oracle ------------------------------------------------


def compare(x: ElementCode, y: ElementCode) -> Optional[str]:
    """Return "<", ">", "=" or None (incomparable)."""
    if x.family != y.family or x.n != y.n or x.q != y.q:
        raise InvalidSpecError("elements come from different posets")
    if x == y:
        return "="
    if x.family == "boolean":
        if x.payload & ~y.payload == 0:
            return "<"
        if y.payload & ~x.payload == 0:
            return ">"
        return None
    if x.family == "rpower":
        if all(a <= b for a, b in zip(x.payload, y.payload)):
            return "<"
        if all(a >= b for a, b in zip(x.payload, y.payload)):
            return ">"
        return None
    if len(x.payload) < len(y.payload):
        if all(in_span(row, y.payload, x.q) for row in x.payload):
            return "<"
        return None
    if len(x.payload) > len(y.payload):
        if all(in_span(row, x.payload, x.q) for row in y.payload):
            return ">"
    return None


def is_comparable(x: ElementCode, y: ElementCode) -> bool:
    rel = compare(x, y)
    return rel is not None and rel != "="


def complement(x: ElementCode, spec: FamilySpec) -> ElementCode:
    """Image under the rank-reversing anti-automorphism of the family."""
    if x.family == "boolean":
        return ElementCode("boolean", x.n, ((1 << x.n) - 1) & ~x.payload)
    if x.family == "rpower":
        return ElementCode("rpower", x.n, tuple(spec.r - d for d in x.payload))
    return ElementCode("subspace", x.n, orthogonal_complement(x.payload, x.n, x.q), x.q)


def iter_level(spec: FamilySpec, i: int) -> Iterable[ElementCode]:
    """Elements of rank i in canonical order."""
    n = spec.n
    if spec.family == "boolean":
        codes = [
            ElementCode("boolean", n, sum(1 << j for j in c)) for c in combinations(range(n), i)
        ]
    elif spec.family == "rpower":
        codes = [
            ElementCode("rpower", n, d)
            for d in product(range(spec.r + 1), repeat=n)
            if sum(d) == i
        ]
    else:
        codes = [ElementCode("subspace", n, rows, spec.q) for rows in _rref_enumerate(n, i, spec.q)]
    return sorted(codes, key=ElementCode.sort_key)


def upper_covers(x: ElementCode, spec: FamilySpec) -> list[ElementCode]:
    n = spec.n
    if x.family == "boolean":
        return [
            ElementCode("boolean", n, x.payload | 1 << j) for j in range(n) if not x.payload >> j & 1
        ]
    if x.family == "rpower":
        out = []
        for j, d in enumerate(x.payload):
            if d < spec.r:
                out.append(ElementCode("rpower", n, x.payload[:j] + (d + 1,) + x.payload[j + 1 :]))
        return out
    seen = set()
    for v in product(range(spec.q), repeat=n):
        if any(v) and not in_span(v, x.payload, spec.q):
            seen.add(rref(x.payload + (v,), spec.q))
    return [ElementCode("subspace", n, rows, spec.q) for rows in seen]


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class RankedPoset:
    """A fully materialised ranked poset with comparability bitmasks.

    Element indices follow the canonical total order (rank first, then the
    encoded payload), so every level occupies a contiguous index range.
    """

    def __init__(self, spec: FamilySpec, limit: int = DEFAULT_ELEMENT_LIMIT):
        size = ground_size(spec)
        if size > limit:
            raise ResourceLimitError(f"{size} elements exceeds the limit {limit}")
        self.spec = spec
        self.N = spec.top_rank
        self.elements: list[ElementCode] = []
        self.level_start: list[int] = []
        for i in range(self.N + 1):
            self.level_start.append(len(self.elements))
            self.elements.extend(iter_level(spec, i))
        self.level_start.append(len(self.elements))
        self.index = {x: k for k, x in enumerate(self.elements)}
        self.rank = [x.rank for x in self.elements]
        self.covers_up = [sorted(self.index[y] for y in upper_covers(x, spec)) for x in self.elements]
        self.covers_down: list[list[int]] = [[] for _ in self.elements]
        for a, ups in enumerate(self.covers_up):
            for b in ups:
                self.covers_down[b].append(a)
        size = len(self.elements)
        self.up = [0] * size
        for a in range(size - 1, -1, -1):
            m = 0
            for b in self.covers_up[a]:
                m |= (1 << b) | self.up[b]
            self.up[a] = m
        self.down = [0] * size
        for b in range(size):
            m = 0
            for a in self.covers_down[b]:
                m |= (1 << a) | self.down[a]
            self.down[b] = m
        self.comp_mask = [u | d for u, d in zip(self.up, self.down)]

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"RankedPoset({self.spec.to_json()}, {len(self)} elements)"

    def level(self, i: int) -> range:
        return range(self.level_start[i], self.level_start[i + 1])

    def level_sizes(self) -> list[int]:
        return [len(self.level(i)) for i in range(self.N + 1)]

    def less(self, a: int, b: int) -> bool:
        return bool(self.up[a] >> b & 1)

    def comparable(self, a: int, b: int) -> bool:
        return bool(self.comp_mask[a] >> b & 1)

    def degree(self, a: int, within: int) -> int:
        return bin(self.comp_mask[a] & within).count("1")

    def mask_of(self, indices: Iterable[int]) -> int:
        m = 0
        for a in indices:
            m |= 1 << a
        return m

    def indices_of(self, mask: int) -> list[int]:
        return list(_iter_bits(mask))

    def comparable_pairs(self) -> list[tuple[int, int]]:
        """All (a, b) with element a < element b."""
        return [(a, b) for a in range(len(self)) for b in _iter_bits(self.up[a])]

    def full_mask(self) -> int:
        return (1 << len(self)) - 1

    def is_antichain(self, mask: int) -> bool:
        return all(not self.comp_mask[a] & mask for a in _iter_bits(mask))


@lru_cache(maxsize=32)
def build_poset(spec: FamilySpec, limit: int = DEFAULT_ELEMENT_LIMIT) -> RankedPoset:
    return RankedPoset(spec, limit)


def chain_poset(length: int) -> FamilySpec:
    """{0..r}^1 is a chain with ``length`` elements."""
    return FamilySpec("rpower", 1, r=length - 1)


def check_matching_lym(poset: RankedPoset, antichain: Optional[Iterable[int]] = None) -> dict:
    """LYM sum for a given antichain, or an exhaustive normalised matching
    check over every subset of every level (levels of size <= 22)."""
    sizes = poset.level_sizes()
    if antichain is not None:
        members = sorted(set(antichain))
        if not poset.is_antichain(poset.mask_of(members)):
            raise InvalidSpecError("argument is not an antichain")
        total = sum(Fraction(1, sizes[poset.rank[a]]) for a in members)
        return {
            "check": "lym",
            "lym_sum": total,
            "violations": [] if total <= 1 else [{"lym_sum": total}],
        }
    violations = []
    for i in range(poset.N):
        lo = poset.level(i)
        hi = poset.level(i + 1)
        if len(lo) > NORMALISED_MATCHING_LEVEL_CAP:
            raise ResourceLimitError(
                f"level {i} has {len(lo)} elements; exhaustive check capped at "
                f"{NORMALISED_MATCHING_LEVEL_CAP}"
            )
        # shadow masks relative to level i+1, built by doubling over subsets
        base = hi.start
        covers = [
            sum(1 << (b - base) for b in poset.covers_up[a]) for a in lo
        ]
        if len(hi) <= 63:
            shadow = np.zeros(1 << len(lo), dtype=np.uint64)
            for t, cm in enumerate(covers):
                half = 1 << t
                shadow[half : 2 * half] = shadow[:half] | np.uint64(cm)
            shadow_sizes = np.bitwise_count(shadow).astype(np.int64)
        else:
            shadow_py = [0]
            for cm in covers:
                shadow_py += [s | cm for s in shadow_py]
            shadow_sizes = np.array([bin(s).count("1") for s in shadow_py], dtype=np.int64)
        t_sizes = np.bitwise_count(np.arange(1 << len(lo), dtype=np.uint64)).astype(np.int64)
        bad = np.nonzero(shadow_sizes * len(lo) < t_sizes * len(hi))[0]
        for mask in bad[:10]:
            violations.append({"level": i, "subset_mask": int(mask)})
    return {"check": "normalised_matching", "violations": violations}
