"""Widths and maximum antichains via bipartite matching.

A maximum antichain of a finite poset Q has |Q| - nu elements, where nu is a
maximum matching of the split graph {a_left -> b_right : a < b}. The
matching itself comes from scipy (Hopcroft-Karp); the antichain witness is
recovered from a minimum vertex cover by the usual alternating-path search.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import ResourceLimitError
from .poset import RankedPoset

MATCHING_ELEMENT_LIMIT = 5 * 10**4
BRUTE_ANTICHAIN_LIMIT = 24


def less_matrix(poset: RankedPoset) -> np.ndarray:
    """Boolean matrix M with M[a, b] iff element a < element b."""
    return _less_matrix(poset)


@lru_cache(maxsize=8)
def _less_matrix(poset: RankedPoset) -> np.ndarray:
    size = len(poset)
    if size > MATCHING_ELEMENT_LIMIT:
        raise ResourceLimitError(f"{size} elements exceeds the matching limit")
    nbytes = (size + 7) // 8
    buf = b"".join(m.to_bytes(nbytes, "little") for m in poset.up)
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8).reshape(size, nbytes), axis=1, bitorder="little")
    return bits[:, :size].astype(bool)


def _max_antichain(adj: np.ndarray) -> tuple[int, list[int]]:
    """adj is the strict-order matrix of a poset on 0..k-1."""
    k = adj.shape[0]
    if k == 0:
        return 0, []
    graph = csr_matrix(adj.astype(np.int8))
    match_left = maximum_bipartite_matching(graph, perm_type="column")
    nu = int((match_left >= 0).sum())
    match_right = np.full(k, -1)
    for a, b in enumerate(match_left):
        if b >= 0:
            match_right[b] = a
    # Konig: Z = vertices reachable from free left vertices by alternating paths
    indptr, indices = graph.indptr, graph.indices
    seen_left = np.zeros(k, bool)
    seen_right = np.zeros(k, bool)
    queue = deque(a for a in range(k) if match_left[a] < 0)
    for a in queue:
        seen_left[a] = True
    while queue:
        a = queue.popleft()
        for b in indices[indptr[a] : indptr[a + 1]]:
            if not seen_right[b]:
                seen_right[b] = True
                a2 = match_right[b]
                if a2 >= 0 and not seen_left[a2]:
                    seen_left[a2] = True
                    queue.append(a2)
    # cover = (left not in Z) + (right in Z); antichain = neither copy covered
    witness = [a for a in range(k) if seen_left[a] and not seen_right[a]]
    if len(witness) != k - nu:
        raise AssertionError("witness size disagrees with the matching")
    return k - nu, witness


def width(poset: RankedPoset) -> tuple[int, list[int]]:
    """(width, indices of one maximum antichain)."""
    return _max_antichain(less_matrix(poset))


def max_antichain_in(poset: RankedPoset, subset: Iterable[int]) -> tuple[int, list[int]]:
    """Maximum antichain of the subposet induced on ``subset`` (element indices)."""
    idx = np.array(sorted(subset), dtype=np.int64)
    if idx.size == 0:
        return 0, []
    sub = less_matrix(poset)[np.ix_(idx, idx)]
    size, local = _max_antichain(sub)
    return size, [int(idx[a]) for a in local]


def brute_max_antichain(poset: RankedPoset, subset: Optional[Iterable[int]] = None) -> int:
    """Exhaustive maximum independent set of the comparability graph; an
    oracle for :func:`max_antichain_in`."""
    idx = sorted(subset) if subset is not None else list(range(len(poset)))
    k = len(idx)
    if k > BRUTE_ANTICHAIN_LIMIT:
        raise ResourceLimitError(f"brute-force antichain search is capped at {BRUTE_ANTICHAIN_LIMIT}")
    pos = {a: j for j, a in enumerate(idx)}
    nbr = [0] * k
    for j, a in enumerate(idx):
        for b in poset.indices_of(poset.comp_mask[a]):
            if b in pos:
                nbr[j] |= 1 << pos[b]

    best = 0

    def grow(cand: int, size: int):
        nonlocal best
        if size + bin(cand).count("1") <= best:
            return
        if not cand:
            best = size
            return
        v = cand.bit_length() - 1
        grow(cand & ~(1 << v) & ~nbr[v], size + 1)
        grow(cand & ~(1 << v), size)

    grow((1 << k) - 1, 0)
    return best
