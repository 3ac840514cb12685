"""Multi-stage Kleitman-Winston containers for antichains, exact antichain
enumeration, and finite-n evaluation of the container counting bounds."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .errors import InvalidSpecError, ResourceLimitError
from .family import FamilySpec
from .poset import RankedPoset, _iter_bits
from .ranks import ell, gaussian_binomial, ground_size
from .supersat import BRANCH_AND_BOUND_LIMIT, EXHAUSTIVE_LIMIT, exists_subset_below, min_comp_profile

ANTICHAIN_LISTING_LIMIT = 2 * 10**5
LOG2_DENOMINATOR = 2**32


@dataclass(frozen=True)
class StageConfig:
    stages: tuple[tuple[int, int], ...]  # (d_j, m_j) for j = 1..k
    certified: bool = False

    @property
    def k(self) -> int:
        return len(self.stages)

    def validate(self, m0: int):
        if not self.stages:
            raise InvalidSpecError("at least one stage is required")
        ds = [d for d, _ in self.stages]
        ms = [m0] + [m for _, m in self.stages]
        if any(d < 1 for d in ds) or any(m < 1 for m in ms[1:]):
            raise InvalidSpecError("d_j and m_j must be positive integers")
        if any(a <= b for a, b in zip(ds, ds[1:])):
            raise InvalidSpecError("need d_1 > ... > d_k")
        if any(a <= b for a, b in zip(ms, ms[1:])):
            raise InvalidSpecError(f"need m_0 = {m0} > m_1 > ... > m_k")

    def to_dict(self) -> dict:
        return {"stages": [{"d": d, "m": m} for d, m in self.stages], "certified": self.certified}

    @classmethod
    def from_dict(cls, data: dict) -> "StageConfig":
        try:
            stages = tuple((int(s["d"]), int(s["m"])) for s in data["stages"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpecError(f"malformed stage config: {exc}") from None
        return cls(stages, bool(data.get("certified", False)))

    @classmethod
    def from_json(cls, text: str) -> "StageConfig":
        return cls.from_dict(json.loads(text))


@dataclass
class ContainerRun:
    fingerprints: list[list[int]]  # T_1..T_k as element indices, in insertion order
    containers: list[int]  # f_1..f_k as bitmasks
    trace: list[tuple[int, int, int]]  # (u_i, d_{P_i}(u_i), |P_i|)

    def union_upto(self, j: int) -> frozenset:
        return frozenset(a for T in self.fingerprints[:j] for a in T)

    def final_container(self) -> int:
        mask = self.containers[-1]
        for T in self.fingerprints:
            for a in T:
                mask |= 1 << a
        return mask


def _max_degree(poset: RankedPoset, P: int) -> tuple[int, int]:
    best_u, best_d = -1, -1
    comp = poset.comp_mask
    for a in _iter_bits(P):
        d = bin(comp[a] & P).count("1")
        if d > best_d:
            best_u, best_d = a, d
    return best_u, best_d


def kw_run(poset: RankedPoset, config: StageConfig, antichain: Iterable[int], check: bool = True) -> ContainerRun:
    """The Kleitman-Winston algorithm on antichain I. Ties on maximum degree
    go to the earliest element in the canonical order."""
    I = poset.mask_of(antichain)
    if check:
        config.validate(len(poset))
        if not poset.is_antichain(I):
            raise InvalidSpecError("input is not an antichain")
    thresholds = [2 * d for d, _ in config.stages]
    k = len(thresholds)
    T: list[list[int]] = [[] for _ in range(k)]
    f: list[Optional[int]] = [None] * k
    trace = []
    P = poset.full_mask()
    j = 0
    while True:
        u, deg = _max_degree(poset, P) if P else (-1, -1)
        while j < k and (not P or deg < thresholds[j]):
            f[j] = P
            j += 1
        if j >= k:
            break
        trace.append((u, deg, bin(P).count("1")))
        if I >> u & 1:
            T[j].append(u)
            P &= ~((1 << u) | poset.comp_mask[u])
        else:
            P &= ~(1 << u)
    return ContainerRun(T, f, trace)


def check_run(poset: RankedPoset, config: StageConfig, antichain: Iterable[int], run: ContainerRun) -> list:
    """Every invariant the run must satisfy; returns the violations."""
    I = poset.mask_of(antichain)
    v = []
    ms = [len(poset)] + [m for _, m in config.stages]
    ds = [d for d, _ in config.stages]
    seen = 0
    for j, Tj in enumerate(run.fingerprints):
        tmask = poset.mask_of(Tj)
        if len(Tj) * (2 * ds[j] + 1) > ms[j]:
            v.append(("i", j + 1))
        if j >= 1 and tmask & ~run.containers[j - 1]:
            v.append(("ii", j + 1))
        if tmask & seen or tmask & ~I:
            v.append(("fingerprint_disjoint_subset", j + 1))
        seen |= tmask
        if seen & run.containers[j]:
            v.append(("iii", j + 1))
        fj = run.containers[j]
        if bin(fj).count("1") > ms[j + 1]:
            v.append(("container_size", j + 1))
        if any(bin(poset.comp_mask[a] & fj).count("1") >= 2 * ds[j] for a in _iter_bits(fj)):
            v.append(("container_degree", j + 1))
    if I & ~(seen | run.containers[-1]):
        v.append(("iv", len(ds)))
    degs = [d for _, d, _ in run.trace]
    if any(b > a for a, b in zip(degs, degs[1:])):
        v.append(("degree_sequence", None))
    return v


# -- antichains ------------------------------------------------------------------


def _antichain_recursion(poset: RankedPoset, cand: int, memo: dict) -> int:
    if not cand:
        return 1
    hit = memo.get(cand)
    if hit is not None:
        return hit
    comp = poset.comp_mask
    best, best_deg = -1, 0
    for a in _iter_bits(cand):
        d = bin(comp[a] & cand).count("1")
        if d > best_deg:
            best, best_deg = a, d
    if best_deg == 0:
        total = 1 << bin(cand).count("1")
    else:
        without = cand & ~(1 << best)
        total = _antichain_recursion(poset, without, memo) + _antichain_recursion(
            poset, without & ~comp[best], memo
        )
    memo[cand] = total
    return total


def enumerate_antichains(poset: RankedPoset, limit: int = 128) -> int:
    """Exact number of antichains, the empty one included. Splits on a
    maximum-degree vertex (take it and drop its comparability neighbours,
    or drop it) with memoisation on the candidate set."""
    if len(poset) > limit:
        raise ResourceLimitError(f"antichain enumeration is capped at {limit} elements")
    return _antichain_recursion(poset, poset.full_mask(), {})


def list_antichains(poset: RankedPoset, limit: int = ANTICHAIN_LISTING_LIMIT) -> list[int]:
    """All antichains as bitmasks, in depth-first canonical order."""
    out = []
    comp = poset.comp_mask
    size = len(poset)

    def grow(start: int, mask: int, blocked: int):
        out.append(mask)
        if len(out) > limit:
            raise ResourceLimitError(f"more than {limit} antichains")
        for a in range(start, size):
            if not blocked >> a & 1:
                grow(a + 1, mask | 1 << a, blocked | comp[a])

    grow(0, 0, 0)
    return out


# -- container families ----------------------------------------------------------------


def binom_at_most(n: int, j: int) -> int:
    """binom(n, <= j) = sum_{r <= j} C(n, r)."""
    return sum(math.comb(n, r) for r in range(0, min(j, n) + 1))


EXACT_BINOMIAL_SUM_LIMIT = 5000


def log2_binom_at_most_upper(n: int, j: int) -> Fraction:
    """Certified upper bound on log2 binom(n, <= j): exact summation for small
    j, otherwise binom(n, <= j) <= (e n / j)^j with an outward margin."""
    j = min(j, n)
    if j <= EXACT_BINOMIAL_SUM_LIMIT:
        return log2_upper(binom_at_most(n, j))
    if 2 * j >= n:
        return Fraction(n)
    approx = j * (math.log2(math.e) + math.log2(n) - math.log2(j))
    approx += 1e-9 * abs(approx) + 1e-6
    return Fraction(math.ceil(approx * LOG2_DENOMINATOR), LOG2_DENOMINATOR)


def family_size_bound(config: StageConfig, m0: int) -> int:
    ms = [m0] + [m for _, m in config.stages]
    out = 1
    for j, (d, _) in enumerate(config.stages):
        out *= binom_at_most(ms[j], ms[j] // (2 * d + 1))
    return out


def container_size_bound(config: StageConfig, m0: int) -> Fraction:
    ms = [m0] + [m for _, m in config.stages]
    return ms[-1] + sum(Fraction(ms[j], 2 * d + 1) for j, (d, _) in enumerate(config.stages))


@dataclass
class ContainerFamily:
    poset: RankedPoset
    config: StageConfig
    containers: dict  # container bitmask -> first fingerprint union producing it
    runs: int
    violations: list

    def dump(self) -> str:
        els = self.poset.elements
        lines = [
            " ".join(els[a].encode() for a in _iter_bits(mask)) for mask in sorted(self.containers)
        ]
        return "\n".join(lines) + ("\n" if lines else "")


def build_family(poset: RankedPoset, config: StageConfig, antichains: Optional[list[int]] = None) -> ContainerFamily:
    """Run the algorithm on every antichain, audit each run, check that
    f_j depends only on the fingerprint union, and check the family bounds."""
    config.validate(len(poset))
    if antichains is None:
        antichains = list_antichains(poset)
    k = config.k
    seen_f: dict = {}
    containers: dict = {}
    violations = []
    for I in antichains:
        members = list(_iter_bits(I))
        run = kw_run(poset, config, members, check=False)
        for item in check_run(poset, config, members, run):
            violations.append({"antichain": I, "property": item[0], "stage": item[1]})
        for j in range(1, k + 1):
            key = (j, run.union_upto(j))
            prev = seen_f.setdefault(key, run.containers[j - 1])
            if prev != run.containers[j - 1]:
                violations.append({"antichain": I, "property": "well_defined", "stage": j})
        A = run.final_container()
        containers.setdefault(A, sorted(run.union_upto(k)))
        if I & ~A:
            violations.append({"antichain": I, "property": "c", "stage": None})
    m0 = len(poset)
    if len(containers) > family_size_bound(config, m0):
        violations.append({"property": "a", "family_size": len(containers)})
    cap = container_size_bound(config, m0)
    for A in containers:
        if bin(A).count("1") > cap:
            violations.append({"property": "b", "container": A})
    return ContainerFamily(poset, config, containers, len(antichains), violations)


# -- stage certification ------------------------------------------------------------


def premise_holds(poset: RankedPoset, d: int, m: int) -> bool:
    """Every subset of more than m elements has at least |S| d comparable pairs."""
    N = len(poset)
    if N <= EXHAUSTIVE_LIMIT:
        minima = min_comp_profile(poset)[0]
        return all(minima[s] >= s * d for s in range(m + 1, N + 1))
    if N > BRANCH_AND_BOUND_LIMIT:
        raise ResourceLimitError(f"premise certification is capped at {BRANCH_AND_BOUND_LIMIT} elements")
    return not any(exists_subset_below(poset, s, s * d) for s in range(N, m, -1))


def smallest_certified_m(poset: RankedPoset, d: int) -> int:
    """Least m for which the stage premise holds with this d."""
    N = len(poset)
    if N <= EXHAUSTIVE_LIMIT:
        minima = min_comp_profile(poset)[0]
        bad = [s for s in range(N + 1) if minima[s] < s * d]
        return max(bad) if bad else 0
    for s in range(N, 0, -1):
        if exists_subset_below(poset, s, s * d):
            return s
    return 0


def certify_stages(poset: RankedPoset, config: StageConfig) -> StageConfig:
    config.validate(len(poset))
    for d, m in config.stages:
        if not premise_holds(poset, d, m):
            raise InvalidSpecError(f"stage (d={d}, m={m}) premise fails by brute force")
    return StageConfig(config.stages, certified=True)


# -- counting bounds ---------------------------------------------------------------------


def log2_upper(x: int) -> Fraction:
    """A rational upper bound on log2(x) with denominator 2^32, rounded outward."""
    if x < 1:
        raise ValueError("log2 of a non-positive integer")
    L = x.bit_length()
    shift = max(0, L - 60)
    top = (x >> shift) + (1 if shift else 0)  # top * 2^shift >= x
    approx = math.log2(top) + 1e-12
    return shift + Fraction(math.ceil(approx * LOG2_DENOMINATOR), LOG2_DENOMINATOR)


def count_upper_bound(spec: FamilySpec, config: StageConfig, assume: bool = False) -> dict:
    """log2 of |F| * 2^(largest container), the antichain upper bound."""
    if not config.certified and not assume:
        raise InvalidSpecError("stage premises are not certified; pass assume=True to proceed")
    m0 = ground_size(spec)
    config.validate(m0)
    ms = [m0] + [m for _, m in config.stages]
    fam_log2 = sum(
        (log2_binom_at_most_upper(ms[j], ms[j] // (2 * d + 1)) for j, (d, _) in enumerate(config.stages)),
        Fraction(0),
    )
    cap = math.floor(container_size_bound(config, m0))
    out = {
        "params": {"m0": m0, **config.to_dict()},
        "family_bound_log2_upper": fam_log2,
        "container_size_bound": cap,
        "log2_upper": fam_log2 + cap,
        "premises": "certified" if config.certified else "assumed",
    }
    if m0 <= 4096:
        out["upper"] = family_size_bound(config, m0) << cap
    return out


def _asymptotic_parameters(spec: FamilySpec) -> dict:
    """The stage parameters used in the counting theorems, with d rounded up
    and m rounded up; "infeasible" when a denominator is not positive or the
    stage monotonicity fails."""
    n = spec.n
    if n < 2:
        return {"feasible": False, "reason": "n must be at least 2"}
    ln = math.log(n)
    if spec.family in ("boolean", "rpower"):
        if spec.family == "boolean":
            mid, c1, c2, m0 = math.comb(n, n // 2), 8, 2, 2**n
        else:
            if spec.r != 2:
                return {"feasible": False, "reason": "only {0,1,2}^n has stage parameters"}
            mid, c1, c2, m0 = ell(n, n), 50, 4, 3**n
        d1 = math.ceil(n * math.sqrt(ln))
        d2 = math.ceil(math.sqrt(n * ln))
        den1 = 1 - Fraction(c1 * d1, n * n)
        den2 = 1 - Fraction(c2 * d2, n)
        if den1 <= 0 or den2 <= 0:
            return {"feasible": False, "reason": "parameters infeasible at this n", "d": [d1, d2]}
        m1 = math.ceil(2 * mid / den1)
        m2 = math.ceil(mid / den2)
        stages = ((d1, m1), (d2, m2))
        width = mid
    else:
        q = spec.q
        d = math.ceil(math.sqrt(n) * q ** (n / 4))
        mid = gaussian_binomial(n, n // 2, q)
        den = 1 - Fraction(d, gaussian_binomial(-(-(n + 1) // 2), 1, q))
        m0 = ground_size(spec)
        if den <= 0:
            return {"feasible": False, "reason": "parameters infeasible at this n", "d": [d]}
        stages = ((d, math.ceil(mid / den)),)
        width = mid
    config = StageConfig(stages)
    try:
        config.validate(m0)
    except InvalidSpecError as exc:
        return {"feasible": False, "reason": f"parameters infeasible at this n: {exc}", "stages": stages}
    return {"feasible": True, "config": config, "width": width}


def asymptotic_count_bound(spec: FamilySpec) -> dict:
    """Finite-n evaluation with the theorems' own parameters (premises assumed)."""
    params = _asymptotic_parameters(spec)
    if not params["feasible"]:
        return {"family": spec.to_dict(), **{k: v for k, v in params.items() if k != "config"}}
    res = count_upper_bound(spec, params["config"], assume=True)
    res.pop("upper", None)
    return {
        "family": spec.to_dict(),
        "feasible": True,
        **res,
        "width": params["width"],
        "ratio_to_width_approx": float(res["log2_upper"]) / params["width"],
    }
