"""p-random subsets and the largest antichain they contain."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .chains import GENERATOR_ID
from .errors import InvalidSpecError, ResourceLimitError
from .family import FamilySpec
from .matching import max_antichain_in, width
from .poset import RankedPoset, build_poset

MASK64 = (1 << 64) - 1
EXPERIMENT_LIMITS = {"rpower": 8, "subspace": 4, "boolean": 12}
SEED_MIX = "splitmix64(master_seed ^ splitmix64(trial_index + 0x9e3779b97f4a7c15))"


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, trial: int) -> int:
    return splitmix64((master_seed & MASK64) ^ splitmix64((trial + 0x9E3779B97F4A7C15) & MASK64))


def sample_random_subset(poset: RankedPoset, p: Fraction, seed: int) -> list[int]:
    """Each element kept independently with probability p (exact rational)."""
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise InvalidSpecError("p must lie in [0, 1]")
    if p == 0:
        return []
    if p == 1:
        return list(range(len(poset)))
    rng = random.Random(seed)
    num, den = p.numerator, p.denominator
    return [a for a in range(len(poset)) if rng.randrange(den) < num]


def chernoff_bound(delta: Fraction, expectation: Fraction) -> float:
    """exp(-delta^2 E / 3) for 0 < delta < 1, else exp(-delta E / 3)."""
    if delta <= 0:
        raise InvalidSpecError("delta must be positive")
    if expectation < 0:
        raise InvalidSpecError("expectation must be non-negative")
    d, e = float(delta), float(expectation)
    return math.exp(-d * d * e / 3) if d < 1 else math.exp(-d * e / 3)


def p_for_c(spec: FamilySpec, c: Fraction) -> Fraction:
    """p = c/n for grids and P(n), p = c/q^{n/2} for V(q, n); clamped to 1."""
    c = Fraction(c)
    if c < 0:
        raise InvalidSpecError("c must be non-negative")
    if spec.family == "subspace":
        if spec.n % 2 == 0:
            p = c / spec.q ** (spec.n // 2)
        else:
            p = Fraction(float(c) / spec.q ** (spec.n / 2)).limit_denominator(10**9)
    else:
        p = c / spec.n
    return min(p, Fraction(1))


@dataclass(frozen=True)
class RandomSubsetSpec:
    poset: FamilySpec
    p: Fraction
    trials: int
    master_seed: int
    epsilon: Fraction
    c: Optional[Fraction] = None

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise InvalidSpecError("p must lie in [0, 1]")
        if self.trials < 1:
            raise InvalidSpecError("trials must be positive")
        if self.epsilon <= 0:
            raise InvalidSpecError("epsilon must be positive")
        if not 0 <= self.master_seed <= MASK64:
            raise InvalidSpecError("master_seed must be a 64-bit unsigned integer")
        cap = EXPERIMENT_LIMITS[self.poset.family]
        if self.poset.n > cap or (self.poset.family == "rpower" and self.poset.r != 2):
            raise ResourceLimitError(f"experiments support {self.poset.family} with n <= {cap}")

    def to_dict(self) -> dict:
        return {
            "poset": self.poset.to_dict(),
            "p": self.p,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "epsilon": self.epsilon,
            "c": self.c,
        }


def _uncovered_construction(poset: RankedPoset, chosen: set) -> int:
    """Middle level of the sample plus sampled elements one level up that have
    nothing from the sampled middle level below them."""
    mid = poset.N // 2
    low = [a for a in poset.level(mid) if a in chosen]
    low_mask = poset.mask_of(low)
    up = [a for a in poset.level(mid + 1) if a in chosen and not poset.down[a] & low_mask] if mid < poset.N else []
    return len(low) + len(up)


def run_threshold_experiment(spec: RandomSubsetSpec) -> dict:
    poset = build_poset(spec.poset)
    w = width(poset)[0]
    threshold = (1 + spec.epsilon) * spec.p * w
    per_trial = []
    exceed = construction_hits = 0
    for t in range(spec.trials):
        seed = derive_seed(spec.master_seed, t)
        sample = sample_random_subset(poset, spec.p, seed)
        size = max_antichain_in(poset, sample)[0]
        per_trial.append({"trial": t, "seed": seed, "size": len(sample), "width": size})
        exceed += size > threshold
        construction_hits += _uncovered_construction(poset, set(sample)) > spec.p * w
    expectation = spec.p * w
    return {
        "spec": spec.to_dict(),
        "generator": GENERATOR_ID,
        "seed_derivation": SEED_MIX,
        "poset_width": w,
        "threshold": threshold,
        "per_trial": per_trial,
        "mean_size": Fraction(sum(r["size"] for r in per_trial), spec.trials),
        "exceedance": exceed / spec.trials,
        "construction_exceeds_pw": construction_hits / spec.trials,
        "chernoff_ref": chernoff_bound(spec.epsilon, expectation) if expectation > 0 else 1.0,
    }


def sweep_c(
    family: FamilySpec,
    cs: Sequence[Fraction],
    epsilon: Fraction,
    trials: int,
    master_seed: int,
) -> dict:
    """One experiment per c with p = p_for_c(c); clamps p at 1."""
    runs = []
    for c in cs:
        p = p_for_c(family, c)
        runs.append(run_threshold_experiment(RandomSubsetSpec(family, p, trials, master_seed, Fraction(epsilon), Fraction(c))))
    return {"poset": family.to_dict(), "generator": GENERATOR_ID, "runs": runs}


def trial_csv(report: dict) -> str:
    lines = ["trial,size,max_antichain"]
    lines += [f"{r['trial']},{r['size']},{r['width']}" for r in report["per_trial"]]
    return "\n".join(lines) + "\n"
