"""Rank numbers: binomials, q-binomials, the grid numbers l_i(n, r), the
two-coordinate slices |L_i^s| of {0,1,2}^n, and exact checks of the
log-concavity and ratio bounds used for {0,1,2}^n.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import InvalidSpecError
from .family import FamilySpec
from .fields import is_prime_power


def gaussian_binomial(n: int, i: int, q: int) -> int:
    """Number of i-dimensional subspaces of GF(q)^n."""
    if not 0 <= i <= n:
        raise InvalidSpecError(f"need 0 <= i <= n, got i={i}, n={n}")
    if not is_prime_power(q):
        raise InvalidSpecError(f"q={q} is not a prime power")
    num = 1
    den = 1
    for j in range(i):
        num *= q ** (n - j) - 1
        den *= q ** (j + 1) - 1
    return num // den


def galois_number(n: int, q: int) -> int:
    return sum(gaussian_binomial(n, i, q) for i in range(n + 1))


def level_slice_size(n: int, i: int, s: int) -> int:
    """|L_i^s|: vectors of {0,1,2}^n with coordinate sum i and exactly s twos."""
    if s < 0 or i - s < 0 or i - 2 * s < 0 or i - s > n:
        return 0
    return math.comb(n, i - s) * math.comb(i - s, s)


def slice_range(n: int, i: int) -> range:
    """The s for which L_i^s is non-empty."""
    return range(max(0, i - n), i // 2 + 1)


@lru_cache(maxsize=None)
def _grid_profile(n: int, r: int) -> tuple[int, ...]:
    if r == 2:
        # trinomial coefficients: i a_i = (n - i + 1) a_{i-1} + (2n - i + 2) a_{i-2}
        out = [1, n][: 2 * n + 1]
        for i in range(2, 2 * n + 1):
            out.append(((n - i + 1) * out[i - 1] + (2 * n - i + 2) * out[i - 2]) // i)
        return tuple(out)
    if n == 0:
        return (1,)
    out = []
    for i in range(r * n + 1):
        total = 0
        for j in range(min(n, i // (r + 1)) + 1):
            total += (-1) ** j * math.comb(n, j) * math.comb(i - j * (r + 1) + n - 1, n - 1)
        out.append(total)
    return tuple(out)


def ell(i: int, n: int, r: int = 2) -> int:
    """l_i(n, r), the number of elements of {0..r}^n with coordinate sum i."""
    if not 0 <= i <= r * n:
        return 0
    return _grid_profile(n, r)[i]


def level_size(spec: FamilySpec, i: int) -> int:
    N = spec.top_rank
    if not 0 <= i <= N:
        raise InvalidSpecError(f"level {i} outside 0..{N}")
    if spec.family == "boolean":
        return math.comb(spec.n, i)
    if spec.family == "subspace":
        return gaussian_binomial(spec.n, i, spec.q)
    return _grid_profile(spec.n, spec.r)[i]


def level_sizes(spec: FamilySpec) -> list[int]:
    return [level_size(spec, i) for i in range(spec.top_rank + 1)]


def ground_size(spec: FamilySpec) -> int:
    if spec.family == "boolean":
        return 2**spec.n
    if spec.family == "subspace":
        return galois_number(spec.n, spec.q)
    return (spec.r + 1) ** spec.n


def slices_at_least(n: int, i: int, s: int) -> int:
    """|L_i^{>=s}|."""
    return sum(level_slice_size(n, i, t) for t in range(max(s, 0), i // 2 + 1))


def slices_at_most(n: int, i: int, s: int) -> int:
    """|L_i^{<=s}|."""
    return sum(level_slice_size(n, i, t) for t in range(max(0, i - n), s + 1))


def level_profile_csv(spec: FamilySpec) -> str:
    lines = ["i,size"]
    lines += [f"{i},{size}" for i, size in enumerate(level_sizes(spec))]
    return "\n".join(lines) + "\n"


# -- appendix checks ---------------------------------------------------------


def check_log_concavity(n: int, r: int = 2) -> dict:
    """Check l_{i-1} l_{i+1} <= l_i^2 for 1 <= i <= rn - 1."""
    sizes = [ell(i, n, r) for i in range(r * n + 1)]
    violations = [
        i for i in range(1, r * n) if sizes[i - 1] * sizes[i + 1] > sizes[i] * sizes[i]
    ]
    return {"check": "log_concavity", "n": n, "r": r, "violations": violations}


def _ratio1_bounds(n: int, i: int) -> tuple[Fraction, Fraction]:
    ch, fl = -(-i // 2), i // 2
    lower = Fraction(n + 1, i + 1)
    upper = Fraction(ch - fl, ch) + Fraction(n - ch, -(-(i + 2) // 2))
    return lower, upper


def _lower_pair(n: int, i: int, s: int) -> tuple[int, int]:
    a, b = i - s, i - s + 1
    return (i - 2 * s) * b + (n - i + s) * a, a * b


def _upper_pair(n: int, i: int, s: int) -> tuple[int, int]:
    a, b = n + 1 - s, n - s
    return s * b + (i + 1 - 2 * s) * a, a * b


def lower_weight(n: int, i: int, s: int) -> Fraction:
    """Weight received by x in L_i^s when every y in L_{i+1} spreads weight
    one evenly over the elements below it."""
    return Fraction(*_lower_pair(n, i, s))


def upper_weight(n: int, i: int, s: int) -> Fraction:
    """Weight received by y in L_{i+1}^s when every x in L_i spreads weight
    one evenly over the elements above it."""
    return Fraction(*_upper_pair(n, i, s))


def _less(x: tuple[int, int], y: tuple[int, int]) -> bool:
    # positive denominators
    return x[0] * y[1] < y[0] * x[1]


def check_ratio_bounds(n: int) -> dict:
    """Exact check of the three two-sided bounds on l_{i+1}(n)/l_i(n) and of
    the monotonicity regimes of the redistribution weight used to prove them."""
    if n < 5:
        raise InvalidSpecError("ratio bounds are stated for n >= 5")
    violations = []

    def ratio(i):
        return Fraction(ell(i + 1, n), ell(i, n))

    for i in range(1, n - 2):
        lo, hi = _ratio1_bounds(n, i)
        if not lo <= ratio(i) <= hi:
            violations.append({"bound": "ratio_low_levels", "i": i, "ratio": ratio(i)})
        f = [_lower_pair(n, i, s) for s in range(i // 2 + 1)]
        if any(_less(b, a) for a, b in zip(f, f[1:])):
            violations.append({"bound": "ratio_low_levels_weight_monotone", "i": i})

    lo, hi = Fraction(n + 2, n), Fraction(4 * n + 7, 4 * n - 2)
    if not lo <= ratio(n - 2) <= hi:
        violations.append({"bound": "ratio_n_minus_2", "i": n - 2, "ratio": ratio(n - 2)})
    i = n - 2
    for s in range((n - 4) // 2 + 1):
        rising = lower_weight(n, i, s + 1) >= lower_weight(n, i, s)
        if rising != (3 * s <= n - 5):
            violations.append({"bound": "ratio_n_minus_2_weight_regime", "s": s})

    ch, fl = -(-(n - 1) // 2), (n - 1) // 2
    lo = Fraction(ch - fl, ch) + Fraction((n + 1) // 2, -(-(n + 1) // 2))
    hi = Fraction(n + 1, n)
    if not lo <= ratio(n - 1) <= hi:
        violations.append({"bound": "ratio_n_minus_1", "i": n - 1, "ratio": ratio(n - 1)})
    i = n - 1
    f = [lower_weight(n, i, s) for s in range((n - 1) // 2 + 1)]
    if any(b >= a for a, b in zip(f, f[1:])):
        violations.append({"bound": "ratio_n_minus_1_weight_decreasing"})
    if f[0] != hi or f[-1] != lo:
        violations.append({"bound": "ratio_n_minus_1_weight_endpoints"})

    # weight used for the comparison w' < w: strictly decreasing in s
    for i in range(1, n):
        g = [_upper_pair(n, i, s) for s in range((i + 1) // 2 + 1)]
        if any(not _less(b, a) for a, b in zip(g, g[1:])):
            violations.append({"bound": "upper_weight_decreasing", "i": i})
    return {"check": "ratio_bounds", "n": n, "violations": violations}


def wilf_exponent(n: int, q: int) -> float:
    """log_q(Galois number) / n^2; display-only."""
    g = galois_number(n, q)
    return (g.bit_length() - 1 + math.log2(g / 2 ** (g.bit_length() - 1))) / (
        math.log2(q) * n * n
    )
