"""Finite fields GF(q) with elements encoded as integers 0..q-1.

Prime fields use modular arithmetic directly. Proper prime powers (q <= 16)
use precomputed addition/multiplication tables built from the smallest
irreducible monic polynomial over the prime subfield.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

from .errors import InvalidSpecError

MAX_PRIME_POWER_TABLE = 16


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def prime_power_decomposition(q: int) -> tuple[int, int] | None:
    """Return (p, k) with q = p**k for a prime p, or None."""
    if q < 2:
        return None
    p = 2
    while q % p:
        p += 1
    k = 0
    rest = q
    while rest % p == 0:
        rest //= p
        k += 1
    if rest != 1 or not _is_prime(p):
        return None
    return p, k


def is_prime_power(q: int) -> bool:
    return prime_power_decomposition(q) is not None


def _poly_mulmod(a, b, modulus, p):
    # coefficient lists, lowest degree first; modulus is monic of degree k
    k = len(modulus) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    for d in range(len(prod) - 1, k - 1, -1):
        c = prod[d]
        if c:
            for j in range(k + 1):
                prod[d - k + j] = (prod[d - k + j] - c * modulus[j]) % p
    return (prod + [0] * k)[:k]


def _is_irreducible(modulus, p):
    k = len(modulus) - 1
    # no factor of degree <= k // 2; brute force over monic polynomials
    for deg in range(1, k // 2 + 1):
        for coeffs in product(range(p), repeat=deg):
            divisor = list(coeffs) + [1]
            rem = list(modulus)
            for d in range(k, deg - 1, -1):
                c = rem[d]
                if c:
                    for j in range(deg + 1):
                        rem[d - deg + j] = (rem[d - deg + j] - c * divisor[j]) % p
            if not any(rem[:deg]):
                return False
    return True


class GF:
    """Arithmetic in GF(q). Use :func:`field` to obtain cached instances."""

    def __init__(self, q: int):
        dec = prime_power_decomposition(q)
        if dec is None:
            raise InvalidSpecError(f"q={q} is not a prime power")
        p, k = dec
        if k > 1 and q > MAX_PRIME_POWER_TABLE:
            raise InvalidSpecError(
                f"prime power q={q} exceeds table limit {MAX_PRIME_POWER_TABLE}"
            )
        self.q, self.p, self.k = q, p, k
        self.modulus = None
        if k == 1:
            self._add = None
            self._mul = None
            self._inv = [0] + [pow(a, p - 2, p) for a in range(1, p)]
            return
        for tail in product(range(p), repeat=k):
            cand = list(tail) + [1]
            if cand[0] and _is_irreducible(cand, p):
                self.modulus = cand
                break
        digits = [[(a // p**j) % p for j in range(k)] for a in range(q)]

        def encode(coeffs):
            return sum(c * p**j for j, c in enumerate(coeffs))

        self._add = [
            [encode([(x + y) % p for x, y in zip(digits[a], digits[b])]) for b in range(q)]
            for a in range(q)
        ]
        self._mul = [
            [encode(_poly_mulmod(digits[a], digits[b], self.modulus, p)) for b in range(q)]
            for a in range(q)
        ]
        self._neg = [encode([(-x) % p for x in digits[a]]) for a in range(q)]
        self._inv = [0] * q
        for a in range(1, q):
            for b in range(1, q):
                if self._mul[a][b] == 1:
                    self._inv[a] = b
                    break

    def add(self, a: int, b: int) -> int:
        if self._add is None:
            return (a + b) % self.p
        return self._add[a][b]

    def sub(self, a: int, b: int) -> int:
        if self._add is None:
            return (a - b) % self.p
        return self._add[a][self._neg[b]]

    def mul(self, a: int, b: int) -> int:
        if self._mul is None:
            return a * b % self.p
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in GF(q)")
        return self._inv[a]

    def __repr__(self) -> str:
        return f"GF({self.q})"


@lru_cache(maxsize=None)
def field(q: int) -> GF:
    return GF(q)
