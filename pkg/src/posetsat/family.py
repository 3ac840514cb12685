"""Family descriptors for the three ranked posets handled by the package."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidSpecError
from .fields import MAX_PRIME_POWER_TABLE, prime_power_decomposition

FAMILIES = ("boolean", "subspace", "rpower")


@dataclass(frozen=True)
class FamilySpec:
    """Which poset: P(n) ("boolean"), V(q, n) ("subspace") or {0..r}^n ("rpower")."""

    family: str
    n: int
    q: Optional[int] = None
    r: Optional[int] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpecError(f"unknown family {self.family!r}")
        if not isinstance(self.n, int) or self.n < 0:
            raise InvalidSpecError(f"n must be a non-negative integer, got {self.n!r}")
        if self.family == "boolean":
            if self.q is not None or self.r is not None:
                raise InvalidSpecError("boolean family takes neither q nor r")
        elif self.family == "subspace":
            if self.r is not None:
                raise InvalidSpecError("subspace family takes no r")
            if self.q is None:
                raise InvalidSpecError("subspace family requires q")
            dec = prime_power_decomposition(self.q)
            if dec is None:
                raise InvalidSpecError(f"q={self.q} is not a prime power")
            if dec[1] > 1 and self.q > MAX_PRIME_POWER_TABLE:
                raise InvalidSpecError(
                    f"prime powers above {MAX_PRIME_POWER_TABLE} are not supported"
                )
        else:
            if self.q is not None:
                raise InvalidSpecError("rpower family takes no q")
            if self.r is None or self.r < 1:
                raise InvalidSpecError("rpower family requires r >= 1")

    @property
    def top_rank(self) -> int:
        if self.family == "rpower":
            return self.r * self.n
        return self.n

    def to_dict(self) -> dict:
        out = {"family": self.family, "n": self.n}
        if self.q is not None:
            out["q"] = self.q
        if self.r is not None:
            out["r"] = self.r
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "FamilySpec":
        unknown = set(data) - {"family", "n", "q", "r"}
        if unknown:
            raise InvalidSpecError(f"unknown FamilySpec fields: {sorted(unknown)}")
        try:
            return cls(data["family"], data["n"], data.get("q"), data.get("r"))
        except KeyError as exc:
            raise InvalidSpecError(f"missing FamilySpec field {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "FamilySpec":
        return cls.from_dict(json.loads(text))


def boolean(n: int) -> FamilySpec:
    return FamilySpec("boolean", n)


def subspace(n: int, q: int) -> FamilySpec:
    return FamilySpec("subspace", n, q=q)


def rpower(n: int, r: int = 2) -> FamilySpec:
    return FamilySpec("rpower", n, r=r)
