"""Canonical report serialization and run manifests."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import __version__
from .chains import GENERATOR_ID
from .errors import InvalidSpecError


def jsonable(obj):
    """Exact values become strings ("p/q" for rationals); containers recurse."""
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, float)):
        return obj
    if isinstance(obj, int):
        # keep JSON numbers exact for readers limited to doubles
        return obj if abs(obj) < 2**53 else str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(report) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"


def serialize(report, fmt: str = "json", csv_text: Optional[str] = None) -> bytes:
    if fmt == "json":
        return to_json(report).encode()
    if fmt == "csv":
        if csv_text is None:
            raise InvalidSpecError("this command has no CSV output")
        return csv_text.encode()
    raise InvalidSpecError(f"unsupported format {fmt!r}")


@dataclass
class RunManifest:
    command: list
    master_seed: Optional[int] = None
    limits: dict = field(default_factory=dict)
    wall_time: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "tool_version": __version__,
            "command": list(self.command),
            "generator": GENERATOR_ID,
            "master_seed": self.master_seed,
            "limits": self.limits,
        }
        if self.wall_time is not None:
            out["wall_time_seconds_approx"] = round(self.wall_time, 3)
        return out
