"""Deterministic JSON output: complex numbers as ``[re, im]`` with 17 significant digits."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

import numpy as np


def _float17(x: float) -> float:
    return float(format(float(x), ".17g"))


class Pair(list):
    """An already encoded ``[re, im]`` pair; :func:`to_plain` leaves it alone."""


def pair(z) -> Pair:
    z = complex(z)
    return Pair([_float17(z.real), _float17(z.imag)])


def to_plain(obj: Any) -> Any:
    """Recursively convert numbers, arrays and objects with ``to_json`` into JSON-ready values."""
    if isinstance(obj, Pair):
        return list(obj)
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (complex, np.complexfloating, float, np.floating)):
        return list(pair(obj))
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_plain(obj), sort_keys=True, indent=1)
