"""Canonical JSON: sorted keys, floats fixed at 3 decimals, absent values as null.

``json.dumps`` cannot fix float precision, so floats are emitted here and
everything else is delegated to it.
"""

from __future__ import annotations

import json
import math

SCHEMA_VERSION = 1


def _encode(obj, out: list[str]) -> None:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite float {obj!r}")
        text = f"{obj:.3f}"
        out.append("0.000" if text == "-0.000" else text)
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    out: list[str] = []
    _encode(obj, out)
    return "".join(out) + "\n"


def quantize(obj):
    """Round-trip through the canonical form, so in-memory values equal what
    a reader of the serialized document sees."""
    return json.loads(dumps(obj))
