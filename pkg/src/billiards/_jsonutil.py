"""Canonical JSON emission.

Reports and table files must be byte-identical across runs and platforms, so
floats are rendered with 17 significant digits (round-trip exact), object
keys are emitted sorted, and the writer below owns every byte.  The stdlib
C encoder ignores ``__repr__`` overrides on float subclasses, hence the
hand-rolled emitter.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

import numpy as np


def _normalize(obj: Any) -> Any:
    # Coerce numpy scalars/arrays eagerly so canonical output never depends
    # on which numeric type a code path produced.
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    return obj


def _emit(obj: Any, indent: int, out: list) -> None:
    pad = "  " * indent
    if obj is None or obj is True or obj is False:
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("non-finite float in canonical JSON")
        out.append(format(obj, ".17g"))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, key in enumerate(sorted(obj)):
            out.append(pad + "  " + json.dumps(key, ensure_ascii=True) + ": ")
            _emit(obj[key], indent + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(obj):
            out.append(pad + "  ")
            _emit(item, indent + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot canonicalize {type(obj).__name__}")


def canonical_dumps(obj: Any) -> str:
    """Serialize to JSON with sorted keys and 17-digit floats.

    Output is byte-identical for equal inputs regardless of platform or
    insertion order.
    """
    out: list = []
    _emit(_normalize(obj), 0, out)
    out.append("\n")
    return "".join(out)


def fingerprint(obj: Any) -> str:
    """sha256 hex digest of the canonical serialization of ``obj``."""
    return hashlib.sha256(canonical_dumps(obj).encode("utf-8")).hexdigest()
