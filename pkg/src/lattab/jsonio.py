"""JSON output with 17 significant digits and a run manifest."""

from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import math
import sys

import numpy as np

from lattab import __version__

FORMAT_VERSION = "1"


def _plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return _plain(obj.to_dict())
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _encode(obj, indent, level) -> str:
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return json.dumps(obj)
        return format(obj, ".17g")
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items())
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = (pad + _encode(v, indent, level + 1) for v in obj)
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int | None = 2) -> str:
    """JSON text with every float printed at 17 significant digits."""
    return _encode(_plain(obj), indent, 0)


def manifest(argv: list[str] | None, config: dict | None = None) -> dict:
    from lattab import _backend

    return {
        "command": " ".join(["lattab", *(sys.argv[1:] if argv is None else argv)]),
        "config": config or {},
        "versions": {"lattab": __version__, "format": FORMAT_VERSION, "backend": _backend.NAME},
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
