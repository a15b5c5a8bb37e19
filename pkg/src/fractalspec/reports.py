"""Deterministic JSON/CSV emission for command-line runs.

Identical inputs must produce byte-identical artifacts, so no timestamps or
environment data are ever written, keys are sorted, and floats are rendered
with 17 significant digits (full round-trip precision), which the stock
json encoder does not guarantee.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "1"

__all__ = ["SCHEMA_VERSION", "fmt_float", "render_json", "write_text", "render_csv"]


def fmt_float(x: float) -> str:
    if not np.isfinite(x):
        raise ValueError(f"refusing to serialize non-finite float {x!r}")
    return format(float(x), ".17g")


def _coerce(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def render_json(obj, indent: int = 0, compact: bool = False) -> str:
    """Render with sorted keys and 17-significant-digit floats."""
    obj = _coerce(obj)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            (json.dumps(str(key)), render_json(obj[key], indent + 1, compact))
            for key in sorted(obj, key=str)
        ]
        if compact:
            return "{" + ", ".join(f"{k}: {v}" for k, v in items) + "}"
        child = "  " * (indent + 1)
        body = ",\n".join(f"{child}{k}: {v}" for k, v in items)
        return "{\n" + body + "\n" + "  " * indent + "}"
    if isinstance(obj, (list, tuple)):
        if not len(obj):
            return "[]"
        items = [render_json(v, indent + 1, compact) for v in obj]
        if compact:
            return "[" + ", ".join(items) + "]"
        child = "  " * (indent + 1)
        body = ",\n".join(f"{child}{v}" for v in items)
        return "[\n" + body + "\n" + "  " * indent + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_csv(header: list[str], rows, comments: list[str] | None = None) -> str:
    """Fixed-header CSV preceded by '#' comment lines (config echo)."""
    lines = [f"# {c}" for c in (comments or [])]
    lines.append(",".join(header))
    for row in rows:
        cells = []
        for value in row:
            value = _coerce(value)
            if isinstance(value, bool):
                cells.append("true" if value else "false")
            elif isinstance(value, (int, np.integer)):
                cells.append(str(int(value)))
            elif isinstance(value, float):
                cells.append(fmt_float(value))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
