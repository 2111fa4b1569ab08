"""Deterministic artifact writers: JSON with 17 significant digits, CSV node
tables and plain (P2) PGM heatmaps."""

from __future__ import annotations

import math

import numpy as np


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with sorted keys and fixed float formatting; non-finite floats become strings."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_string(str(k))}: {dumps(obj[k], indent, _level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.number, bool)) or v is None for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return _string(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _string(s: str) -> str:
    import json

    return json.dumps(s)


def json_bytes(obj) -> bytes:
    return (dumps(obj) + "\n").encode()


def field_csv(field) -> bytes:
    """One row per inside node: coordinates then value."""
    g = field.grid
    names = ["x", "y", "z", "w"][:g.dim] if g.dim <= 4 else [f"x{i}" for i in range(g.dim)]
    lines = [",".join(names + ["value"])]
    for pt, v in zip(g.points, field.values):
        lines.append(",".join(format(float(c), ".17g") for c in (*pt, v)))
    return ("\n".join(lines) + "\n").encode()


def field_pgm(field, levels: int = 255) -> bytes:
    """Plain PGM heatmap of a planar field, or of the central slice along the
    last axis for three-dimensional grids.  Rows run from top (largest y) down."""
    arr = field.to_array()
    note = ""
    if arr.ndim == 3:
        mid = arr.shape[2] // 2
        arr = arr[:, :, mid]
        note = f"# slice axis=2 index={mid}\n"
    elif arr.ndim != 2:
        raise ValueError("PGM export supports planar fields and central slices of 3-D fields")
    vmin, vmax = float(np.min(field.values)), float(np.max(field.values))
    span = vmax - vmin
    scaled = np.zeros_like(arr) if span == 0 else (np.clip(arr, vmin, vmax) - vmin) / span
    pix = np.rint(scaled * levels).astype(int)
    img = pix.T[::-1]
    header = (f"P2\n# min {_float(vmin)}\n# max {_float(vmax)}\n{note}"
              f"{img.shape[1]} {img.shape[0]}\n{levels}\n")
    body = "\n".join(" ".join(str(v) for v in row) for row in img)
    return (header + body + "\n").encode()


def rows_csv(header, rows) -> bytes:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format(float(v), ".17g") for v in row))
    return ("\n".join(lines) + "\n").encode()
