"""Deterministic JSON/CSV rendering.

The stock ``json`` module renders floats with shortest-roundtrip repr, which
is stable but does not pin a digit count. Reports here are meant to be
byte-comparable across runs, so floats are always rendered with 17
significant digits and dictionaries keep insertion order.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any


def render_float(x: float) -> str:
    """17-significant-digit decimal rendering, round-trip exact for float64."""
    x = float(x)
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2) -> str:
    """Serialize to JSON with deterministic float rendering and key order."""
    out: list[str] = []
    _emit(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)


def _emit(obj: Any, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    closepad = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, val) in enumerate(obj.items()):
            out.append(pad + json.dumps(str(key)) + ": ")
            _emit(val, out, indent, level + 1)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(closepad + "}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        if all(isinstance(v, (int, float, str, bool)) or v is None for v in seq):
            out.append("[" + ", ".join(_scalar(v) for v in seq) + "]")
            return
        out.append("[\n")
        for k, val in enumerate(seq):
            out.append(pad)
            _emit(val, out, indent, level + 1)
            out.append(",\n" if k < len(seq) - 1 else "\n")
        out.append(closepad + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v: Any) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return render_float(v)
    if isinstance(v, int):
        return str(v)
    return json.dumps(v)


def as_fraction_text(x: float, max_den: int = 100, tol: float = 1e-12) -> str:
    """Render ``x`` as p/q when it is within tol of a fraction with q <= max_den."""
    fr = Fraction(x).limit_denominator(max_den)
    if abs(x - float(fr)) <= tol:
        if fr.denominator == 1:
            return str(fr.numerator)
        return f"{fr.numerator}/{fr.denominator}"
    return render_float(x)
