"""Deterministic JSON reports and CSV profiles.

Floats are written with 17 significant digits and keys keep insertion order,
so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from importlib import metadata

import numpy as np

INDENT = "  "


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _encode(obj, level: int, out: list[str]) -> None:
    pad = INDENT * (level + 1)
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(_string(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + _string(str(k)) + ": ")
            _encode(v, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(INDENT * level + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(seq):
            out.append(pad)
            _encode(v, level + 1, out)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(INDENT * level + "]")
    elif hasattr(obj, "to_dict"):
        _encode(obj.to_dict(), level, out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _string(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def dumps(obj) -> str:
    out: list[str] = []
    _encode(obj, 0, out)
    return "".join(out) + "\n"


def versions() -> dict:
    import scipy
    import sympy

    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"hardylab": pkg, "numpy": np.__version__, "scipy": scipy.__version__,
            "sympy": sympy.__version__}


def make_report(command: str, inputs: dict, results: dict, seed: int | None,
                exit_code: int, wall_time: float | None = None) -> dict:
    rep = {"command": command, "inputs": inputs, "results": results,
           "seed": seed, "exit_code": exit_code, "versions": versions()}
    if wall_time is not None:
        rep["wall_time"] = wall_time
    return rep


def csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format(row[c], ".17g") if isinstance(row[c], float) else row[c] for c in columns])
    return buf.getvalue()
