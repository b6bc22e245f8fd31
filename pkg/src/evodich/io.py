"""Report serialization: JSON and CSV with 17 significant digits."""

from __future__ import annotations

import json
import math

import numpy as np


def _num(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def dumps(obj, indent: int = 2) -> str:
    """JSON text; floats carry 17 significant digits, non-finite floats become null."""
    out: list[str] = []

    def emit(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None or isinstance(o, (bool, np.bool_)):
            out.append(json.dumps(None if o is None else bool(o)))
        elif isinstance(o, (int, np.integer)):
            out.append(str(int(o)))
        elif isinstance(o, (float, np.floating)):
            out.append(_num(float(o)))
        elif isinstance(o, (complex, np.complexfloating)):
            emit([float(o.real), float(o.imag)], level)
        elif isinstance(o, str):
            out.append(json.dumps(o, ensure_ascii=False))
        elif isinstance(o, np.ndarray):
            emit(o.tolist(), level)
        elif isinstance(o, dict):
            if not o:
                out.append("{}")
                return
            out.append("{\n")
            for i, (k, v) in enumerate(o.items()):
                out.append(pad + json.dumps(str(k), ensure_ascii=False) + ": ")
                emit(v, level + 1)
                out.append(",\n" if i < len(o) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(o, (list, tuple)):
            if not o:
                out.append("[]")
                return
            flat = all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in o)
            if flat:
                out.append("[")
                for i, v in enumerate(o):
                    emit(v, level + 1)
                    if i < len(o) - 1:
                        out.append(", ")
                out.append("]")
                return
            out.append("[\n")
            for i, v in enumerate(o):
                out.append(pad)
                emit(v, level + 1)
                out.append(",\n" if i < len(o) - 1 else "\n")
            out.append(end + "]")
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")

    emit(obj, 0)
    return "".join(out) + "\n"


def csv_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    text = str(x)
    if any(c in text for c in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def to_csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(csv_cell(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def eigen_csv(eigs) -> str:
    return to_csv(["re", "im"], [[float(z.real), float(z.imag)] for z in np.asarray(eigs)])
