"""Deterministic text serialization for CLI and report output.

Every float is rendered with 17 significant digits, which round-trips
losslessly through ``float()``, so repeated runs with identical inputs give
byte-identical output.
"""

import math

__all__ = ["fmt_float", "json_dumps", "csv_line"]


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt_float(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if k:
                out.append(", ")
            _emit(str(key), out)
            out.append(": ")
            _emit(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, val in enumerate(obj):
            if k:
                out.append(", ")
            _emit(val, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def json_dumps(obj) -> str:
    """JSON text with floats at 17 significant digits, keys in given order."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def csv_line(fields) -> str:
    """One comma-separated line; floats formatted, everything else via str."""
    parts = []
    for f in fields:
        if isinstance(f, bool):
            parts.append("true" if f else "false")
        elif isinstance(f, float):
            parts.append(fmt_float(f))
        else:
            parts.append(str(f))
    return ",".join(parts)
