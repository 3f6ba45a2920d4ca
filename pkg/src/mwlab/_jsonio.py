"""Canonical JSON emission: sorted keys, fixed float formatting with 17
significant digits, newline-terminated.  Guarantees byte-identical output
for identical inputs and exact float round trips."""

import json

import numpy as np

from .errors import ParseError


def _fmt(x):
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError("non-finite float in canonical JSON")
        return format(x, ".17g")
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return json.dumps(x)
    if x is None:
        return "null"
    if isinstance(x, np.floating):
        return _fmt(float(x))
    if isinstance(x, np.ndarray):
        return _fmt(x.tolist())
    if isinstance(x, (list, tuple)):
        return "[" + ",".join(_fmt(v) for v in x) + "]"
    if isinstance(x, dict):
        items = sorted(x.items())
        return "{" + ",".join(json.dumps(str(k)) + ":" + _fmt(v) for k, v in items) + "}"
    raise TypeError(f"cannot serialize {type(x)}")


def dumps_canonical(obj):
    return _fmt(obj) + "\n"


def dump_canonical(obj, path):
    with open(path, "w") as fh:
        fh.write(dumps_canonical(obj))


def load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
