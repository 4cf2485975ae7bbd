"""File formats: complexes, weightings, cell complexes (JSON) and flat key=value configs."""
import ast
import json
import math
import operator

import numpy as np

from .complex_core import CochainComplex, ComplexError
from .witten import MorseWeighting
from . import morse


class InputError(ValueError):
    """Malformed or invalid input file; the message carries the location."""


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise InputError(f"{path}: {err.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from None


def _locate(text, key):
    """1-based line of the first occurrence of ``"key"`` in ``text``, or None."""
    needle = f'"{key}"'
    for n, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return n
    return None


def complex_from_dict(obj, source="<input>"):
    """``{"dims", "differentials", "grams"?, "rank_divisor"?}`` -> CochainComplex."""
    if not isinstance(obj, dict):
        raise InputError(f"{source}: top level must be an object")
    if "cells" in obj:
        try:
            cc, _ = morse.cell_complex_from_dict(obj)
            return morse.cochain_complex(cc)
        except (morse.MorseError, ComplexError) as err:
            raise InputError(f"{source}: {err}") from None
    for key in ("dims", "differentials"):
        if key not in obj:
            raise InputError(f"{source}: missing key {key!r}")
    dims = obj["dims"]
    diffs = obj["differentials"]
    if not isinstance(dims, list) or not isinstance(diffs, list):
        raise InputError(f"{source}: 'dims' and 'differentials' must be lists")
    mats = []
    for i, m in enumerate(diffs):
        try:
            a = np.array(m, dtype=float)
        except (TypeError, ValueError):
            raise InputError(f"{source}: differentials[{i}] is not a rectangular numeric array") from None
        if a.size == 0:
            a = a.reshape(int(dims[i + 1]) if i + 1 < len(dims) else 0,
                          int(dims[i]) if i < len(dims) else 0)
        mats.append(a)
    try:
        return CochainComplex(dims, mats, obj.get("grams"), int(obj.get("rank_divisor", 1)))
    except (ComplexError, TypeError, ValueError) as err:
        raise InputError(f"{source}: {err}") from None


def complex_to_dict(c):
    out = {"dims": list(c.dims), "differentials": [d.tolist() for d in c.d]}
    if any(not np.array_equal(g, np.eye(g.shape[0])) for g in c.grams):
        out["grams"] = [g.tolist() for g in c.grams]
    if c.rank_divisor != 1:
        out["rank_divisor"] = c.rank_divisor
    return out


def load_complex(path):
    obj = load_json(path)
    try:
        return complex_from_dict(obj, path)
    except InputError as err:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        msg = str(err)
        hints = (("differential", "differentials"), ("d^", "differentials"), ("Gram", "grams"),
                 ("dimension", "dims"), ("boundary", "boundary"), ("cells", "cells"))
        for needle, key in hints:
            if needle in msg:
                line = _locate(text, key)
                if line is not None:
                    msg = msg.replace(f"{path}:", f"{path}:{line}:", 1)
                break
        raise InputError(msg) from None


def weighting_from_dict(obj, source="<input>"):
    """``{"values": [[...] per degree], "critical"?: [[bool ...]], "multiplicity"?: int}``."""
    if not isinstance(obj, dict) or "values" not in obj:
        raise InputError(f"{source}: weighting needs a 'values' list")
    try:
        return MorseWeighting(obj["values"], obj.get("critical"), int(obj.get("multiplicity", 1)))
    except (TypeError, ValueError) as err:
        raise InputError(f"{source}: {err}") from None


def weighting_to_dict(w):
    out = {"values": [v.tolist() for v in w.values]}
    if w.critical_flags is not None:
        out["critical"] = [c.tolist() for c in w.critical_flags]
    if w.multiplicity != 1:
        out["multiplicity"] = w.multiplicity
    return out


def load_weighting(path):
    return weighting_from_dict(load_json(path), path)


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")


# --- flat configs -------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "e": math.e}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    raise ValueError("not an arithmetic expression")


def parse_value(text):
    """Number, arithmetic over ``pi``/``e`` (``3*pi``), comma list, or bare string."""
    text = text.strip()
    if "," in text:
        return [parse_value(p) for p in text.split(",") if p.strip()]
    try:
        return _eval_node(ast.parse(text, mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        return text


def parse_config(path):
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise InputError(f"{path}: {err.strerror}") from None
    cfg = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{n}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise InputError(f"{path}:{n}: empty key")
        if key in cfg:
            raise InputError(f"{path}:{n}: duplicate key {key!r}")
        cfg[key] = parse_value(val)
    return cfg


def as_list(v):
    return v if isinstance(v, list) else [v]
