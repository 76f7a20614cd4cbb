"""Lossless JSON conversion for the values exchanged on the CLI boundary.

Conventions, shared by every command and by the verification reports:

* rationals are decimal-free strings ``"p/q"`` (bare ``"p"`` when the
  denominator is 1), so exact data survives a round trip;
* complex numbers are objects ``{"re": ..., "im": ...}`` whose parts are
  decimal strings produced by ``repr`` (shortest string that parses back
  to the same double);
* exact Gaussian-rational coefficients use the same object shape with
  ``"p/q"`` parts.

``to_jsonable`` converts a tree of package values into JSON-ready
primitives; the ``parse_*`` helpers invert the scalar encodings and
raise ``ValueError`` messages that name the offending field, which the
CLI maps to exit code 2.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from .qseries import QSeries, from_terms

__all__ = [
    "fraction_str",
    "parse_fraction",
    "complex_dict",
    "parse_complex",
    "parse_matrix",
    "parse_vector",
    "to_jsonable",
    "dumps",
    "qseries_to_jsonable",
    "qseries_from_jsonable",
]


def fraction_str(x) -> str:
    """``Fraction(3, 7) -> "3/7"``, ``Fraction(-7) -> "-7"``."""
    f = Fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def parse_fraction(value, field: str = "value") -> Fraction:
    """Accept an int, a ``"p/q"`` string, or a bare integer string."""
    if isinstance(value, bool):
        raise ValueError(f"{field}: expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"{field}: not a rational 'p/q' string: {value!r}") from exc
    raise ValueError(f"{field}: expected a rational 'p/q' string, got {type(value).__name__}")


def complex_dict(z) -> dict:
    z = complex(z)
    return {"re": repr(z.real), "im": repr(z.imag)}


def _part(value, field: str) -> float:
    if isinstance(value, bool):
        raise ValueError(f"{field}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError as exc:
            raise ValueError(f"{field}: not a decimal string: {value!r}") from exc
    raise ValueError(f"{field}: expected a decimal string, got {type(value).__name__}")


def parse_complex(value, field: str = "value") -> complex:
    """Accept ``{"re": ..., "im": ...}`` or a plain real number."""
    if isinstance(value, Mapping):
        extra = set(value) - {"re", "im"}
        if extra:
            raise ValueError(f"{field}: unexpected keys {sorted(extra)} in complex object")
        if "re" not in value or "im" not in value:
            raise ValueError(f"{field}: complex object needs both 're' and 'im'")
        return complex(_part(value["re"], f"{field}.re"), _part(value["im"], f"{field}.im"))
    if isinstance(value, bool):
        raise ValueError(f"{field}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.strip())
        except ValueError as exc:
            raise ValueError(f"{field}: not a number: {value!r}") from exc
    raise ValueError(f"{field}: expected a complex object or number, got {type(value).__name__}")


def parse_vector(value, field: str = "vector") -> tuple:
    if not isinstance(value, Sequence) or isinstance(value, (str, bytes)):
        raise ValueError(f"{field}: expected a list of rationals")
    return tuple(parse_fraction(v, f"{field}[{i}]") for i, v in enumerate(value))


def parse_matrix(value, field: str = "matrix") -> tuple:
    if not isinstance(value, Sequence) or isinstance(value, (str, bytes)):
        raise ValueError(f"{field}: expected a list of rows")
    rows = tuple(parse_vector(row, f"{field}[{i}]") for i, row in enumerate(value))
    if not rows:
        raise ValueError(f"{field}: empty matrix")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{field}: rows have unequal lengths")
    return rows


def to_jsonable(obj) -> Any:
    """Recursively convert package values to JSON-ready primitives."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not math.isfinite(f):
            raise ValueError(f"non-finite float {f!r} cannot be serialized")
        return f
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_dict(obj)
    if isinstance(obj, QSeries):
        return qseries_to_jsonable(obj)
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple, set, frozenset)):
        seq = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in seq]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def dumps(obj, indent: int | None = 2) -> str:
    """Deterministic JSON text (construction order preserved, no NaN)."""
    return json.dumps(to_jsonable(obj), indent=indent, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# q-series bridging


def _coeff_jsonable(c, exact: bool):
    if exact:
        re, im = c
        return {"re": fraction_str(re), "im": fraction_str(im)}
    return complex_dict(c)


def qseries_to_jsonable(qs: QSeries) -> dict:
    terms = []
    for (n, zpow), c in sorted(qs.terms.items()):
        terms.append({
            "n": int(n),
            "z": [int(p) for p in zpow],
            "c": _coeff_jsonable(c, qs.exact),
        })
    return {
        "schema": "qseries/1",
        "denom": int(qs.denom),
        "order": None if qs.order is None else fraction_str(qs.order),
        "nzvars": int(qs.nzvars),
        "exact": bool(qs.exact),
        "root": fraction_str(qs.root),
        "terms": terms,
    }


def qseries_from_jsonable(doc, field: str = "qseries") -> QSeries:
    if not isinstance(doc, Mapping):
        raise ValueError(f"{field}: expected an object")
    if doc.get("schema") != "qseries/1":
        raise ValueError(f"{field}.schema: expected 'qseries/1', got {doc.get('schema')!r}")
    try:
        denom = int(doc["denom"])
        nzvars = int(doc["nzvars"])
        exact = bool(doc["exact"])
        raw_terms = doc["terms"]
    except KeyError as exc:
        raise ValueError(f"{field}: missing key {exc.args[0]!r}") from exc
    order = None if doc.get("order") is None else parse_fraction(doc["order"], f"{field}.order")
    root = parse_fraction(doc.get("root", 0), f"{field}.root")
    items = []
    for i, term in enumerate(raw_terms):
        where = f"{field}.terms[{i}]"
        if not isinstance(term, Mapping) or not {"n", "z", "c"} <= set(term):
            raise ValueError(f"{where}: expected an object with keys n, z, c")
        expo = Fraction(int(term["n"]), denom)
        zpow = tuple(int(p) for p in term["z"])
        if len(zpow) != nzvars:
            raise ValueError(f"{where}.z: expected {nzvars} elliptic exponents")
        cobj = term["c"]
        if exact:
            coeff = (
                parse_fraction(cobj.get("re", 0), f"{where}.c.re"),
                parse_fraction(cobj.get("im", 0), f"{where}.c.im"),
            )
        else:
            coeff = parse_complex(cobj, f"{where}.c")
        items.append((expo, zpow, coeff))
    return from_terms(items, order=order, nzvars=nzvars, exact=exact, root=root)
