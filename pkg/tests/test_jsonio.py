"""JSON boundary: lossless scalar encodings and q-series round trips.

Rationals travel as decimal-free "p/q" strings and complex numbers as
{"re", "im"} objects with repr-precision decimal strings, so every value
the CLI emits parses back to the identical Python object.
"""

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mjforms.jsonio import (
    complex_dict,
    dumps,
    fraction_str,
    parse_complex,
    parse_fraction,
    parse_matrix,
    parse_vector,
    qseries_from_jsonable,
    qseries_to_jsonable,
    to_jsonable,
)
from mjforms.qseries import coefficient, from_terms


def test_fraction_str_forms():
    assert fraction_str(Fraction(3, 7)) == "3/7"
    assert fraction_str(Fraction(-7)) == "-7"
    assert fraction_str(0) == "0"
    assert fraction_str(Fraction(-2, 4)) == "-1/2"


@given(st.fractions())
def test_fraction_round_trip(f):
    assert parse_fraction(fraction_str(f)) == f


def test_parse_fraction_accepts_ints_and_rejects_junk():
    assert parse_fraction(5) == Fraction(5)
    with pytest.raises(ValueError, match="shift"):
        parse_fraction("three halves", field="shift")
    with pytest.raises(ValueError, match="shift"):
        parse_fraction(True, field="shift")
    with pytest.raises(ValueError, match="1/0"):
        parse_fraction("1/0")


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_complex_round_trip(z):
    assert parse_complex(complex_dict(z)) == z


def test_parse_complex_shapes():
    assert parse_complex(2) == 2 + 0j
    assert parse_complex("1.5") == 1.5 + 0j
    assert parse_complex("0.1+0.9j") == 0.1 + 0.9j
    assert parse_complex({"re": "1e-3", "im": -2}) == complex(1e-3, -2)
    with pytest.raises(ValueError, match="tau.*im"):
        parse_complex({"re": "1.0"}, field="tau")
    with pytest.raises(ValueError, match="unexpected keys"):
        parse_complex({"re": "1", "im": "2", "abs": "3"})
    with pytest.raises(ValueError, match="tau.re"):
        parse_complex({"re": "one", "im": "0"}, field="tau")


def test_parse_vector_and_matrix():
    assert parse_vector(["1/2", 3]) == (Fraction(1, 2), Fraction(3))
    assert parse_matrix([[1, 2], ["1/3", 4]]) == (
        (Fraction(1), Fraction(2)),
        (Fraction(1, 3), Fraction(4)),
    )
    with pytest.raises(ValueError, match="gram: rows have unequal lengths"):
        parse_matrix([[1, 2], [3]], field="gram")
    with pytest.raises(ValueError, match="empty"):
        parse_matrix([])
    with pytest.raises(ValueError, match=r"e\[0\]\[1\]"):
        parse_matrix([[1, "x"]], field="e")


def test_to_jsonable_nested():
    doc = to_jsonable(
        {
            "det": Fraction(-7),
            "tau": 0.5 + 1.25j,
            "grid": np.array([1.0, 2.5]),
            "flags": (True, None),
            "n": np.int64(3),
            "ok": np.bool_(True),
        }
    )
    assert doc == {
        "det": "-7",
        "tau": {"re": "0.5", "im": "1.25"},
        "grid": [1.0, 2.5],
        "flags": [True, None],
        "n": 3,
        "ok": True,
    }
    json.dumps(doc)


def test_to_jsonable_rejects_nan_and_unknown_types():
    with pytest.raises(ValueError, match="non-finite"):
        to_jsonable(float("nan"))
    with pytest.raises(TypeError, match="object"):
        to_jsonable(object())


def test_dumps_is_deterministic_text():
    payload = {"b": Fraction(1, 3), "a": [1 + 2j, 0.25]}
    assert dumps(payload) == dumps(payload)
    assert dumps(payload).endswith("\n")


def _sample_series(exact=True):
    coeffs = [(Fraction(2), Fraction(0)), (Fraction(-1), Fraction(3))] if exact else [2 + 0j, -1 + 3j]
    return from_terms(
        [
            (Fraction(1, 12), (0, 1), coeffs[0]),
            (Fraction(13, 12), (2, -1), coeffs[1]),
        ],
        order=Fraction(25, 12),
        nzvars=2,
        exact=exact,
        root=Fraction(1, 6),
    )


@pytest.mark.parametrize("exact", [True, False])
def test_qseries_round_trip(exact):
    qs = _sample_series(exact)
    doc = qseries_to_jsonable(qs)
    json.dumps(doc)
    back = qseries_from_jsonable(doc)
    assert back.exact == qs.exact
    assert back.root == qs.root
    assert back.order == qs.order
    assert back.nzvars == qs.nzvars
    assert back.exponents() == qs.exponents()
    for expo in qs.exponents():
        assert coefficient(back, expo, (0, 1)) == coefficient(qs, expo, (0, 1))
        assert coefficient(back, expo, (2, -1)) == coefficient(qs, expo, (2, -1))


def test_qseries_from_jsonable_names_offending_field():
    doc = qseries_to_jsonable(_sample_series())
    doc["schema"] = "qseries/9"
    with pytest.raises(ValueError, match="schema"):
        qseries_from_jsonable(doc)
    doc = qseries_to_jsonable(_sample_series())
    doc["terms"][0]["z"] = [1]
    with pytest.raises(ValueError, match=r"terms\[0\]"):
        qseries_from_jsonable(doc)
    with pytest.raises(ValueError, match="input: missing key 'denom'"):
        qseries_from_jsonable({"schema": "qseries/1"}, field="input")
