"""Built-in corpus: loading, expected-value plumbing, full validation."""

import pytest
from gmpy2 import mpq

from catalytic import parse_equation
from catalytic.corpus import (evaluate_expected, list_entries, load, validate,
                              _simple_series)
from catalytic.errors import UnknownEntryError
from catalytic.numeric import precision


def test_listing_is_deterministic():
    names = list_entries()
    assert names == sorted(names)
    assert len(names) == 12
    assert "motzkin" in names and "simple-maps" in names


def test_unknown_entry():
    with pytest.raises(UnknownEntryError):
        load("no-such-equation")


def test_every_entry_parses():
    for name in list_entries():
        entry = load(name)
        parse_equation(entry.text)
        assert entry.kind in ("linear", "degenerate", "nonlinear",
                              "generic", "marked")
        assert entry.note


def test_expected_value_forms():
    with precision(256):
        assert evaluate_expected("4/3") == mpq(4, 3)
        assert evaluate_expected("-3*sqrt(3)") < 0
        v = evaluate_expected("2/sqrt(pi)")
        assert 1.12 < v < 1.13


def test_simple_series_oracle_head():
    # decremented counts from the closed form: integrality is the point
    got = _simple_series(8)
    assert [int(c) for c in got] == [0, 1, 2, 6, 23, 103, 512, 2740, 15485]
    assert all(c.denominator == 1 for c in _simple_series(30))


@pytest.mark.parametrize("name", list_entries())
def test_validate_passes(name):
    rep = validate(name)
    assert rep.passed, rep.failures
