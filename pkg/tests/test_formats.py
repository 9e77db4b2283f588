import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_random_model
from isingopt.errors import ParseError
from isingopt.formats import detect_format, dumps_instance, parse_instance
from isingopt.generators import knapsack, random_bilp
from isingopt.ising import IsingModel
from isingopt.reduction import BilpInstance


def test_minimal_lp_text():
    inst = parse_instance("min: x; x <= 1; int x in [0,1];", "lp-text")
    assert isinstance(inst, BilpInstance)
    assert inst.num_vars == 1 and inst.names == ("x",) and len(inst.constraints) == 1
    assert inst.constraints[0].sense == "<=" and inst.constraints[0].rhs == 1.0


def test_lp_text_features():
    text = """
    # knapsack-like
    max: 3 a + 2 b - c + 1;
    cap: 2 a + b + c <= 3;   // weight row
    a - b >= -1;
    c = 1;
    bin a, b;
    int c in [0, 2];
    """
    inst = parse_instance(text, "lp-text")
    assert inst.maximize and inst.objective == (-3.0, -2.0, 1.0) and inst.objective_offset == -1.0
    assert [c.sense for c in inst.constraints] == ["<=", ">=", "="]
    assert inst.constraints[0].name == "cap"
    assert inst.bounds == ((0, 1), (0, 1), (0, 2))


@pytest.mark.parametrize(
    "text, pattern",
    [
        ("min: x + y; x <= 1; bin x;", "unknown variable"),
        ("min: x; x <= 1; bin x; bin x;", "declared twice"),
        ("min: x; x <= 1e999; bin x;", "non-finite"),
        ("min: x; x <= ; bin x;", "line 1"),
    ],
)
def test_lp_text_errors(text, pattern):
    with pytest.raises(ParseError, match=pattern):
        parse_instance(text, "lp-text")


def test_lp_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_instance("min: x;\nx <= 1\nbin x;", "lp-text")
    assert err.value.line is not None and err.value.column is not None


def test_ising_json_duplicate_pair():
    doc = {"format_version": 1, "num_spins": 2, "couplings": [[0, 1, 1.0], [1, 0, 2.0]], "fields": [0, 0]}
    with pytest.raises(ParseError, match="duplicate coupling pair"):
        parse_instance(json.dumps(doc), "ising-json")


@pytest.mark.parametrize(
    "doc, pattern",
    [
        ({"num_spins": 1}, "format_version"),
        ({"format_version": 2, "num_spins": 1}, "format_version"),
        ({"format_version": 1, "num_spins": 2, "couplings": [[0, 0, 1.0]]}, "self-coupling"),
        ({"format_version": 1, "num_spins": 2, "couplings": [[0, 5, 1.0]]}, "out of range"),
        ({"format_version": 1, "num_spins": 2, "fields": [1.0]}, "expected 2"),
    ],
)
def test_ising_json_errors(doc, pattern):
    with pytest.raises(ParseError, match=pattern):
        parse_instance(json.dumps(doc), "ising-json")


def test_json_syntax_error_has_line_and_column():
    with pytest.raises(ParseError) as err:
        parse_instance('{"format_version": 1,\n "num_spins": }', "ising-json")
    assert (err.value.line, err.value.column) == (2, 15)
    with pytest.raises(ParseError, match="non-finite"):
        parse_instance('{"format_version": 1, "num_spins": 1, "fields": [NaN]}', "ising-json")


def test_bilp_json_errors():
    base = {"format_version": 1, "num_vars": 2, "objective": [1, 2]}
    bad = {**base, "constraints": [{"coeffs": [[3, 1]], "sense": "=", "rhs": 1}]}
    with pytest.raises(ParseError, match="unknown variable"):
        parse_instance(json.dumps(bad), "bilp-json")
    with pytest.raises(ParseError, match="continuous"):
        parse_instance(json.dumps({**base, "bounds": [[0, 1], [0, 1]], "kinds": ["binary", "continuous"]}),
                       "bilp-json")


def test_unknown_format():
    with pytest.raises(ParseError):
        parse_instance("", "mps")


def test_detect_format():
    assert detect_format("a.lp", "") == "lp-text"
    assert detect_format("a.json", '{"num_spins": 1}') == "ising-json"
    assert detect_format("a.json", '{"num_vars": 1}') == "bilp-json"


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(0, 10), density=st.floats(0, 1))
def test_ising_round_trip(seed, n, density):
    rng = np.random.default_rng(seed)
    m = dense_random_model(rng, n, density) if n else IsingModel(0)
    m = IsingModel(m.num_spins, m.couplings, m.fields, float(rng.normal()))
    assert parse_instance(dumps_instance(m, "ising-json"), "ising-json") == m


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8), m=st.integers(0, 3), hi=st.integers(1, 4),
       fmt=st.sampled_from(["bilp-json", "lp-text"]))
def test_bilp_round_trip(seed, n, m, hi, fmt):
    rng = np.random.default_rng(seed)
    inst = random_bilp(rng, n, m, int_hi=hi)
    assert parse_instance(dumps_instance(inst, fmt), fmt) == inst


@pytest.mark.parametrize("fmt", ["bilp-json", "lp-text"])
def test_knapsack_round_trip_keeps_direction(fmt):
    inst = knapsack(np.random.default_rng(1), 4)
    back = parse_instance(dumps_instance(inst, fmt), fmt)
    assert back == inst and back.maximize


def test_maximize_zero_terms_serialize_without_negative_zero():
    inst = BilpInstance.build([0.0, 2.0], maximize=True)
    assert "-0.0" not in dumps_instance(inst, "bilp-json")
    assert "-0.0" not in dumps_instance(inst, "lp-text")
