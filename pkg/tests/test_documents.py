import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from markov_game.documents import (
    digest,
    dumps_report,
    load_instance,
    loads_report,
    make_report,
    parse_instance,
)
from markov_game.errors import ParseError

GOOD = {"pi": [0.5, 0.5], "generators": [[[0, 1], [3, 0]]]}


def _doc(**changes):
    doc = json.loads(json.dumps(GOOD))
    doc.update(changes)
    return doc


def test_parse_recomputes_diagonal():
    inst = parse_instance(_doc(generators=[[[99, 1], [3, -7]]]))
    np.testing.assert_array_equal(inst.family[0], [[-1, 1], [3, -3]])
    assert inst.labels == ["L0"]
    assert inst.divergence is None and inst.options == {}


@pytest.mark.parametrize(
    "changes, path",
    [
        ({"pi": "x"}, "pi"),
        ({"pi": [0.5, "a"]}, "pi[1]"),
        ({"pi": [0.4, 0.4]}, "pi"),
        ({"generators": []}, "generators"),
        ({"generators": [[[0, 1], [3]]]}, "generators[0][1]"),
        ({"generators": [[[0, 1], [3, 0]], [[0, -1], [1, 0]]]}, "generators[1]"),
        ({"generators": [[[0, True], [3, 0]]]}, "generators[0][0][1]"),
        ({"generators": [[[0, 0], [0, 0]]]}, "generators"),
        ({"labels": ["a", "b"]}, "labels"),
        ({"divergence": "renyi"}, "divergence"),
        ({"options": []}, "options"),
    ],
)
def test_parse_errors_carry_paths(changes, path):
    with pytest.raises(ParseError) as exc:
        parse_instance(_doc(**changes))
    assert exc.value.path == path


def test_missing_fields():
    with pytest.raises(ParseError) as exc:
        parse_instance({"pi": [1.0]})
    assert exc.value.path == "generators"
    with pytest.raises(ParseError):
        parse_instance([1, 2])


def test_load_instance(tmp_path):
    p = tmp_path / "inst.json"
    p.write_text(json.dumps(_doc(labels=["L"], divergence="kl", options={"iters": 5})))
    inst = load_instance(p)
    assert inst.labels == ["L"] and inst.options["iters"] == 5
    assert parse_instance(inst.to_document()).to_document() == inst.to_document()
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(ParseError):
        load_instance(tmp_path / "bad.json")
    with pytest.raises(ParseError):
        load_instance(tmp_path / "missing.json")


@given(st.lists(st.floats(allow_nan=False), min_size=1, max_size=20))
def test_report_round_trip_lossless(values):
    rep = make_report("x", {"a": 1}, {"values": np.array(values)}, metadata=False)
    back = loads_report(dumps_report(rep))
    assert back["results"]["values"] == values


def test_non_finite_encoding():
    rep = make_report("x", {}, {"v": [math.inf, -math.inf, 1.5]}, metadata=False)
    text = dumps_report(rep)
    assert '"inf"' in text and '"-inf"' in text
    assert loads_report(text)["results"]["v"] == [math.inf, -math.inf, 1.5]


def test_report_shape_and_determinism():
    a = make_report("solve", {"k": [1, 2]}, {"x": 1.0}, trace=[(0, 1.0, 2.0, 1.0)], warnings=["w"])
    b = make_report("solve", {"k": [1, 2]}, {"x": 1.0}, trace=[(0, 1.0, 2.0, 1.0)], warnings=["w"])
    assert list(a) == ["command", "inputs_digest", "results", "trace", "warnings", "metadata"]
    a.pop("metadata"), b.pop("metadata")
    assert dumps_report(a) == dumps_report(b)


def test_digest_is_order_independent():
    assert digest({"a": 1, "b": [1.0, 2.0]}) == digest({"b": [1.0, 2.0], "a": 1})
    assert digest({"a": 1}) != digest({"a": 2})
