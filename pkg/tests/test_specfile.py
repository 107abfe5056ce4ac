import json

import numpy as np
import pytest

from nestca.specfile import (
    SpecError,
    build_model,
    dumps,
    format_slice,
    load_initial,
    parse_slice,
    parse_spec,
    serialize_model,
    spec_hash,
)

XOR = {
    "version": "nestca/1",
    "levels": [{"extents": [8], "state_shifts": [{"dr": [-1], "dt": 1}, {"dr": [1], "dt": 1}]}],
    "rule": {"builtin": "xor"},
}


def depth2(k):
    return {
        "version": "nestca/1",
        "levels": [
            {"extents": [5], "state_shifts": [{"dr": [i - 1], "dt": 1} for i in range(k)]},
            {"extents": [2], "horizon": 2, "state_shifts": [{"dr": [0], "dt": 1}]},
        ],
        "rule": {"builtin": "identity"},
    }


def test_flat_xor():
    model = parse_spec(XOR)
    assert model.automaton.depth == 1
    assert model.automaton.structure.k == 2
    assert model.automaton.rule.name == "xor"


def test_depth_two_accepted():
    model = parse_spec(depth2(4))
    assert model.automaton.depth == 2
    assert model.automaton.width == 4


def test_depth_two_block_mismatch():
    with pytest.raises(SpecError, match=r"levels\[0\].*k=3 does not match the inner block size 4"):
        parse_spec(depth2(3))


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d.update(colour="red"), r"\$: unknown field\(s\) \['colour'\]"),
    (lambda d: d["levels"][0].update(speed=1), r"levels\[0\]: unknown field\(s\) \['speed'\]"),
    (lambda d: d["levels"][0]["state_shifts"][0].update(dx=1), r"levels\[0\]\.state_shifts\[0\]"),
    (lambda d: d.update(version="nestca/0"), "version"),
    (lambda d: d.update(u=-1), "u"),
    (lambda d: d.update(rule={"builtin": "majority"}), "rule"),
    (lambda d: d.update(rule={"builtin": "projection", "c": 1}), "rule"),
    (lambda d: d["levels"][0].update(boundary={"fixed": 5}), r"levels\[0\]"),
    (lambda d: d.pop("rule"), r"\$: missing"),
])
def test_validation_errors_carry_paths(mutate, path):
    doc = json.loads(json.dumps(XOR))
    mutate(doc)
    with pytest.raises(SpecError, match=path):
        build_model(doc)


def test_syntax_error():
    with pytest.raises(SpecError, match="invalid JSON"):
        parse_spec('{"version": ')


def test_table_rule_and_fixed_boundary():
    doc = dict(XOR, rule={"table": {"m": 1, "F": [[0], [0], [1], [0]]}})
    doc["levels"] = [dict(XOR["levels"][0], boundary={"fixed": 1})]
    model = parse_spec(doc)
    assert model.automaton.rule.table_f == ((0,), (0,), (1,), (0,))
    assert model.automaton.frame.fixed_symbol == 1


@pytest.mark.parametrize("doc", [XOR, depth2(4), dict(XOR, u=2.5, initial="delta:3",
                                                        text={"letters": "ab .", "extents": [3, 3, 3]},
                                                        fixture={"stage_permutation": [2, 1]})])
def test_round_trip(doc):
    model = parse_spec(doc)
    again = parse_spec(dumps(serialize_model(model)))
    assert again == model
    assert spec_hash(again) == spec_hash(model)


def test_dumps_is_stable():
    text = dumps({"b": 1, "a": [1, 2]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')


def test_slices():
    assert parse_slice("0110", (4,), 1).reshape(-1).tolist() == [0, 1, 1, 0]
    arr = parse_slice("01|11/00|10", (2, 2), 2)
    assert arr.shape == (2, 2, 2)
    assert format_slice(arr) == "01|11/00|10"
    with pytest.raises(ValueError, match="does not fit"):
        parse_slice("011", (4,), 1)


def test_initial_forms(tmp_path):
    nested = parse_spec(XOR).automaton
    assert format_slice(load_initial("delta:3", nested)[0]) == "00010000"
    assert format_slice(load_initial("delta", nested)[0]) == "00001000"
    assert format_slice(load_initial("10000001", nested)[0]) == "10000001"
    assert load_initial([[1, 0, 0, 0, 0, 0, 0, 1]], nested).shape == (1, 8, 1)
    (tmp_path / "init.txt").write_text("01010101\n")
    assert format_slice(load_initial({"file": "init.txt"}, nested, tmp_path)[0]) == "01010101"
    (tmp_path / "init.json").write_text(json.dumps({"initial": "delta:0"}))
    assert format_slice(load_initial({"file": str(tmp_path / "init.json")}, nested)[0]) == "10000000"
    with pytest.raises(ValueError):
        load_initial(3, nested)


def test_nested_initial_width():
    nested = parse_spec(depth2(4)).automaton
    window = load_initial("0000|0001|0000|0000|0000", nested)
    assert window.shape == (1, 5, 4)
    assert np.argwhere(window).tolist() == [[0, 1, 3]]
