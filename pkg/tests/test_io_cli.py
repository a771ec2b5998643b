import io as stdio
import json
import sys
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from dendrocode import io
from dendrocode.cli import run
from dendrocode.codec import encode, time_change
from dendrocode.order import TreeMeasure
from dendrocode.random_gen import remark_segment, y_tree

from helpers import H1, structured_trees

REMARK = {
    "tree": {"root": "r", "vertices": ["r", "a"],
             "edges": [{"id": "ea", "parent": "r", "child": "a", "length": "1/1"}]},
    "order": {"child_order": {"r": ["ea"]}},
    "measure": {"densities": {"ea": "2/3"},
                "atoms": [{"point": {"edge": "ea", "offset": "1/2"}, "mass": "1/3"}]},
}


def run_cli(argv, stdin="", monkeypatch=None, capsys=None):
    monkeypatch.setattr(sys, "stdin", stdio.StringIO(stdin))
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_height_json_layout():
    doc = io.height_to_json(H1)
    assert doc["lifetime"] == "1/1"
    assert doc["knots"][1] == {"t": "1/3", "y_left": "1/2", "y_right": "1/2"}
    assert io.height_from_json(doc) == H1


def test_schema_errors_name_the_field():
    with pytest.raises(io.SchemaError, match="knots"):
        io.height_from_json({"lifetime": "1/1"})
    with pytest.raises(io.SchemaError, match="p/q"):
        io.height_from_json({"knots": [{"t": 0, "y_left": "0/1", "y_right": "0/1"}]})
    with pytest.raises(io.SchemaError, match="positive jump"):
        io.height_from_json({"knots": [{"t": "0/1", "y_left": "0/1", "y_right": "0/1"},
                                       {"t": "1/1", "y_left": "1/1", "y_right": "2/1"}]})
    with pytest.raises(io.SchemaError):
        io.point_from_json({"nowhere": 1})
    with pytest.raises(io.SchemaError):
        io.loads("{not json")


@settings(max_examples=40, deadline=None)
@given(structured_trees)
def test_schema_roundtrips(S):
    docs = [
        (io.height_to_json(encode(S)), lambda d: io.height_to_json(io.height_from_json(d))),
        (io.tree_to_json(S.tree), lambda d: io.tree_to_json(io.tree_from_json(d))),
        (io.order_to_json(S.order), lambda d: io.order_to_json(io.order_from_json(d))),
        (io.measure_to_json(S.measure), lambda d: io.measure_to_json(io.measure_from_json(d))),
        (io.structured_to_json(S), lambda d: io.structured_to_json(io.structured_from_json(d))),
    ]
    if S.tree.edges:
        phi = time_change(S.tree, S.order, S.measure, S.measure)
        docs.append((io.map_to_json(phi), lambda d: io.map_to_json(io.map_from_json(d))))
    for doc, again in docs:
        text = io.dumps(doc)
        assert io.dumps(again(io.loads(text))) == text


def test_plot_csv():
    text = io.plot_csv(H1, grid=1)
    assert text.splitlines() == ["t,h", "0/1,0/1", "1/3,1/2", "1/2,1/2", "2/3,1/2", "1/1,1/1"]


def test_cli_encode_remark(tmp_path, monkeypatch, capsys):
    src = tmp_path / "remark14.json"
    src.write_text(json.dumps(REMARK))
    out = tmp_path / "h1.json"
    code, _, _ = run_cli(["encode", "--in", str(src), "--out", str(out)], monkeypatch=monkeypatch, capsys=capsys)
    assert code == 0
    assert io.height_from_json(json.loads(out.read_text())).knots == H1.knots


def test_cli_decode_then_encode_is_byte_identical(monkeypatch, capsys):
    h1_text = io.dumps(io.height_to_json(H1))
    code, tree_text, _ = run_cli(["decode"], h1_text, monkeypatch, capsys)
    assert code == 0
    code, again, _ = run_cli(["encode"], tree_text, monkeypatch, capsys)
    assert code == 0 and again == h1_text


def test_cli_verify_roundtrip(monkeypatch, capsys):
    code, out, _ = run_cli(["verify", "roundtrip", "--seed", "7", "--cases", "200"], "", monkeypatch, capsys)
    assert code == 0
    assert json.loads(out)["passed"] is True


def test_cli_error_codes(tmp_path, monkeypatch, capsys):
    code, _, err = run_cli(["encode", "--in", str(tmp_path / "missing.json")], "", monkeypatch, capsys)
    assert code == 2 and "file not found" in err
    code, _, err = run_cli(["encode"], '{"tree": 3}', monkeypatch, capsys)
    assert code == 2 and "schema violation" in err
    bad = json.loads(json.dumps(REMARK))
    bad["measure"]["densities"]["ea"] = "0/1"
    code, _, err = run_cli(["encode"], json.dumps(bad), monkeypatch, capsys)
    assert code == 2 and "(Mes)" in err
    code, _, _ = run_cli(["frobnicate"], "", monkeypatch, capsys)
    assert code == 2
    code, _, _ = run_cli(["verify", "nosuchsuite"], "", monkeypatch, capsys)
    assert code == 2


def test_cli_verify_failure_exit_code(monkeypatch, capsys):
    from dendrocode import verify

    monkeypatch.setitem(verify.SUITES, "roundtrip", {"always_fails": lambda rng: "broken on purpose"})
    code, out, _ = run_cli(["verify", "roundtrip", "--cases", "2"], "", monkeypatch, capsys)
    assert code == 1
    report = json.loads(out)
    assert report["checks"][0]["counterexample"] == {"case": 0, "detail": "broken on purpose"}


@pytest.mark.parametrize("kind", ["gw", "excursion", "lifo", "segment", "star", "ytree", "random"])
def test_cli_gen_is_deterministic(kind, monkeypatch, capsys):
    code, first, _ = run_cli(["gen", "--kind", kind, "--seed", "5", "--size", "12"], "", monkeypatch, capsys)
    code2, second, _ = run_cli(["gen", "--kind", kind, "--seed", "5", "--size", "12"], "", monkeypatch, capsys)
    assert code == code2 == 0 and first == second


def test_cli_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("DENDROCODE_SEED", "9")
    _, env_out, _ = run_cli(["gen", "--kind", "random"], "", monkeypatch, capsys)
    _, flag_out, _ = run_cli(["gen", "--kind", "random", "--seed", "9"], "", monkeypatch, capsys)
    assert env_out == flag_out


def test_cli_shuffle_timechange_continuify_plot(tmp_path, monkeypatch, capsys):
    ytext = io.dumps(io.structured_to_json(y_tree()))
    code, out, _ = run_cli(["shuffle", "--seed", "1"], ytext, monkeypatch, capsys)
    assert code == 0 and io.order_from_json(json.loads(out)).validate(y_tree().tree) == []

    seg = remark_segment()
    other = tmp_path / "mu2.json"
    other.write_text(io.dumps({"densities": {"ea": "1/1"}, "atoms": []}))
    code, out, _ = run_cli(["timechange", "--to", str(other)], io.dumps(io.structured_to_json(seg)),
                           monkeypatch, capsys)
    assert code == 0
    phi = io.map_from_json(json.loads(out))
    assert phi.knots == time_change(seg.tree, seg.order, seg.measure, TreeMeasure({"ea": 1})).knots

    htext = io.dumps(io.height_to_json(encode(y_tree())))
    code, out, _ = run_cli(["continuify"], htext, monkeypatch, capsys)
    assert code == 0 and io.height_from_json(json.loads(out)).lifetime == F(7, 2)
    code, out, _ = run_cli(["plot", "--grid", "2"], htext, monkeypatch, capsys)
    assert code == 0 and out.splitlines()[0] == "t,h" and "2/1,2/1" in out
