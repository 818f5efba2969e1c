"""Command-line driver: subcommands, exit codes, deterministic JSON
output, and the schema-checked payload io helpers.
"""

import json
from fractions import Fraction

import pytest

import qortho.cli as cli
from qortho.cli import SchemaError, io, run
from qortho.itensor import IndexGeometry, SparseTensor4, tensor_equal
from qortho.presentations import (build_presentation, element_from_json,
                                  quantum_determinant, word_element)
from qortho.report import Report
from qortho.rmatrix import build_R, build_bundle
from qortho.envelope import word_functional
from qortho.scalars import PoleAtOne, specialize


def test_verify_rmatrix_exit_zero(capsys):
    assert run(["verify", "--suite", "rmatrix", "--n", "4"]) == 0
    out = capsys.readouterr().out
    assert "overall: PASS" in out and "summary:" in out


def test_verify_json_payload(tmp_path):
    out = tmp_path / "v.json"
    assert run(["verify", "--suite", "embedding", "--n", "3",
                "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["ok"] is True and doc["suite"] == "embedding"
    assert doc["command"] == "verify" and doc["seed"] == 0
    assert all(rep["ok"] for rep in doc["reports"])


def test_json_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(["verify", "--suite", "rmatrix", "--n", "3",
                    "--format", "json", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_dump_writes_json_next_to_text(tmp_path, capsys):
    dump = tmp_path / "d.json"
    assert run(["det", "--n", "3", "--dump", str(dump)]) == 0
    text = capsys.readouterr().out
    assert text.startswith("(1) T[1,1] T[2,2] T[3,3]")
    doc = json.loads(dump.read_text())
    assert doc["command"] == "det" and doc["n"] == 3


def test_det_json_round_trips(tmp_path):
    out = tmp_path / "det.json"
    assert run(["det", "--n", "3", "--format", "json",
                "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    qd = quantum_determinant(3)
    assert element_from_json(qd.alphabet, qd.ps, doc["element"]) == qd


def test_reduce_text(capsys):
    assert run(["reduce", "--n", "3", "--algebra", "plane",
                "--word", "x2 x1"]) == 0
    assert capsys.readouterr().out == "x2 x1 -> (s^-2) x1 x2\n"
    assert run(["reduce", "--n", "3", "--word", "T[1,1] x1"]) == 0
    assert capsys.readouterr().out == \
        "T[1,1] x1 -> (s^4*g12^-1) x1 T[1,1]\n"


def test_pair_text(capsys):
    assert run(["pair", "--n", "3", "--functional", "L-[1,1]",
                "--word", "u"]) == 0
    assert capsys.readouterr().out == "s^-2\n"
    assert run(["pair", "--n", "3", "--functional", "eps",
                "--word", ""]) == 0
    assert capsys.readouterr().out == "1\n"


def test_lie_payload(tmp_path):
    out = tmp_path / "lie.json"
    assert run(["lie", "--n", "3", "--kind", "projected",
                "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["labels"] == ["omega[1]", "omega[2]", "omega[3]",
                             "omega[o]", "omega[*]"]
    assert doc["closed"] is True and doc["ok"] is True
    assert len(doc["structure_constants"]) == 11
    assert all(rel["status"] for rel in doc["relations"])


def test_build_r_spec_values(tmp_path):
    out = tmp_path / "r.json"
    assert run(["build-r", "--n", "3", "--spec", "s=2",
                "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    R = build_R(IndexGeometry(3))
    got = {tuple(rec["idx"]): Fraction(rec["value"]) for rec in doc["entries"]}
    want = {k: specialize(v, {"s": Fraction(2)}) for k, v in R.entries.items()}
    assert got == {k: v for k, v in want.items() if v}


def test_usage_errors_exit_two(capsys):
    assert run(["verify", "--suite", "rmatrix", "--n", "2"]) == 2
    assert run(["frobnicate", "--n", "3"]) == 2
    assert run(["reduce", "--n", "3", "--algebra", "plane",
                "--word", "u x1"]) == 2
    assert run(["build-r", "--n", "3", "--series", "D"]) == 2
    assert run(["build-r", "--n", "3", "--spec", "g99=1"]) == 2
    assert run(["pair", "--n", "3", "--functional", "L+[9,1]",
                "--word", "u"]) == 2
    capsys.readouterr()


def test_failing_suite_exits_one(monkeypatch, capsys):
    def broken(cfg):
        rep = Report("stub suite")
        rep.add("always fails", False, "planted")
        return [rep]

    monkeypatch.setattr(cli, "_SUITES", [("rmatrix", broken)])
    assert run(["verify", "--suite", "rmatrix", "--n", "3"]) == 1
    out = capsys.readouterr().out
    assert "[FAIL] always fails" in out


def test_scalar_domain_error_exits_three(monkeypatch, capsys):
    def poleful(cfg):
        raise PoleAtOne("denominator vanishes at r = 1")

    monkeypatch.setattr(cli, "_SUITES", [("rmatrix", poleful)])
    assert run(["verify", "--suite", "rmatrix", "--n", "3"]) == 3
    assert "exact arithmetic left its domain" in capsys.readouterr().err


# --- payload io --------------------------------------------------------------

def test_io_tensor_round_trip(tmp_path):
    g = IndexGeometry(3)
    ps = g.params
    X = SparseTensor4(g, {(1, 2, 2, 1): ps.s_pow(2), (3, 1, 1, 3): ps.one})
    path = tmp_path / "t.json"
    io("save", str(path), "tensor", X)
    Y, notes = io("load", str(path), "tensor")
    ok, _ = tensor_equal(X, Y)
    assert ok and notes == []
    # byte-identical when saved again
    path2 = tmp_path / "t2.json"
    io("save", str(path2), "tensor", Y)
    assert path.read_bytes() == path2.read_bytes()


def test_io_tensor_reorders_with_note(tmp_path):
    g = IndexGeometry(3)
    ps = g.params
    X = SparseTensor4(g, {(1, 2, 2, 1): ps.s_pow(2), (3, 1, 1, 3): ps.one})
    path = tmp_path / "t.json"
    io("save", str(path), "tensor", X)
    doc = json.loads(path.read_text())
    doc["entries"].reverse()
    path.write_text(json.dumps(doc))
    Y, notes = io("load", str(path), "tensor")
    ok, _ = tensor_equal(X, Y)
    assert ok
    assert notes == ["entry list was not in canonical order; re-sorted"]


def test_io_tensor_schema_pointers(tmp_path):
    g = IndexGeometry(3)
    ps = g.params
    X = SparseTensor4(g, {(1, 2, 2, 1): ps.s_pow(2)})
    path = tmp_path / "t.json"
    io("save", str(path), "tensor", X)
    doc = json.loads(path.read_text())

    bad = dict(doc, vars=["s", "q"])
    path.write_text(json.dumps(bad))
    with pytest.raises(SchemaError) as err:
        io("load", str(path), "tensor")
    assert err.value.pointer == "/vars"

    bad = json.loads(json.dumps(doc))
    bad["entries"][0]["idx"] = [1, 2, 2]
    path.write_text(json.dumps(bad))
    with pytest.raises(SchemaError) as err:
        io("load", str(path), "tensor")
    assert err.value.pointer == "/entries/0/idx"


def test_io_element_and_functional(tmp_path):
    p = build_presentation("iso", 3)
    A, ps = p.alphabet, p.params
    e = word_element(A, ps, A.word("x1", "u"), ps.s_pow(2))
    path = tmp_path / "e.json"
    io("save", str(path), "element", e)
    back, notes = io("load", str(path), "element", context=(A, ps))
    assert back == e and notes == []

    bundle = build_bundle(IndexGeometry(5, embedded=True))
    f = word_functional(bundle, ((1, 2, 2), (-1, 3, 3)))
    fpath = tmp_path / "f.json"
    io("save", str(fpath), "functional", f)
    fback, fnotes = io("load", str(fpath), "functional", context=bundle)
    assert fback == f and fnotes == []


def test_io_element_unknown_symbol(tmp_path):
    p = build_presentation("iso", 3)
    A, ps = p.alphabet, p.params
    e = word_element(A, ps, A.word("x1"))
    path = tmp_path / "e.json"
    io("save", str(path), "element", e)
    doc = json.loads(path.read_text())
    doc[0]["word"] = ["x9"]
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError) as err:
        io("load", str(path), "element", context=(A, ps))
    assert err.value.pointer == "/0/word/0"
