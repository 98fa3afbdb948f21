import os

from adaptometer.output import atomic_write_text, format_cell, write_csv, write_json
from adaptometer.treebank import parse_bracketed, read_tree_file


def test_atomic_write_replaces_and_leaves_no_temp(tmp_path):
    target = tmp_path / "table.csv"
    atomic_write_text(target, "old\n")
    atomic_write_text(target, "new\n")
    assert target.read_text() == "new\n"
    assert os.listdir(tmp_path) == ["table.csv"]


def test_write_csv_layout(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b"], [(1, 0.5), (2, 1.0)], provenance="seed=3")
    raw = path.read_bytes()
    assert raw == b"# seed=3\na,b\n1,0.5\n2,1.0\n"


def test_format_cell_round_trips_floats():
    value = 0.1 + 0.2
    assert float(format_cell(value)) == value
    assert format_cell("x") == "x"
    assert format_cell(7) == "7"


def test_write_json_is_sorted_and_newline_terminated(tmp_path):
    path = tmp_path / "r.json"
    write_json(path, {"b": 1, "a": 2})
    assert path.read_text() == '{\n  "a": 2,\n  "b": 1\n}\n'


def test_read_tree_file(tmp_path):
    path = tmp_path / "trees.txt"
    path.write_text("(S (NN tea))\n\n(S (NP (PRP I)) (VP (VBP nap)))\n")
    trees = read_tree_file(path)
    assert len(trees) == 2
    assert trees[0] == parse_bracketed("(S (NN tea))")
