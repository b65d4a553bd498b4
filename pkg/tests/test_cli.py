import json

import pytest

from nahcharp.cli import main
from nahcharp.scenarios import REGISTRY, registry_json


def write(tmp_path, obj, name="sc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_run_registry_example_passes(capsys):
    assert main(["run", "affine-2chart", "--report", "text"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_run_file_with_selected_check(tmp_path, capsys):
    path = write(tmp_path, registry_json("p1-log-rank2", 5))
    assert main(["run", path, "--check", "descent", "--report", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert list(rep["checks"]) == ["descent"] and rep["result"]


def test_json_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["verify", "--suite", "sym-power", "--seed", "7", "--report", "json", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_unknown_suite_exits_2(capsys):
    assert main(["verify", "--suite", "nope"]) == 2
    assert "unknown suite" in capsys.readouterr().err


def test_exponent_too_large_names_the_chart(tmp_path, capsys):
    obj = registry_json("affine-2chart", 3)
    N = [["1" if j == i + 1 else "0" for j in range(4)] for i in range(4)]
    obj["higgs"] = {"rank": 4, "locals": [{"x": N}, {"x": N}], "transitions": {"0,1": [[1 if i == j else 0 for j in range(4)] for i in range(4)]}}
    obj["rs"] = [1]
    assert main(["run", write(tmp_path, obj)]) == 2
    err = capsys.readouterr().err
    assert "ExponentTooLarge" in err and "chart 0" in err


def test_broken_twist_names_the_triple(tmp_path, capsys):
    obj = registry_json("affine-3chart", 5)
    obj["twist"] = {"0,1": ["1"], "0,2": ["1"], "1,2": ["1"]}
    assert main(["run", write(tmp_path, obj)]) == 2
    err = capsys.readouterr().err
    assert "CocycleFailure" in err and "(0, 1, 2)" in err


def test_invalid_json_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"prime": 5,')
    assert main(["run", str(path)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_examples_list_carries_citations(capsys):
    assert main(["examples", "list", "--report", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)["examples"]
    assert {r["name"] for r in rows} == set(REGISTRY)
    assert all(r["citations"] for r in rows)


def test_examples_show_round_trips(tmp_path, capsys):
    assert main(["examples", "show", "tensor-pair"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert main(["run", write(tmp_path, obj), "--check", "tensor"]) == 0


@pytest.mark.parametrize("suite", ["exp-algebra", "nu-cochain"])
def test_verify_suite_text_report(suite, capsys):
    assert main(["verify", "--suite", suite, "--prime", "3", "--report", "text"]) == 0
    assert "PASS" in capsys.readouterr().out
