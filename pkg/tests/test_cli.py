import csv
import json

import pytest

from operlab.cli import main


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def a1_config(tmp_path):
    return _write(tmp_path, "a1.json", {"algebra": "A1", "k": 0.4, "ell": [0.3], "singularities": []})


def test_algebra_output(capsys):
    code, out, _ = _run(capsys, "algebra", "--id", "D4^3")
    assert code == 0
    doc = json.loads(out)
    res = doc["result"]
    assert res["r"] == 3 and res["h"] == 4 and res["h_dual"] == 6
    assert doc["manifest"]["subcommand"] == "algebra"
    assert doc["manifest"]["algebra"] == res["id"]


def test_usage_errors(capsys, tmp_path):
    assert _run(capsys, "algebra", "--bogus")[0] == 2
    assert _run(capsys, "algebra", "--id", "Z9")[0] == 2
    bad = _write(tmp_path, "bad.json", {"algebra": "Z9", "k": 0.4, "ell": [0.3]})
    code, _, err = _run(capsys, "qq-check", "--config", bad)
    assert code == 2 and "invalid input" in err
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert _run(capsys, "qq-check", "--config", str(broken))[0] == 2
    assert _run(capsys, "qq-check")[0] == 2
    assert _run(capsys, "qq-check", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_qq_check_passes_and_fails(capsys, a1_config):
    code, out, _ = _run(capsys, "qq-check", "--config", a1_config, "--grid", "0.5:1.5:2")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["passed"] and res["max_residual"] < 1e-6
    # an impossible threshold is a failed check
    code, out, _ = _run(capsys, "qq-check", "--config", a1_config, "--grid", "0.5:1.5:2", "--threshold", "0")
    assert code == 3 and not json.loads(out)["result"]["passed"]


def test_out_directory(capsys, tmp_path, a1_config):
    out = tmp_path / "run"
    code, stdout, _ = _run(capsys, "qfun", "--config", a1_config, "--grid", "0:1:3", "--out", str(out))
    assert code == 0 and stdout == ""
    doc = json.loads((out / "qfun.json").read_text())
    man = doc["manifest"]
    assert man["config_hash"] and man["seed"] == 0
    assert man["tolerances"]["profile"] == "default"
    assert len(doc["result"]["samples"]) == 3
    csvs = [p for p in man["outputs"] if p.endswith(".csv")]
    assert csvs
    lines = open(csvs[0], encoding="utf-8").read().splitlines()
    assert lines[0].startswith("# schema=")
    rows = list(csv.reader(lines[1:]))
    assert len(rows) == 4


def test_canon(capsys, tmp_path):
    oper = {"algebra": "A1", "k": 0.4, "ell": [0.3],
            "b": {"dim": 3, "poly": [[[0.0, 0.0], [0.0, 0.0], [1.1225, 0.1]]],
                  "poles": [{"at": [1.0, 0.2], "coeffs": [[[0.0, 0.0], [0.0, 0.0], [3.08, 0.72]],
                                                          [[0.0, 0.0], [0.0, 0.0], [1.92, 0.8]]]}]}}
    path = _write(tmp_path, "oper.json", oper)
    code, out, _ = _run(capsys, "canon", "--in", path)
    assert code == 0
    assert "canonical" in json.loads(out)["result"]
    assert _run(capsys, "canon", "--in", path, "--transversal", "other")[0] == 2


def test_tm_nogo(capsys):
    code, out, _ = _run(capsys, "tm-nogo", "--algebra", "D3^2", "--seeds", "3")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["n_equations"] > res["n_unknowns"]


def test_tm_solve_refuses_twisted(capsys):
    code, _, err = _run(capsys, "tm-solve", "--algebra", "D3^2", "--ell", "0.2", "0.11", "--seeds", "1")
    # unsupported twisted types are an input error, not a numerical one
    assert code == 2 and "invalid input" in err
