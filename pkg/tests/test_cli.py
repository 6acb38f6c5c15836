import json

import pytest

from lpcritpath import cli
from lpcritpath.verification import fixture_dir


def _fx(name):
    return str(fixture_dir() / f"{name}.json")


def test_trace_json_to_file(tmp_path, capsys):
    out = tmp_path / "g.json"
    code = cli.main(["trace", "greedy", "-i", _fx("ex2"), "--format", "json", "-o", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "breakpoints: [2., 0.]" in text and "order: +1 +2" in text
    assert json.loads(out.read_text())["kind"] == "greedy"


def test_trace_csv_to_stdout(capsys):
    assert cli.main(["trace", "main", "-i", _fx("ex1d")]) == 0
    cap = capsys.readouterr()
    assert cap.out.startswith("arclength,lambda,c,class_Q,class_P,support,beta_1")
    assert "terminal: reached-origin" in cap.err


def test_omp_against_traced_path(tmp_path, capsys):
    g = tmp_path / "g.json"
    assert cli.main(["trace", "greedy", "-i", _fx("ex5d"), "--format", "json", "-o", str(g)]) == 0
    assert cli.main(["omp", "-i", _fx("ex5d"), "--against", str(g), "-o", str(tmp_path / "o.csv")]) == 0
    assert "coincide: true" in capsys.readouterr().out
    # a modified OMP run does not match an unmodified greedy path
    code = cli.main(["omp", "--modified", "-i", _fx("ex5d"), "--against", str(g), "-o", str(tmp_path / "m.csv")])
    assert code == 3


def test_verify_subset(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert cli.main(["verify", "--only", "1", "--only", "2", "-o", str(report)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and all(line.startswith("[PASS]") for line in lines)
    assert json.loads(report.read_text())["passed"] is True


def test_verify_missing_fixtures(tmp_path):
    assert cli.main(["verify", "--only", "1", "--fixtures", str(tmp_path)]) == 2


@pytest.mark.parametrize("kind,extra", [
    ("landscape-1d", ["--lambdas", "0.2,0.5", "--points", "11"]),
    ("global-q", ["--lambdas", "0:0.5:3"]),
    ("enumerate-orthogonal", ["--lambda", "0.05"]),
])
def test_scan(kind, extra, capsys):
    name = "ex1d" if kind == "landscape-1d" else "ex2"
    assert cli.main(["scan", kind, "-i", _fx(name)] + extra) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) > 2


def test_enumerate_needs_orthogonal(capsys):
    assert cli.main(["scan", "enumerate-orthogonal", "-i", _fx("ex2_nonorth")]) == 2


@pytest.mark.parametrize("argv", [
    ["trace", "main", "-i", "FX", "--set", "no_such_key=1"],
    ["trace", "main", "-i", "FX", "--set", "step_max"],
    ["trace", "main", "-i", "/nonexistent.json"],
])
def test_input_errors(argv, capsys):
    argv = [_fx("ex2") if a == "FX" else a for a in argv]
    assert cli.main(argv) == 2
    assert "lpcrit: error" in capsys.readouterr().err


def test_bad_instance_content(tmp_path):
    f = tmp_path / "i.json"
    f.write_text(json.dumps({"p": 0.5, "G": [[1, 2], [2, 1]], "beta_star": [1, 1]}))
    assert cli.main(["trace", "main", "-i", str(f)]) == 2
    f.write_text(json.dumps({"p": 1.5, "G": [[1]], "beta_star": [1]}))
    assert cli.main(["trace", "main", "-i", str(f)]) == 2


def test_step_budget_exit_code(capsys):
    argv = ["trace", "greedy", "-i", _fx("ex2"), "--set", "max_steps=20"]
    assert cli.main(argv) == 3
    assert "maximum number of steps" in capsys.readouterr().err
