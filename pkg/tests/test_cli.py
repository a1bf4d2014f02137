import io
import json
import math
import subprocess
import sys

import pytest

from rwgraph.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_ratefn_eval_and_inverse():
    assert run("ratefn", "--dist", "gaussian", "--eval", "2") == (0, "2.0\n", "")
    code, out, _ = run("ratefn", "--dist", "gaussian", "--inverse", "2")
    assert code == 0 and float(out) == pytest.approx(2.0, abs=1e-12)


def test_predict_matching():
    code, out, _ = run("predict", "--family", "matching", "--dist", "gaussian", "--n", "100")
    assert code == 0
    assert float(out) == pytest.approx(100 * math.sqrt(2 * math.log(100)), rel=1e-14)


def test_check_tails_csv():
    code, out, _ = run("check-tails", "--dist", "gaussian", "--grid", "3:6:1")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "t,r" and len(lines) == 5
    ratios = [float(l.split(",")[1]) for l in lines[1:]]
    assert ratios == sorted(ratios, reverse=True)


def test_solve_outputs_one_based_vertices():
    code, out, _ = run("solve", "--family", "hamcycle", "--dist", "uniform", "--n", "8", "--seed", "3")
    doc = json.loads(out)
    assert code == 0 and doc["vertices"][0] == 1 and sorted(doc["vertices"]) == list(range(1, 9))
    assert all(1 <= a <= 8 and 1 <= b <= 8 for a, b in doc["edges"])


def test_certify_rows():
    code, out, _ = run("certify", "--family", "matching", "--dist", "gaussian", "--n", "60",
                       "--seed", "1", "--trials", "3")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("trial,level,found,certified_bound,exact_optimum")
    for line in lines[1:]:
        row = line.split(",")
        if row[2] == "1":
            assert float(row[3]) <= float(row[4])


def test_simulate_writes_report(tmp_path):
    path = tmp_path / "t.csv"
    code, out, _ = run("simulate", "--family", "tree", "--dist", "uniform", "--n", "50",
                       "--trials", "10", "--seed", "7", "--out", str(path))
    assert code == 0
    assert json.loads(out)["trials"] == 10
    assert len(path.read_text().splitlines()) == 11


def test_table(tmp_path):
    path = tmp_path / "tab.csv"
    code, out, _ = run("table", "--family", "matching", "--dist", "gaussian", "--n-list", "10,20",
                       "--trials", "5", "--seed", "1", "--out", str(path))
    assert code == 0 and out == path.read_text()
    assert len(out.splitlines()) == 3


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["ratefn", "--dist", "gaussian"],
    ["predict", "--family", "clique", "--dist", "gaussian", "--n", "5"],
    ["check-tails", "--dist", "gaussian", "--grid", "1:2"],
    ["table", "--family", "tree", "--dist", "gaussian", "--n-list", "a,b", "--seed", "1"],
])
def test_usage_errors_exit_1(argv):
    code, _, err = run(*argv)
    assert code == 1 and err


@pytest.mark.parametrize("argv", [
    ["ratefn", "--dist", "cauchy", "--eval", "1"],
    ["ratefn", "--dist", "gaussian", "--inverse", "-1"],
    ["predict", "--family", "copy", "--dist", "gaussian", "--n", "10"],
    ["solve", "--family", "hamcycle", "--dist", "gaussian", "--n", "30", "--seed", "1"],
    ["simulate", "--family", "tree", "--dist", "gaussian", "--n", "5", "--trials", "1", "--seed", "1",
     "--out", "/nonexistent-dir/x.csv"],
])
def test_domain_errors_exit_2(argv):
    code, _, err = run(*argv)
    assert code == 2 and err.startswith("rwgraph:")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rwgraph", "ratefn", "--dist", "rademacher", "--eval", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(math.log(2), rel=1e-14)


def test_help_exits_zero():
    code, out, _ = run("--help")
    assert code == 0
