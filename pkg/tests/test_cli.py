import json
import subprocess
import sys
from pathlib import Path

import pytest

from nearcurve.cli import main

DATA = Path(__file__).resolve().parent.parent / "data" / "forms"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_forms_check(capsys):
    code, out, _ = run(capsys, "forms", "check", DATA / "F5.json")
    assert code == 0
    d = json.loads(out)
    assert d["height"] == 1 and d["primitive"]


def test_count_scan(capsys):
    code, out, _ = run(capsys, "count", "scan", DATA / "F5.json", "--B", 4, "--gamma", 0, "--exclude-tangents")
    assert code == 0
    d = json.loads(out)
    assert d["N"] == 24 and d["N_star"] == 0
    assert d["per_line"] == {"x+y": 8, "x-z": 8, "y-z": 8}


def test_count_scan_threads_identical(capsys):
    outs = [run(capsys, "count", "scan", DATA / "F5.json", "--B", 40, "--gamma", "3/2", "--threads", t)[1]
            for t in (1, 4)]
    assert outs[0] == outs[1]


def test_expression_file(capsys, tmp_path):
    f = tmp_path / "circle.txt"
    f.write_text("x^2+y^2-z^2\n")
    code, out, _ = run(capsys, "count", "scan", f, "--B", 5, "--gamma", 0)
    assert code == 0 and json.loads(out)["N"] > 0


def test_thue_and_lattice(capsys, tmp_path):
    f = tmp_path / "sumsq.txt"
    f.write_text("x^2+y^2")
    code, out, _ = run(capsys, "thue", "count", f, "--B", 10, "--P", 25, "--eta", 3, "--s0", 1, "--t0", 0)
    assert code == 0 and json.loads(out)["count"] == 14 and json.loads(out)["lattice"]["det"] == 3
    code, out, _ = run(capsys, "lattice", "minima", "--M", 4, "--B", 16)
    assert code == 0 and json.loads(out)["minima"] == ["1/16", "1/4", "1/4"]


def test_detmethod_run(capsys, tmp_path):
    out_file = tmp_path / "dm.json"
    code, _, _ = run(capsys, "detmethod", "run", DATA / "F5.json", "--B", 64, "--tau", "5/2", "--out", out_file)
    assert code == 0
    d = json.loads(out_file.read_text())
    assert d["classification"] == {"1": 30, "2": 0, ">=3": 0} and d["uncovered"] == []


def test_incomplete_pipeline_exit_code(capsys):
    # boxes on a conic hold three non-collinear points, so no line covers them
    code, out, err = run(capsys, "detmethod", "run", DATA / "Qp.json", "--B", 30, "--tau", 2, "--Dmax", 1)
    assert code == 4
    assert json.loads(out)["uncovered"] and "auxiliary form" in err


def test_precondition_exit_code(capsys):
    code, _, err = run(capsys, "count", "scan", DATA / "F5.json", "--B", 8, "--gamma", 7)
    assert code == 2 and err.startswith("error:")
    code, _, _ = run(capsys, "forms", "check", "/nonexistent/form.json")
    assert code == 2


def test_bad_arguments(capsys):
    with pytest.raises(SystemExit) as e:
        main(["count", "scan", str(DATA / "F5.json"), "--B", "8", "--gamma", "x/y"])
    assert e.value.code == 2


def test_experiment_scaling(capsys, tmp_path):
    out_file, svg = tmp_path / "s.csv", tmp_path / "s.svg"
    code, _, err = run(capsys, "experiment", "scaling", DATA / "F5.json", "--gamma", "5/2",
                       "--B-list", "16,32,64", "--out", out_file, "--plot", svg)
    assert code == 0
    assert out_file.read_text().startswith("form_id,B,gamma")
    assert svg.exists()
    summary = json.loads(err)
    assert summary["slack"] == 0.2 and isinstance(summary["within"], bool)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "nearcurve", "lattice", "minima", "--M", "1", "--B", "1"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0 and json.loads(r.stdout)["minima"] == ["1", "1", "1"]
