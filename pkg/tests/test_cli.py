import csv
import io
import json
import pathlib
import xml.etree.ElementTree as ET

import jsonschema
import pytest

from metric_curve_lab.cli import run

SCHEMAS = pathlib.Path(__file__).resolve().parents[1] / "docs" / "schemas"
ELLIPSE = ["--curve", "(1/4)*x^2+y^2-1"]


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def validate(kind, text):
    doc = json.loads(text)
    schema = json.loads((SCHEMAS / f"{kind}.schema.json").read_text())
    jsonschema.validate(doc, schema)
    return doc


@pytest.mark.parametrize(
    "command, kind, extra",
    [
        ("sample", "sample", ["--eps", "0.2"]),
        ("voronoi", "voronoi", ["--eps", "0.2"]),
        ("features", "features", ["--eps", "0.1"]),
        ("solve", "solve", ["--eps", "0.1"]),
        ("reach", "reach", ["--eps", "0.1"]),
        ("converge", "convergence", ["--eps", "0.2", "--halvings", "1"]),
    ],
)
def test_json_outputs_match_schemas(command, kind, extra):
    code, out, err = call(command, *ELLIPSE, *extra)
    assert code == 0, err
    doc = validate(kind, out)
    assert doc["schema"] == f"metric-curve-lab/{kind}/1"


def test_butterfly_reach_values():
    code, out, _ = call("reach", "--eps", "0.05")
    doc = validate("reach", out)
    assert code == 0
    assert doc["tau_exact"] == pytest.approx(0.104, abs=0.002)
    assert doc["bottleneck_pairs"] == 22


def test_solve_degree_bounds():
    code, out, _ = call("solve", "--eps", "0.1")
    doc = validate("solve", out)
    assert doc["degree_bounds"] == {"critical_curvature": 56, "bottleneck_pairs": 96}


def test_csv_output():
    code, out, _ = call("sample", *ELLIPSE, "--eps", "0.2", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["component", "x", "y"] and len(rows) > 10


def test_repeat_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert call("features", *ELLIPSE, "--eps", "0.1", "--out", str(a))[0] == 0
    assert call("features", *ELLIPSE, "--eps", "0.1", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_render_svg(tmp_path):
    out = tmp_path / "fig.svg"
    code, _, err = call("render", "--eps", "0.1", "--layers", "curve,points,voronoi,medial,critical,reach",
                        "--out", str(out))
    assert code == 0, err
    root = ET.fromstring(out.read_text())
    groups = [g.get("id") for g in root.iter("{http://www.w3.org/2000/svg}g")]
    assert groups == ["curve", "points", "voronoi", "medial", "critical", "reach"]


def test_curve_file(tmp_path):
    f = tmp_path / "curve.txt"
    f.write_text("x^2+y^2-1\n")
    code, out, _ = call("sample", "--curve-file", str(f), "--eps", "0.2")
    assert code == 0 and json.loads(out)["n_points"] >= 31


def test_points_flag():
    code, out, _ = call("sample", *ELLIPSE, "--points", "60")
    assert code == 0 and abs(json.loads(out)["n_points"] - 60) <= 2


def test_warnings_exit_two():
    code, _, err = call("solve", "--curve", "y^2-x^3", "--box", "-1", "1", "-1", "1", "--eps", "0.1",
                        "--singular", "0,0")
    assert code == 2 and "warning" in err


def test_delta_warning_exit_two():
    code, _, err = call("features", *ELLIPSE, "--eps", "0.1", "--delta", "0.15")
    assert code == 2 and err.count("warning") == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "--curve", "x^2+y^2+1"],
        ["sample", "--curve", "x^^2"],
        ["sample", "--eps", "-1"],
        ["sample", "--box", "1", "0", "0", "1"],
        ["sample", "--bogus"],
        ["render", "--layers", "nope"],
        ["converge", "--halvings", "9"],
        ["sample", "--eps", "0.1", "--points", "10"],
        ["sample", "--curve-file", "/nonexistent/curve.txt"],
        ["frobnicate"],
    ],
)
def test_errors_exit_one(argv):
    code, out, err = call(*argv)
    assert code == 1 and out == ""


def test_bad_thread_env(monkeypatch):
    monkeypatch.setenv("METRIC_CURVE_LAB_THREADS", "zero")
    assert call("sample", *ELLIPSE, "--eps", "0.2")[0] == 1
    monkeypatch.setenv("METRIC_CURVE_LAB_THREADS", "3")
    assert call("sample", *ELLIPSE, "--eps", "0.2")[0] == 0
