import csv
import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from strebel.cli import main

from corpus import SQRT2

REFERENCE = {"poles": [[1, 0], [-1, 0], [0, 0]], "weights": [1, -1, SQRT2], "levels": [0.05, 1, 9]}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_reference(tmp_path, capsys):
    code, out, _ = run(capsys, "analyze", write(tmp_path, REFERENCE), "--no-timings")
    assert code == 0
    rep = json.loads(out)
    assert rep["connected"] is False
    assert [lv["count"] for lv in rep["levels"]] == [2, 1, 2]
    assert rep["levels"][1]["components"][0]["class"] == "Ring([0, 2])"
    values = sorted(c["value"] for c in rep["critical_set"])
    assert values == pytest.approx([0.12524973005946959, 7.984049143460764], rel=1e-12)
    assert "timings" not in rep


def test_analyze_single_pole(tmp_path, capsys):
    code, out, _ = run(capsys, "analyze", write(tmp_path, {"poles": [[0.5, 0]], "weights": [2], "levels": [1, 3]}))
    rep = json.loads(out)
    assert code == 0 and rep["connected"] is True
    assert [lv["count"] for lv in rep["levels"]] == [1, 1]
    assert "timings" in rep


@pytest.mark.parametrize("doc", [
    {"poles": [[0, 0], [0, 0]], "weights": [1, 1]},
    {"poles": [[0, 0], [1, 0]], "weights": [1, 0]},
    {"poles": [[0, 0], [1, 0]], "weights": [1, -2]},
    {"poles": [[0, 0, 1]], "weights": [1]},
    {"poles": [[0, 0]], "weights": [1], "levels": [-1]},
    {"poles": [[0, 0]], "weights": [1], "options": {"bogus": 1}},
    "{not json",
])
def test_config_errors_exit_two(tmp_path, capsys, doc):
    code, out, err = run(capsys, "analyze", write(tmp_path, doc), "--level", "1")
    assert code == 2 and out == "" and err.startswith("error:")


def test_missing_file_exit_two(tmp_path, capsys):
    assert run(capsys, "verify", str(tmp_path / "absent.json"))[0] == 2


def test_near_critical_level_exit_three(tmp_path, capsys):
    code, _, err = run(capsys, "trace", write(tmp_path, REFERENCE), "--level", "7.984049143460764")
    assert code == 3
    assert "warning" in err and "NearCriticalPoint" in err


def test_trace_outputs(tmp_path, capsys):
    svg, out_csv = tmp_path / "f.svg", tmp_path / "f.csv"
    code, out, _ = run(capsys, "trace", write(tmp_path, REFERENCE), "--level", "1", "--graph",
                       "--svg", str(svg), "--out", str(out_csv), "--no-timings")
    assert code == 0
    rep = json.loads(out)
    assert rep["critical_graph"] == {"edges": 4, "components": 2}
    root = ET.parse(svg).getroot()
    assert root.tag.endswith("svg")
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}path[@class='lemniscate']")) == 1
    assert len(root.findall(f"{ns}path[@class='pole']")) == 3
    assert len(root.findall(f"{ns}circle[@class='zero']")) == 2
    assert len(root.findall(f"{ns}polyline[@class='critical']")) == 4
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["component_id", "re", "im", "arc_param"]
    pts = np.array([float(r[1]) + 1j * float(r[2]) for r in rows[1:]])
    u = np.log(np.abs(pts - 1)) - np.log(np.abs(pts + 1)) + SQRT2 * np.log(np.abs(pts))
    assert np.max(np.abs(u)) < 1e-11


def test_trace_single_pole_circle(tmp_path, capsys):
    out_csv = tmp_path / "c.csv"
    code, _, _ = run(capsys, "trace", write(tmp_path, {"poles": [[0, 0]], "weights": [1]}),
                     "--level", "2", "--out", str(out_csv))
    assert code == 0
    rows = list(csv.reader(out_csv.open()))[1:]
    r = [math.hypot(float(x[1]), float(x[2])) for x in rows]
    assert max(abs(v - 2) for v in r) < 1e-12
    assert {x[0] for x in rows} == {"0"}


def test_outputs_are_deterministic(tmp_path, capsys):
    cfg = write(tmp_path, REFERENCE)
    blobs = []
    for i in range(2):
        svg, out_csv = tmp_path / f"{i}.svg", tmp_path / f"{i}.csv"
        _, out, _ = run(capsys, "trace", cfg, "--level", "9", "--svg", str(svg), "--out", str(out_csv),
                        "--no-timings")
        blobs.append((out, svg.read_bytes(), out_csv.read_bytes()))
    assert blobs[0] == blobs[1]


def test_fingerprint_outer_component(tmp_path, capsys):
    out_csv = tmp_path / "k.csv"
    code, out, _ = run(capsys, "fingerprint", write(tmp_path, REFERENCE), "--level", "9", "--component", "0,1,2",
                       "--out", str(out_csv), "--samples", "512", "--no-timings")
    assert code == 0
    (comp,) = json.loads(out)["components"]
    assert comp["class"] == "CircleAtInfinity" and comp["winding"] == 1 and comp["monotone"]
    assert comp["residuals"]["circle_infinity"] <= 1e-6
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["theta", "arg_k"] and len(rows) == 513
    args = np.array([float(r[1]) for r in rows[1:]])
    assert np.all(np.diff(args) > 0)


def test_fingerprint_ring_reports_both_variants(tmp_path, capsys):
    code, out, _ = run(capsys, "fingerprint", write(tmp_path, REFERENCE), "--level", "1", "--component", "{0,2}")
    (comp,) = json.loads(out)["components"]
    assert code == 0
    assert set(comp["residuals"]) == {"ring_weighted", "ring_literal"}
    assert comp["passing_variants"] == ["weighted"]


def test_fingerprint_unit_circle_is_identity(tmp_path, capsys):
    out_csv = tmp_path / "id.csv"
    code, _, _ = run(capsys, "fingerprint", write(tmp_path, {"poles": [[0, 0]], "weights": [1]}),
                     "--level", "1", "--out", str(out_csv))
    assert code == 0
    rows = np.array([[float(v) for v in r] for r in list(csv.reader(out_csv.open()))[1:]])
    assert np.max(np.abs(rows[:, 1] - rows[:, 0] - (rows[0, 1] - rows[0, 0]))) < 1e-12


def test_fingerprint_unknown_component(tmp_path, capsys):
    code, _, err = run(capsys, "fingerprint", write(tmp_path, REFERENCE), "--level", "9", "--component", "0")
    assert code == 2 and "no component" in err


def test_verify_reference(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", write(tmp_path, REFERENCE), "--no-timings")
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and rep["failures"] == []
    kinds = {c["check"] for c in rep["checks"]}
    assert {"census", "homeomorphism", "closed_form_fingerprint", "ring_functional_equation"} <= kinds


def test_verify_symmetric_three_poles(tmp_path, capsys):
    doc = {"poles": [[math.cos(2 * math.pi * k / 3), math.sin(2 * math.pi * k / 3)] for k in range(3)],
           "weights": [1, 1, 1], "levels": [0.5, 2.0]}
    code, out, _ = run(capsys, "verify", write(tmp_path, doc))
    rep = json.loads(out)
    assert code == 0 and rep["connected"] is True


def test_verify_zero_weight_exit_two(tmp_path, capsys):
    doc = {"poles": [[0, 0], [1, 0]], "weights": [1, 0], "levels": [1]}
    assert run(capsys, "verify", write(tmp_path, doc))[0] == 2
