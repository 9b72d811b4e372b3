import io
import json
import subprocess
import sys

import pytest

from killingweb.cli import SCHEMA, run
from support import CM_POTENTIAL


def call(*argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        old, sys.stdin = sys.stdin, io.StringIO(stdin)
    try:
        code = run(list(argv), out, err)
    finally:
        if stdin is not None:
            sys.stdin = old
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_classify_named_parameters(tmp_path):
    path = write(tmp_path, "k.json", {"a1": 1, "a2": 1, "a3": 1, "c1": 2, "c2": 2, "c3": 5})
    code, out, _ = call("classify-kt", "--input", path)
    assert code == 0
    d = json.loads(out)
    assert d["schema"] == SCHEMA and d["web"] == "SPHERICAL"


def test_classify_block_form_from_stdin():
    data = {"a": [1, 2, 3], "alpha": [0, 0, 0], "b": [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
            "c": [0, 0, 0], "gamma": [0, 0, 0]}
    code, out, _ = call("classify-kt", "--input", "-", stdin=json.dumps(data))
    assert code == 0 and json.loads(out)["web"] == "CARTESIAN"


def test_non_ckt_is_a_domain_error(tmp_path):
    path = write(tmp_path, "k.json", {"a1": 1, "a2": 2, "a3": 3, "alpha1": 1, "b13": 1, "b33": -1})
    code, out, err = call("classify-kt", "--input", path)
    assert code == 1 and out == ""
    assert "TSN conditions violated" in err


@pytest.mark.parametrize("argv", [
    ("classify-kt",),
    ("classify-kt", "--input", "/nonexistent/k.json"),
    ("separable", "--potential", "1/(x-y"),
    ("separable", "--potential", "g/x"),
    ("separable", "--potential", "x", "--combo-range", "-1"),
    ("nonsense",),
])
def test_usage_errors(argv):
    code, _, _ = call(*argv)
    assert code == 2


def test_malformed_inputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call("classify-kt", "--input", str(bad))[0] == 2
    assert call("classify-kt", "--input", write(tmp_path, "k.json", {"q": 1}))[0] == 2
    assert call("invariants", "--kv", "--input", write(tmp_path, "v.json", {"a": [1, 0, 0]}))[0] == 2


def test_parse_error_reports_offset():
    code, _, err = call("separable", "--potential", "1/(x-y")
    assert code == 2 and "byte 6" in err


def test_invariants(tmp_path):
    code, out, _ = call("invariants", "--input", write(tmp_path, "k.json", {"c1": 1, "c2": 2, "c3": 3}))
    d = json.loads(out)
    assert code == 0 and len(d["delta"]["values"]) == 15 and len(d["xi"]["values"]) == 6
    code, out, _ = call("--format", "text", "invariants", "--kv",
                        "--input", write(tmp_path, "v.json", {"a": [0, 0, 2], "c": [0, 0, 3]}))
    assert code == 0 and out.splitlines() == ["D1 = 9", "D2 = 6"]


def test_canonical(tmp_path):
    path = write(tmp_path, "k.json", {"a1": 9, "a2": 9, "a3": 1, "b12": 4, "b21": -4,
                                      "c1": 2, "c2": 2, "c3": 5})
    code, out, _ = call("canonical", "--input", path, "--web", "spherical")
    d = json.loads(out)
    assert code == 0 and d["web"] == "SPHERICAL" and [float(v) for v in d["delta"]] == [0, 0, 2]
    code, _, err = call("canonical", "--input", path, "--web", "CARTESIAN")
    assert code == 1 and "CARTESIAN" in err
    assert call("canonical", "--input", path, "--web", "torus")[0] == 2


def test_webs_table():
    code, out, _ = call("webs")
    rows = json.loads(out)["webs"]
    assert code == 0 and len(rows) == 11
    assert {r["symmetry"] for r in rows} == {"translational", "rotational", "asymmetric"}
    code, out, _ = call("--format", "text", "webs")
    assert len(out.splitlines()) == 11


def test_separable_cm(tmp_path):
    charts = tmp_path / "charts"
    code, out, _ = call("separable", "--potential", CM_POTENTIAL, "--emit-charts", str(charts))
    d = json.loads(out)
    assert code == 0 and d["compatible_space"]["dimension"] == 5
    assert set(d["distinct_webs"]) == {"CIRCULAR_CYLINDRICAL", "SPHERICAL", "PROLATE_SPHEROIDAL",
                                       "OBLATE_SPHEROIDAL", "PARABOLIC"}
    files = sorted(charts.iterdir())
    assert len(files) == len(d["ckts"])
    first = json.loads(files[0].read_text())
    assert first["schema"] == SCHEMA and {"lambda", "delta", "essential"} <= set(first)


def test_separable_with_constants():
    code, out, _ = call("separable", "--potential", "k*(x^2 + y^2) + z^2", "--const", "k=2",
                        "--combo-range", "0")
    d = json.loads(out)
    assert code == 0 and d["constants"] == {"k": "2"} and d["combinations_tried"] == 0


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "killingweb.cli", "--format", "text", "webs"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[-1].startswith("ellipsoidal")
