import io
import json
import subprocess
import sys

import numpy as np
import pytest

from evochain.cli import dumps, run
from evochain.registry import discrepancy_registry
from evochain.scan import Diagram, grid_scan
from presets import CONTROLLERS, preset


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def spec_file(tmp_path):
    def write(spec_or_dict, name="spec.json"):
        d = spec_or_dict if isinstance(spec_or_dict, dict) else spec_or_dict.to_dict()
        path = tmp_path / name
        path.write_text(json.dumps(d), encoding="utf-8")
        return str(path)

    return write


def error_line(err):
    lines = err.splitlines()
    assert len(lines) == 1
    obj = json.loads(lines[0])
    assert set(obj) == {"error", "detail"}
    return obj


def test_classify_family16(spec_file):
    code, out, _ = call("classify", "--spec", spec_file(preset(16)), "--s", 0.2, "--t", 1.1)
    assert code == 0
    d = json.loads(out)
    assert d["baric"]["status"] == "Baric" and d["baric"]["i0"] == 2


def test_classify_family0(spec_file):
    code, out, _ = call("classify", "--spec", spec_file({"family": 0}), "--s", 0, "--t", 0)
    assert code == 0
    d = json.loads(out)
    assert d["baric"]["status"] == "NotBaric"
    assert d["nilpotent"]["kind"] == "all"
    assert [(p["x"], p["y"]) for p in d["idempotents"]] == [(0, 0)]


def test_measure_family8(spec_file):
    code, out, _ = call("measure", "--spec", spec_file(preset(8)), "--property", "baric", "--tmax", 3,
                        "--samples", 100000, "--seed", 1)
    assert code == 0
    d = json.loads(out)
    assert abs(d["estimate"] - 0.5) <= 0.02
    assert set(d) == {"estimate", "stderr", "samples", "seed"}


def test_outputs_are_byte_identical(spec_file):
    path = spec_file(preset(17))
    for argv in (
        ("classify", "--spec", path, "--s", 0.3, "--t", 1.7),
        ("ck-check", "--spec", path, "--tmax", 5, "--trials", 200, "--seed", 4),
        ("measure", "--spec", path, "--property", "nilpotent", "--tmax", 3, "--samples", 5000, "--seed", 9),
        ("scan", "--spec", path, "--property", "baric", "--tmax", 3, "--grid", 8, "--format", "json"),
    ):
        assert call(*argv)[1] == call(*argv)[1]


def test_measure_independent_of_threads(spec_file):
    path = spec_file(preset(21))
    base = ("measure", "--spec", path, "--property", "baric", "--tmax", 3, "--samples", 70000, "--seed", 3)
    assert call(*base, "--threads", 1)[1] == call(*base, "--threads", 4)[1]


def test_scan_csv_round_trip(spec_file, tmp_path):
    spec = preset(8)
    out = tmp_path / "diagram.csv"
    code, stdout, _ = call("scan", "--spec", spec_file(spec), "--property", "idempotent", "--tmax", 3,
                           "--grid", 20, "--out", out)
    assert code == 0 and stdout == ""
    parsed = Diagram.from_csv(out.read_text(encoding="utf-8"), 3.0, "idempotent")
    assert np.array_equal(parsed.codes, grid_scan(spec, "idempotent", 3.0, 20).codes)


def test_families_lists_required_slots():
    code, out, _ = call("families")
    assert code == 0
    listed = {d["family"]: d["slots"] for d in json.loads(out)}
    assert set(listed) == set(range(25)) | {"markov2"}
    for fam, ctrl in CONTROLLERS.items():
        assert set(listed[fam]) == set(ctrl)


def test_discrepancies_lists_registry():
    code, out, _ = call("discrepancies")
    assert code == 0
    assert len(json.loads(out)) == len(discrepancy_registry())


def test_idempotents_and_trajectory(spec_file):
    path = spec_file(preset(9))
    code, out, _ = call("idempotents", "--spec", path, "--s", 0, "--t", 6.283185307179586)
    assert code == 0 and len(json.loads(out)["points"]) == 4
    code, out, _ = call("idempotents", "--spec", path, "--s", 0, "--t", 6.283185307179586, "--mode", "paper")
    assert code == 0 and len(json.loads(out)["points"]) == 3
    code, out, _ = call("trajectory", "--spec", spec_file(preset(8), "f8.json"), "--s", 0, "--t", 0.5,
                        "--x0", "0.5,2", "--steps", 3)
    assert code == 0
    assert json.loads(out)["points"] == [[0.5, 2], [0.25, 4], [0.0625, 16], [0.00390625, 256]]


def test_validate(spec_file):
    code, out, err = call("validate", "--spec", spec_file(preset(4)), "--tmax", 5)
    assert code == 0 and json.loads(out)["valid"]
    bad = {"family": 23, "controllers": {"theta": {"kind": "exp", "params": [1]}}, "lambda": 1, "mu": 1}
    code, out, err = call("validate", "--spec", spec_file(bad), "--tmax", 5)
    assert code == 2
    assert [v["kind"] for v in json.loads(out)["violations"]] == ["LambdaEqualsMu"]
    assert error_line(err)["error"] == "SpecError"


def test_spec_errors_exit_2(spec_file, tmp_path):
    code, _, err = call("classify", "--spec", spec_file({"family": 8, "a": 1, "b": 2, "x": 0}), "--s", 0, "--t", 1)
    assert code == 2 and error_line(err)["error"] == "SpecError"
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    code, _, err = call("classify", "--spec", broken, "--s", 0, "--t", 1)
    assert code == 2 and error_line(err)["error"] == "SpecError"


def test_domain_errors_exit_3(spec_file):
    code, _, err = call("classify", "--spec", spec_file(preset(8)), "--s", 2, "--t", 1)
    assert code == 3 and error_line(err)["error"] == "DomainError"
    code, _, err = call("classify", "--spec", spec_file(preset("markov2")), "--s", 0, "--t", 1, "--mode", "paper")
    assert code == 3 and error_line(err)["error"] == "UnsupportedFamily"


def test_usage_errors_exit_4(spec_file):
    path = spec_file(preset(8))
    for argv in (
        ("classify", "--spec", path, "--s", 0),
        ("frobnicate",),
        ("classify", "--spec", "/nonexistent/spec.json", "--s", 0, "--t", 1),
        ("trajectory", "--spec", path, "--s", 0, "--t", 1, "--x0", "1", "--steps", 2),
        ("measure", "--spec", path, "--property", "idempotent", "--tmax", 3, "--samples", 1000),
        ("measure", "--spec", path, "--property", "baric", "--tmax", 3, "--samples", 10),
        ("scan", "--spec", path, "--property", "baric", "--tmax", 3, "--grid", 1),
        ("scan", "--spec", path, "--property", "baric", "--tmax", 3, "--grid", 4, "--threads", 0),
    ):
        code, out, err = call(*argv)
        assert code == 4, argv
        assert out == ""
        assert error_line(err)["error"] == "UsageError"


def test_dumps_uses_17_significant_digits():
    assert dumps(0.1) == "0.10000000000000001"
    assert json.loads(dumps({"x": [0.1, 1e-300, 2.5]})) == {"x": [0.1, 1e-300, 2.5]}
    assert dumps(float("nan")) == "null"
    assert dumps(np.int64(3)) == "3"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "evochain", "families"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)[0]["family"] == 0
