import csv
import io
import json
import xml.etree.ElementTree as ET

import pytest

from cigarlab import cli


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_verify_soliton(tmp_path):
    code, out, _ = run("verify-soliton", "--rho", "0", "--t", "0", "--output-dir", str(tmp_path))
    assert code == cli.EXIT_OK
    rows = list(csv.DictReader((tmp_path / "soliton_residuals.csv").open()))
    assert len(rows) == 25 and max(float(r["frobenius"]) for r in rows) < 1e-6
    summary = json.loads((tmp_path / "soliton_summary.json").read_text())
    assert summary["seed"] == cli.DEFAULT_SEED and summary["version"] == "1.0"
    assert json.loads(out)["passed"]


def test_classify_rotation(tmp_path):
    code, out, _ = run("classify-field", "--name", "rotation", "--output-dir", str(tmp_path))
    assert code == 0
    assert json.loads((tmp_path / "classification.json").read_text())["class"] == "killing"


def test_classify_with_params_and_expectation(tmp_path):
    code, _, _ = run("classify-field", "--name", "radial_mk", "--param", "A=1", "--param", "B=1",
                     "--expect", "mixed_killing", "--output-dir", str(tmp_path))
    assert code == 0
    code, _, err = run("classify-field", "--name", "radial_mk", "--param", "A=1", "--param", "B=1",
                       "--expect", "killing", "--output-dir", str(tmp_path))
    assert code == cli.EXIT_CHECK_FAILED
    assert json.loads(err)["failures"][0]["got"] == "mixed_killing"


def test_geodesic(tmp_path):
    code, _, _ = run("geodesic", "--k", "1", "--ell", "0.6", "--span", "-5", "5", "--output-dir", str(tmp_path))
    assert code == 0
    summary = json.loads((tmp_path / "geodesic_summary.json").read_text())
    assert summary["turning_point"]["s_min"] == pytest.approx(0.693147, abs=1e-6)
    assert not summary["failed"]
    root = ET.parse(tmp_path / "geodesic_trace.svg").getroot()
    assert len(root.findall("{http://www.w3.org/2000/svg}path")) == 1
    assert (tmp_path / "geodesic_trace.csv").read_text().startswith("sigma,s,theta")


def test_other_commands(tmp_path):
    assert run("curvature-profile", "--output-dir", str(tmp_path))[0] == 0
    assert json.loads((tmp_path / "curvature_profile.json").read_text())["matched"] == "2E/(E+r^2)"
    assert run("rank-check", "--output-dir", str(tmp_path))[0] == 0
    assert run("rigidity-ode", "--A", "4", "--output-dir", str(tmp_path))[0] == 0


def test_usage_errors(tmp_path):
    assert run("no-such-command")[0] == cli.EXIT_USAGE
    assert run("classify-field", "--name", "nope", "--output-dir", str(tmp_path))[0] == cli.EXIT_USAGE
    assert run("geodesic", "--k", "0.36", "--ell", "0.6", "--output-dir", str(tmp_path))[0] == cli.EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"command": "geodesic", "colour": "red"}))
    assert run("geodesic", "--config", str(bad))[0] == cli.EXIT_USAGE


def test_runtime_error_has_its_own_status(tmp_path):
    code, _, err = run("geodesic", "--k", "1", "--ell", "0.6", "--s0", "0.1", "--output-dir", str(tmp_path))
    assert code == cli.EXIT_RUNTIME and json.loads(err)["status"] == "runtime_error"


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "command": "classify-field",
        "field": {"name": "mixed_mk", "A": 1.0, "B": 1.0, "C": 0.5},
        "sample": {"kind": "grid", "count": 16, "seed": 7},
        "output": {"dir": str(tmp_path / "from_config"), "format": ["json"]},
    }))
    assert run("classify-field", "--config", str(cfg))[0] == 0
    doc = json.loads((tmp_path / "from_config" / "classification.json").read_text())
    assert doc["class"] == "mixed_killing" and doc["seed"] == 7 and doc["sample"]["count"] == 16
    assert run("classify-field", "--config", str(cfg), "--seed", "9", "--output-dir", str(tmp_path / "flag"))[0] == 0
    assert json.loads((tmp_path / "flag" / "classification.json").read_text())["seed"] == 9


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    assert run("rigidity-ode")[0] == 0
    assert (tmp_path / "env" / "rigidity_summary.json").exists()


def test_identical_configs_give_identical_bytes(tmp_path):
    for d in ("a", "b"):
        assert run("geodesic", "--k", "2", "--ell", "0.5", "--output-dir", str(tmp_path / d))[0] == 0
        assert run("verify-soliton", "--rho", "0.25", "--t", "0.2", "--output-dir", str(tmp_path / d))[0] == 0
    for name in ("geodesic_trace.csv", "geodesic_trace.svg", "geodesic_summary.json", "soliton_residuals.csv", "soliton_summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_full_suite_with_injected_fault(tmp_path):
    code, out, err = run("full-suite", "--json", "--no-repro", "--inject-fault", "christoffel_sign", "--output-dir", str(tmp_path))
    assert code == cli.EXIT_CHECK_FAILED
    doc = json.loads(out)
    failed = {c["id"] for c in doc["checks"] if not c["passed"]}
    assert 1 in failed and 8 not in failed and 10 not in failed
    assert doc["faults"] == ["christoffel_sign"]
    assert json.loads(err)["status"] == "check_failed"


def test_full_suite_table(tmp_path):
    code, out, _ = run("full-suite", "--no-repro", "--output-dir", str(tmp_path))
    assert code == 0
    assert out.count("[PASS]") == 10 and "10/10 checks passed" in out
