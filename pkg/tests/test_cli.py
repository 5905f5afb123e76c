import json
import math
from pathlib import Path

import pytest

from rwalk import parse_walk_spec
from rwalk.cli import main

from conftest import FIXTURES

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "src" / "rwalk"
     / "report_schema.json").read_text())


# --- minimal JSON-schema checker (type/properties/required/items/enum) ----

def _type_ok(value, tname):
    if tname == "object":
        return isinstance(value, dict)
    if tname == "array":
        return isinstance(value, list)
    if tname == "string":
        return isinstance(value, str)
    if tname == "boolean":
        return isinstance(value, bool)
    if tname == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if tname == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if tname == "null":
        return value is None
    raise AssertionError(f"unknown schema type {tname}")


def check_schema(value, schema, path="$"):
    t = schema.get("type")
    if t is not None:
        names = t if isinstance(t, list) else [t]
        assert any(_type_ok(value, n) for n in names), \
            f"{path}: {value!r} not of type {t}"
    if "enum" in schema:
        assert value in schema["enum"], f"{path}: {value!r} not in enum"
    if isinstance(value, float):
        assert math.isfinite(value), f"{path}: non-finite number"
    if isinstance(value, dict):
        for key in schema.get("required", []):
            assert key in value, f"{path}: missing required {key!r}"
        for key, sub in schema.get("properties", {}).items():
            if key in value:
                check_schema(value[key], sub, f"{path}.{key}")
        if not schema.get("properties"):
            for key, v in value.items():
                if isinstance(v, float):
                    assert math.isfinite(v), f"{path}.{key}: non-finite"
    if isinstance(value, list) and "items" in schema:
        for i, item in enumerate(value):
            check_schema(item, schema["items"], f"{path}[{i}]")


def fixture(name):
    return str(FIXTURES / name)


def test_analyze_bernoulli(capsys, tmp_path):
    out = tmp_path / "report.json"
    code = main(["analyze", fixture("bernoulli_025.spec"), "--json", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "theta*" in text and "rho" in text
    report = json.loads(out.read_text())
    check_schema(report, SCHEMA)
    assert report["spectral"]["theta"][0] == pytest.approx(0.5493061443, abs=1e-8)
    assert report["spectral"]["rho"] == pytest.approx(0.8660254038, abs=1e-9)
    assert report["spectral"]["R"] == pytest.approx(1.1547005384, abs=1e-9)
    assert report["exit_code"] == 0


def test_analyze_one_sided_exits_2(capsys):
    code = main(["analyze", fixture("one_sided.spec")])
    assert code == 2
    assert "half-space" in capsys.readouterr().err


def test_analyze_even_steps_exits_2(capsys):
    code = main(["analyze", fixture("even_steps.spec")])
    assert code == 2
    assert "index 2" in capsys.readouterr().err


def test_parse_error_exits_1(capsys):
    code = main(["analyze", fixture("bad_sum.spec")])
    assert code == 1
    assert "law block" in capsys.readouterr().err


def test_missing_file_exits_1(capsys, tmp_path):
    assert main(["analyze", str(tmp_path / "nope.spec")]) == 1


def test_usage_error_exits_1(capsys):
    assert main(["frobnicate"]) == 1
    assert main([]) == 1


def test_tilt_bernoulli_roundtrip(capsys, tmp_path):
    out = tmp_path / "tilted.spec"
    code = main(["tilt", fixture("bernoulli_025.spec"), "-o", str(out)])
    assert code == 0
    tilted = parse_walk_spec(out.read_text())
    assert tilted.law.atoms[(1,)] == pytest.approx(0.5, abs=1e-10)
    assert tilted.law.atoms[(-1,)] == pytest.approx(0.5, abs=1e-10)
    # re-analyzing the emitted walk sits at the spectral minimum
    report = tmp_path / "re.json"
    assert main(["analyze", str(out), "--json", str(report)]) == 0
    again = json.loads(report.read_text())
    assert abs(again["spectral"]["theta"][0]) <= 1e-8
    assert again["spectral"]["R"] == pytest.approx(1.0, abs=1e-8)


def test_tilt_symmetric_unchanged(tmp_path):
    out = tmp_path / "tilted.spec"
    assert main(["tilt", fixture("symmetric.spec"), "-o", str(out)]) == 0
    spec = parse_walk_spec((FIXTURES / "symmetric.spec").read_text())
    tilted = parse_walk_spec(out.read_text())
    assert tilted.law.atoms == spec.law.atoms


def test_tilt_lazy_drift_oracle_atoms(tmp_path):
    out = tmp_path / "tilted.spec"
    assert main(["tilt", fixture("lazy_drift.spec"), "-o", str(out)]) == 0
    tilted = parse_walk_spec(out.read_text())
    R = 1.0 / (0.5 + 2.0 * math.sqrt(0.06))
    assert tilted.law.atoms[(0,)] == pytest.approx(R * 0.5, abs=1e-10)
    assert tilted.law.atoms[(1,)] == pytest.approx(
        R * math.sqrt(2.0 / 3.0) * 0.3, abs=1e-10)
    assert tilted.law.atoms[(1,)] == pytest.approx(tilted.law.atoms[(-1,)], abs=1e-12)


def test_verify_all_checks_pass(capsys, tmp_path):
    out = tmp_path / "verify.json"
    code = main(["verify", fixture("bernoulli_025.spec"), "--json", str(out)])
    text = capsys.readouterr().out
    assert code == 0
    assert text.count("PASS") == 6
    assert "FAIL" not in text
    report = json.loads(out.read_text())
    check_schema(report, SCHEMA)
    assert [c["name"] for c in report["checks"]] == \
        ["eq1", "eq17", "dual", "measure", "eq12", "corollary2"]
    assert all(c["passed"] for c in report["checks"])


def test_verify_subset_selection(capsys):
    code = main(["verify", fixture("bernoulli_025.spec"),
                 "--paper-checks", "eq17,dual"])
    text = capsys.readouterr().out
    assert code == 0
    assert text.count("PASS") == 2
    assert text.splitlines()[0].startswith("eq17")


def test_verify_unknown_check_name(capsys):
    assert main(["verify", fixture("bernoulli_025.spec"),
                 "--paper-checks", "eq99"]) == 1


def test_verify_impossible_tolerance_exits_3(capsys):
    code = main(["verify", fixture("bernoulli_025.spec"),
                 "--paper-checks", "eq1", "--max-residual", "0"])
    assert code == 3
    assert "FAIL" in capsys.readouterr().out


def test_verify_check_errors_are_reported_not_fatal(capsys, tmp_path):
    # a window too small to shrink makes eq1 error out; eq12 builds its own
    # window and must still run and pass, with exit 3 overall
    text = ((FIXTURES / "bernoulli_025.spec").read_text()
            .replace("seed 42", "seed 42\n  window_radius 0"))
    spec = tmp_path / "walk.spec"
    spec.write_text(text)
    code = main(["verify", str(spec), "--paper-checks", "eq1,eq12"])
    out = capsys.readouterr().out
    assert code == 3
    assert "eq1" in out and "ERROR" in out
    assert "eq12" in out and "PASS" in out


def test_analyze_json_to_stdout(capsys):
    code = main(["analyze", fixture("bernoulli_025.spec"), "--json", "-"])
    assert code == 0
    out = capsys.readouterr().out
    report = json.loads(out[out.index("{"):])
    check_schema(report, SCHEMA)


def test_verify_symmetric_corollary(capsys):
    code = main(["verify", fixture("symmetric.spec"),
                 "--paper-checks", "corollary2"])
    text = capsys.readouterr().out
    assert code == 0
    assert "PASS" in text and "|R-1|" in text


def test_verify_finite_group(capsys):
    assert main(["verify", fixture("z6.spec")]) == 0
    assert capsys.readouterr().out.count("PASS") == 6


def test_verify_3d_translation_invariance(capsys):
    code = main(["verify", fixture("sym3d.spec"), "--paper-checks", "eq12"])
    assert code == 0
    assert "PASS" in capsys.readouterr().out


def test_simulate_report_and_determinism(capsys, tmp_path):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    args = ["simulate", fixture("bernoulli_025.spec"), "--trajectories", "300",
            "--horizon", "300", "--seed", "9", "--series-horizon", "600"]
    assert main(args + ["--json", str(out1)]) == 0
    assert main(args + ["--json", str(out2)]) == 0
    a = json.loads(out1.read_text())
    b = json.loads(out2.read_text())
    check_schema(a, SCHEMA)
    assert a["recurrence"]["mc"]["return_fraction"] == \
        b["recurrence"]["mc"]["return_fraction"]
    assert a["recurrence"]["mc"]["seed"] == 9
    assert a["recurrence"]["verdict"] in \
        ("RRecurrentHeuristic", "TransientHeuristic", "Inconclusive")


def test_simulate_zero_trajectories_rejected(capsys):
    assert main(["simulate", fixture("bernoulli_025.spec"),
                 "--trajectories", "0"]) == 1


def test_simulate_csv_columns(tmp_path):
    csv = tmp_path / "series.csv"
    assert main(["simulate", fixture("bernoulli_025.spec"),
                 "--trajectories", "50", "--horizon", "50",
                 "--series-horizon", "200", "--csv", str(csv)]) == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "n,p_n,weighted_term,partial_sum"
    assert len(lines) == 202
    row = lines[3].split(",")  # n = 2
    assert int(row[0]) == 2
    assert float(row[1]) == pytest.approx(0.375, abs=1e-15)
    # partial sums never decrease
    sums = [float(l.split(",")[3]) for l in lines[1:]]
    assert all(b >= a for a, b in zip(sums, sums[1:]))


def test_simulate_thread_env_does_not_change_results(tmp_path, monkeypatch):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    args = ["simulate", fixture("bernoulli_025.spec"), "--trajectories", "600",
            "--horizon", "100", "--seed", "4", "--series-horizon", "600"]
    monkeypatch.setenv("RWALK_THREADS", "1")
    assert main(args + ["--json", str(out1)]) == 0
    monkeypatch.setenv("RWALK_THREADS", "4")
    assert main(args + ["--json", str(out2)]) == 0
    a = json.loads(out1.read_text())["recurrence"]["mc"]
    b = json.loads(out2.read_text())["recurrence"]["mc"]
    assert a["return_fraction"] == b["return_fraction"]
    assert a.get("mean_displacement") == b.get("mean_displacement")


def test_simulate_target_flag(capsys):
    code = main(["simulate", fixture("z6.spec"), "--trajectories", "100",
                 "--horizon", "60", "--seed", "2", "--target", "0;3"])
    assert code == 0
    assert "return_fraction" in capsys.readouterr().out


def test_simulate_threshold_options_flow_through(tmp_path):
    # the 3-D walk reads TransientHeuristic under default thresholds
    # (growth ~1.04); absurdly low thresholds must flip the verdict and be
    # echoed in the report
    text = (FIXTURES / "sym3d.spec").read_text() + \
        "\noptions\ngrowth_recurrent 1.0001\ngrowth_transient 1.00001\n"
    spec = tmp_path / "walk.spec"
    spec.write_text(text)
    out = tmp_path / "report.json"
    assert main(["simulate", str(spec), "--trajectories", "50", "--horizon",
                 "50", "--json", str(out)]) == 0
    report = json.loads(out.read_text())
    rec = report["recurrence"]
    assert rec["thresholds"] == {"recurrent": 1.0001, "transient": 1.00001}
    assert rec["verdict"] == "RRecurrentHeuristic"
