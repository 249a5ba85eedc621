"""End-to-end runs of the command line interface.

Everything goes through ``main(argv)`` in process, so exit codes, stdout
JSON, CSV bytes, and stderr error payloads are all checked exactly as a
shell user would see them.
"""

import io
import json
import sys
import xml.etree.ElementTree as ET

import pytest

from replicator4 import __version__
from replicator4.cli import main

M_I_TEXT = "0 1 1 -2 / -1 0 1 -1 / -1 -1 0 1 / 2 1 -1 0"
M_IV_TEXT = "0 0 0 0 / 0 0 -1 1 / 0 1 0 -1 / 0 -1 1 0"
M_V_TEXT = "0 0 1 -1 / 0 0 -1 1 / -1 1 0 0 / 1 -1 0 0"
# same sign pattern as M_V but a24 = 2, so pf = -1 and K is empty
M_V_BUMPED = "0 0 1 -1 / 0 0 -1 2 / -1 1 0 0 / 1 -2 0 0"


def run(argv, capsys):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def matrix_file(tmp_path, text, name="A.txt"):
    path = tmp_path / name
    path.write_text(text + "\n", encoding="utf-8")
    return str(path)


def test_classify_reports_class_and_permanence(tmp_path, capsys):
    code, out, err = run(
        ["classify", "--matrix", matrix_file(tmp_path, M_IV_TEXT)], capsys)
    assert code == 0
    assert err == ""
    doc = json.loads(out)
    assert doc["class"] == "IV"
    assert doc["permanent"] is True
    assert doc["pfaffian"] == "0"
    assert doc["relabeling"] == [1, 2, 3, 4]
    assert doc["edges"] == [[2, 4], [3, 2], [4, 3]]
    assert "reason" not in doc


def test_classify_flags_nonsingular_matrix(tmp_path, capsys):
    code, out, _ = run(
        ["classify", "--matrix", matrix_file(tmp_path, M_V_BUMPED)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["class"] == "V"
    assert doc["permanent"] is False
    assert doc["reason"] == "det_nonzero"
    assert doc["pfaffian"] == "-1"


def test_classify_reads_matrix_from_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(M_IV_TEXT))
    code, out, _ = run(["classify", "--matrix", "-"], capsys)
    assert code == 0
    assert json.loads(out)["class"] == "IV"


def test_classify_float_flag_downgrades_pfaffian(tmp_path, capsys):
    code, out, _ = run(
        ["classify", "--float",
         "--matrix", matrix_file(tmp_path, M_IV_TEXT)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert isinstance(doc["pfaffian"], float)
    assert doc["pfaffian"] == 0.0
    assert doc["permanent"] is True


def test_kernel_exact_endpoints_for_MV(tmp_path, capsys):
    code, out, _ = run(
        ["kernel", "--matrix", matrix_file(tmp_path, M_V_TEXT)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["class"] == "V"
    assert doc["K_nonempty"] is True
    assert doc["arithmetic"] == "exact"
    a, b = doc["endpoints"]
    assert a["x"] == ["1/2", "1/2", 0, 0]
    assert a["locus"] == {"edge": [1, 2]}
    assert b["x"] == [0, 0, "1/2", "1/2"]
    assert b["locus"] == {"edge": [3, 4]}


def test_kernel_float_flag_matches_exact(tmp_path, capsys):
    path = matrix_file(tmp_path, M_V_TEXT)
    code, out, _ = run(["kernel", "--float", "--matrix", path], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["arithmetic"] == "float"
    a, b = doc["endpoints"]
    for got, want in zip(a["x"] + b["x"],
                         [0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5]):
        assert got == pytest.approx(want, abs=1e-10)


def test_kernel_rejects_nonsingular_matrix(tmp_path, capsys):
    code, out, err = run(
        ["kernel", "--matrix", matrix_file(tmp_path, M_V_BUMPED)], capsys)
    assert code == 1
    assert out == ""
    payload = json.loads(err)
    assert payload["error"]["type"] == "PreconditionFailed"


def test_simulate_writes_csv_and_drift_sidecar(tmp_path, capsys):
    out_path = tmp_path / "traj.csv"
    code, _, err = run(
        ["simulate", "--matrix", matrix_file(tmp_path, M_IV_TEXT),
         "--x0", "0.4,0.3,0.2,0.1", "--t-end", "1.0", "--dt", "0.5",
         "--out", str(out_path)], capsys)
    assert code == 0
    assert err == ""
    lines = out_path.read_text().splitlines()
    assert lines[0] == "t,x1,x2,x3,x4"
    assert len(lines) == 4
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    assert rows[0] == pytest.approx([0.0, 0.4, 0.3, 0.2, 0.1], abs=1e-12)
    assert rows[-1][0] == 1.0
    for row in rows:
        assert sum(row[1:]) == pytest.approx(1.0, abs=1e-9)
        assert min(row[1:]) > 0.0
    sidecar = json.loads((tmp_path / "traj.csv.drift.json").read_text())
    assert sidecar["config"]["seed"] is None
    assert sidecar["config"]["dt"] == 0.5
    assert sidecar["naccept"] >= 1
    assert max(sidecar["drift"].values()) <= sidecar["drift_budget"]


def test_simulate_seed_precedence_and_determinism(tmp_path, monkeypatch,
                                                  capsys):
    matrix = matrix_file(tmp_path, M_IV_TEXT)

    def csv_bytes(name, *extra):
        out = tmp_path / name
        code, _, _ = run(
            ["simulate", "--matrix", matrix, "--t-end", "2.0",
             "--dt", "0.5", "--out", str(out), *extra], capsys)
        assert code == 0
        sidecar = json.loads((tmp_path / (name + ".drift.json")).read_text())
        return out.read_bytes(), sidecar["config"]["seed"]

    monkeypatch.delenv("REPLICATOR4_SEED", raising=False)
    first, seed = csv_bytes("a.csv", "--seed", "3")
    again, _ = csv_bytes("b.csv", "--seed", "3")
    assert first == again
    assert seed == 3

    monkeypatch.setenv("REPLICATOR4_SEED", "3")
    from_env, env_seed = csv_bytes("c.csv")
    assert from_env == first
    assert env_seed == 3

    explicit, cli_seed = csv_bytes("d.csv", "--seed", "4")
    assert cli_seed == 4
    assert explicit != first


def test_orbit_command_certifies_MIV(tmp_path, capsys):
    code, out, _ = run(
        ["orbit", "--matrix", matrix_file(tmp_path, M_IV_TEXT),
         "--x0", "0.4,0.3,0.2,0.1", "--skip-stability"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["period"] == pytest.approx(19.315607, abs=1e-3)
    assert doc["closure_residual"] <= 1e-6
    assert doc["avg_distance_to_K"] <= 1e-4
    assert max(doc["phi_drift"].values()) <= 1e-8
    assert doc["stability"] is None
    refs = doc["reference_points"]
    assert refs["z1"] == pytest.approx([0.5, 1 / 6, 1 / 6, 1 / 6])
    assert refs["margin"] > 1e-8


def test_boundary_command_scores_every_region(tmp_path, capsys):
    code, out, err = run(
        ["boundary", "--matrix", matrix_file(tmp_path, M_IV_TEXT),
         "--samples", "1", "--t-end", "60"], capsys)
    assert code == 0
    assert err == ""
    doc = json.loads(out)
    assert doc["passed"] is True
    regions = doc["regions"]
    assert len(regions) == 10
    assert {k.split(":")[0] for k in regions} == {"edge", "face"}
    assert all(r["status"] in ("pass", "measured")
               for r in regions.values())


def test_verify_command_for_permanent_matrix(tmp_path, capsys):
    code, out, _ = run(
        ["verify", "--matrix", matrix_file(tmp_path, M_IV_TEXT)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    statuses = {k: v["status"] for k, v in doc["checks"].items()}
    assert statuses == {
        "pfaffian_vs_determinant": "pass",
        "classification": "pass",
        "kernel_section": "pass",
        "orbit": "pass",
        "stability": "pass",
        "boundary": "pass",
    }


def test_verify_command_skips_orbit_without_kernel(tmp_path, capsys):
    code, out, _ = run(
        ["verify", "--matrix", matrix_file(tmp_path, M_V_BUMPED)], capsys)
    assert code == 0
    doc = json.loads(out)
    checks = doc["checks"]
    assert checks["classification"]["class"] == "V"
    for name in ("kernel_section", "orbit", "stability"):
        assert checks[name]["status"] == "skipped"


def test_portrait_renders_deterministic_svg(tmp_path, capsys):
    matrix = matrix_file(tmp_path, M_I_TEXT)
    argv = ["portrait", "--matrix", matrix, "--starts", "2",
            "--t-end", "5", "--dt", "0.1"]
    out1 = tmp_path / "p1.svg"
    out2 = tmp_path / "p2.svg"
    assert run(argv + ["--out", str(out1)], capsys)[0] == 0
    assert run(argv + ["--out", str(out2)], capsys)[0] == 0
    assert out1.read_bytes() == out2.read_bytes()
    root = ET.fromstring(out1.read_text())
    assert root.tag.endswith("svg")
    polylines = [el for el in root.iter()
                 if el.tag.endswith(("polyline", "path"))]
    assert len(polylines) >= 2


def test_missing_matrix_file_exits_one(tmp_path, capsys):
    code, out, err = run(
        ["classify", "--matrix", str(tmp_path / "nope.txt")], capsys)
    assert code == 1
    assert out == ""
    payload = json.loads(err)
    assert payload["error"]["type"] == "FileNotFoundError"


def test_malformed_matrix_exits_one(tmp_path, capsys):
    code, _, err = run(
        ["classify", "--matrix", matrix_file(tmp_path, "1 2 3")], capsys)
    assert code == 1
    assert json.loads(err)["error"]["type"] == "MatrixFormatError"


def test_argument_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["classify"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out
