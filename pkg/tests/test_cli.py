import json
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from soliton_lab import cli

SHIPPED = Path(__file__).resolve().parents[1] / "descriptors"
SCHEMA = json.loads(resources.files("soliton_lab").joinpath("schema/report.schema.json").read_text())


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_passing_target(capsys):
    code, out, _ = run(capsys, "verify", "hypercylinder?k=2&n=3", "--samples", "16")
    assert code == 0
    assert "overall: PASS" in out


def test_verify_json_validates(capsys):
    code, out, _ = run(capsys, "verify", "cone?n=2&m=3", "--samples", "8", "--format", "json")
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert code == 0 and report["pass"]
    names = {c["name"] for c in report["checks"]}
    assert {"soliton_criterion", "gauss_equation", "nonexistence_steady_expanding"} <= names


def test_suite_json_validates_and_is_deterministic(capsys, monkeypatch):
    code, first, _ = run(capsys, "suite", "--samples", "8", "--format", "json")
    assert code == 0
    report = json.loads(first)
    jsonschema.validate(report, SCHEMA)
    assert report["suite"] and report["pass"]
    assert all(row["pass"] for row in report["sections"]["controls"])
    monkeypatch.setenv("SOLITON_LAB_THREADS", "3")
    _, second, _ = run(capsys, "suite", "--samples", "8", "--format", "json")
    assert first == second


def test_suite_only_filter(capsys):
    code, out, _ = run(capsys, "suite", "--only", "hypersphere", "--samples", "8",
                       "--format", "json")
    report = json.loads(out)
    assert code == 0
    assert [t["target"] for t in report["targets"]] == ["hypersphere?n=2&r=1",
                                                        "hypersphere?n=3&r=2"]


@pytest.mark.parametrize("name,code", [("cone-over-sphere", 0), ("sine-warped", 1),
                                       ("paraboloid", 1)])
def test_shipped_descriptors(capsys, name, code):
    assert run(capsys, "verify", str(SHIPPED / f"{name}.manifold"), "--samples", "8")[0] == code


def test_tolerance_induced_failures_are_marked(capsys):
    code, out, _ = run(capsys, "verify", "hypersphere?n=2&r=1", "--samples", "8",
                       "--tol", "1e-15", "--format", "json")
    report = json.loads(out)
    assert code == 1
    marked = [c for c in report["checks"] if not c["pass"]]
    assert marked and all(c.get("note") == "tolerance-induced" for c in marked)


def test_named_tolerance_override(capsys):
    _, out, _ = run(capsys, "verify", "hypersphere?n=2&r=1", "--samples", "8",
                    "--tol", "gauss_equation=0.5", "--format", "json")
    gauss = next(c for c in json.loads(out)["checks"] if c["name"] == "gauss_equation")
    assert gauss["tolerance"] == 0.5


@pytest.mark.parametrize("argv", [
    ["verify", "nosuch"],
    ["verify", "hypercylinder?k=1&n=3"],
    ["verify", "missing-file.manifold"],
    ["verify", "euclidean?n=2", "--tol", "nosuch=1e-3"],
    ["verify", "euclidean?n=2", "--tol", "abc"],
    ["verify", "euclidean?n=2", "--tol", "-1"],
    ["verify", "euclidean?n=2", "--margin", "0.7"],
    ["verify", "euclidean?n=2", "--samples", "0"],
    ["suite", "--only", "zzz"],
    ["frobnicate"],
])
def test_input_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_bad_descriptor_reports_location(capsys, tmp_path):
    path = tmp_path / "bad.manifold"
    path.write_text("[manifold]\nkind = metric\ncoords = x\nbox = x: 0 .. 1\n"
                    "[metric]\nrow1 = 1 +\n[potential]\ncomponents = x\n[soliton]\nlambda = 1\n")
    code, _, err = run(capsys, "verify", str(path))
    assert code == 2
    assert f"{path}:6:" in err


def test_internal_error_exit_3(capsys, monkeypatch):
    from soliton_lab import verify

    def boom(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(verify, "run_verify", boom)
    assert run(capsys, "verify", "euclidean?n=2")[0] == 3


def test_out_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "verify", "euclidean?n=2", "--samples", "4",
                          "--format", "json", "--out", str(out))
    assert code == 0 and stdout == ""
    jsonschema.validate(json.loads(out.read_text()), SCHEMA)


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    assert "hypercylinder?k=2&n=3" in out and "checks:" in out
