import json

import pytest

from hsp.cli import main, parse_kv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_kv():
    assert parse_kv("m=1,k=2.5") == {"m": 1.0, "k": 2.5}
    assert parse_kv("f0=[1,2],m=3") == {"f0": [1.0, 2.0], "m": 3.0}


def test_help_lists_defaults(capsys):
    code, out, _ = run(capsys, "flow", "--help")
    assert code == 0
    assert "default: 1e-3" in out and "implicit_midpoint" in out


def test_group_check_passes(capsys):
    code, out, _ = run(capsys, "group-check", "--n", "2", "--seed", "42", "--samples", "200")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert all(s["max_residual"] <= 1e-11 for s in doc["suites"])
    assert doc["config"]["seed"] == 42


def test_group_check_fault_injection(capsys):
    code, out, _ = run(capsys, "group-check", "--samples", "10", "--perturb", "0.1")
    assert code == 1
    assert "closure" in json.loads(out)["failed_suites"]


@pytest.mark.parametrize("argv", [
    ["group-check", "--n", "0"],
    ["flow", "--hamiltonian", "nope"],
    ["flow", "--method", "euler"],
    ["flow", "--dt", "-1"],
    ["flow", "--params", "m=-1"],
    ["flow", "--params", "bogus=1"],
    ["flow", "--y0", "1,2,3"],
    ["transform", "--map", "twist"],
    ["noncommute", "--f", "1,0", "--v", "1"],
    ["nosuchcommand"],
])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "samples": 20}))
    code, out, _ = run(capsys, "group-check", "--config", str(cfg), "--seed", "9")
    doc = json.loads(out)
    assert code == 0
    assert doc["config"]["seed"] == 9 and doc["config"]["samples"] == 20


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seeed": 5}))
    code, _, err = run(capsys, "group-check", "--config", str(cfg))
    assert code == 2 and "seeed" in err


def test_flow_writes_csv(tmp_path, capsys):
    out_file = tmp_path / "traj.csv"
    code, out, _ = run(capsys, "flow", "--hamiltonian", "harmonic", "--dt", "1e-3",
                       "--t0", "0", "--t1", "10", "--out", str(out_file))
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0] == "t,p1,q1,e"
    assert len(lines) - 1 == 10001
    summary = json.loads(out)["summary"]
    assert summary["max_abs_delta_H"] <= 1e-8


def test_flow_json_is_deterministic(tmp_path, capsys):
    # same output path both times, since the path is echoed into the metadata
    p = tmp_path / "traj.json"
    blobs = []
    for _ in range(2):
        assert run(capsys, "flow", "--hamiltonian", "driven_oscillator", "--t1", "1",
                   "--format", "json", "--out", str(p))[0] == 0
        blobs.append(p.read_bytes())
    assert blobs[0] == blobs[1]
    doc = json.loads(p.read_text())
    assert doc["metadata"]["config"]["hamiltonian"] == "driven_oscillator"


def test_flow_gyration(capsys):
    code, out, _ = run(capsys, "flow", "--hamiltonian", "charged_uniform_B", "--t1", "6.3")
    gyr = json.loads(out)["summary"]["gyration"]
    assert code == 0 and gyr["passed"] and gyr["radius_rel_error"] <= 1e-4


def test_flow_verlet_on_nonseparable(capsys):
    code, _, err = run(capsys, "flow", "--hamiltonian", "charged_uniform_B", "--method", "stormer_verlet")
    assert code == 1 and "NonseparableError" in err


def test_verify_default_grid(tmp_path, capsys):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--out", str(report))
    assert code == 0
    reports = json.loads(report.read_text())
    names = {r["inputs"]["hamiltonian"] for r in reports}
    assert names == {"free", "harmonic", "linear_potential", "driven_oscillator", "charged_uniform_B"}
    assert all(r["passed"] for r in reports)


def test_verify_rk4_coarse_fails(capsys):
    code, out, _ = run(capsys, "verify", "--hamiltonian", "harmonic", "--method", "rk4",
                       "--dt", "0.1", "--t0", "0", "--t1", "50")
    assert code == 1
    assert json.loads(out)["summary"]["max_symplectic_residual"] > 1e-6


def test_verify_zero_horizon(capsys):
    code, _, _ = run(capsys, "verify", "--hamiltonian", "harmonic", "--t1", "0")
    assert code == 0


def test_verify_perturb(capsys):
    assert run(capsys, "verify", "--hamiltonian", "free", "--perturb", "0.1")[0] == 1


def test_verify_jobs_match_serial(tmp_path, capsys):
    p = tmp_path / "r.json"
    run(capsys, "verify", "--hamiltonian", "driven_oscillator", "--out", str(p))
    serial = p.read_bytes()
    run(capsys, "verify", "--hamiltonian", "driven_oscillator", "--jobs", "2", "--out", str(p))
    assert p.read_bytes() == serial


def test_noncommute(capsys):
    code, out, _ = run(capsys, "noncommute", "--f", "1,0", "--v", "1,0")
    assert code == 0
    assert "2|f.v| = 2" in out and "PASS" in out
    code, out, _ = run(capsys, "noncommute", "--f", "1,0", "--v", "0,1")
    assert code == 0 and "central discrepancy = +0" in out


def test_noncommute_json(tmp_path, capsys):
    p = tmp_path / "nc.json"
    run(capsys, "noncommute", "--f", "2", "--v", "3", "--out", str(p))
    doc = json.loads(p.read_text())
    assert abs(doc["central_discrepancy"]) == 12.0
    assert doc["force_then_boost"]["r"] == -6.0 and doc["boost_then_force"]["r"] == 6.0


def test_transform_scaling_free(capsys):
    code, out, _ = run(capsys, "transform", "--hamiltonian", "free", "--map", "scaling",
                       "--map-params", "lam=2")
    assert code == 0
    assert "0.125" in out  # p~ = 1: p~^2 / 8


def test_transform_identity_and_shear(capsys):
    code, out, _ = run(capsys, "transform", "--map", "identity")
    assert code == 0 and "= 0.000e+00" in out
    code, _, _ = run(capsys, "transform", "--hamiltonian", "harmonic", "--map", "shear")
    assert code == 0
