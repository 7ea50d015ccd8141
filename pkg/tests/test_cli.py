import filecmp
import json
import math
import os
from pathlib import Path

import pytest

from riccilab.cli import main, trees_identical
from riccilab.config import (ScenarioConfig, build_config, config_hash,
                             load_config_file)
from riccilab.errors import ConfigError


def run_cli(*argv):
    return main(list(argv))


def test_catalog_lists_models(capsys):
    assert run_cli("catalog") == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) >= 8
    assert any(line.startswith("nil") for line in out)
    assert any("kappa=-1" in line for line in out)


def test_config_file_parsing(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "[scenario]\n"
        "geometry = sol\n"
        "initial_coeffs = 1, 2, 3\n"
        "[flow]\n"
        "t_end = 0.5\n"
        "tol = 1e-9\n"
        "[entropy]\n"
        "t_sequence = 0.1, 0.2\n")
    overrides = load_config_file(cfg_file)
    cfg = build_config(overrides)
    assert cfg.geometry == "sol"
    assert cfg.initial_coeffs == (1.0, 2.0, 3.0)
    assert cfg.t_end == 0.5
    assert cfg.t_sequence == (0.1, 0.2)
    # defaults untouched
    assert cfg.quadrature == ScenarioConfig().quadrature


def test_unknown_config_key_rejected(tmp_path):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("[scenario]\ngeometri = nil\n")
    with pytest.raises(ConfigError):
        load_config_file(cfg_file)


def test_flags_override_config(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("[flow]\nt_end = 0.5\n[scenario]\ngeometry = nil\n")
    out = tmp_path / "out"
    code = run_cli("flow", "--config", str(cfg_file), "--geometry", "euclidean",
                   "--t-end", "0.25", "--out", str(out))
    assert code == 0
    manifest = (out / "manifest.txt").read_text()
    assert "scenario.geometry: euclidean" in manifest
    assert "flow.t_end: 0.25" in manifest


def test_invalid_geometry_exits_one(tmp_path, capsys):
    code = run_cli("flow", "--geometry", "banana", "--out", str(tmp_path / "x"))
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_numerical_failure_exits_two(tmp_path, capsys):
    # 10 forced samples leave fewer than the classifier's minimum fit window
    code = run_cli("classify", "--geometry", "round-sphere", "--t-end", "1",
                   "--sample-count", "10", "--out", str(tmp_path / "x"))
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err


def test_flow_outputs_and_manifest(tmp_path):
    out = tmp_path / "sphere"
    code = run_cli("flow", "--geometry", "round-sphere", "--t-end", "1",
                   "--out", str(out))
    assert code == 0
    csv = out / "outputs" / "trajectory.csv"
    png = out / "outputs" / "trajectory.png"
    manifest = out / "manifest.txt"
    assert csv.exists() and png.exists() and manifest.exists()
    text = manifest.read_text()
    assert "termination_reason: curvature_cap" in text
    assert "config_hash: " in text
    assert "tool_version: " in text
    assert "wall_time_s: " in text
    T = [line.split(": ")[1] for line in text.splitlines()
         if line.startswith("singular_time_estimate")][0]
    assert abs(float(T) - 0.25) < 1e-6

    header, first = csv.read_text().splitlines()[:2]
    assert header == "t,A,B,C,R,rm_norm,K23,K31,K12"
    cells = first.split(",")
    assert float(cells[1]) == 1.0
    # 17 significant digits round-trip doubles exactly
    row2 = csv.read_text().splitlines()[2].split(",")
    assert float(row2[1]) == float(f"{float(row2[1]):.17g}")


def test_volume_profile_csv(tmp_path):
    out = tmp_path / "vol"
    code = run_cli("volume", "--geometry", "euclidean", "--r-min", "0.5",
                   "--r-max", "2.0", "--r-count", "4",
                   "--quadrature", "lebedev26", "--out", str(out))
    assert code == 0
    lines = (out / "outputs" / "profile.csv").read_text().splitlines()
    assert lines[0] == "r,vol_ball,area_sphere,conjugate_flag"
    assert len(lines) == 5
    r, vol, area, flag = lines[-1].split(",")
    assert float(vol) == pytest.approx(4 * math.pi / 3 * 8.0, rel=1e-9)
    assert flag == "0"


def test_entropy_command(tmp_path):
    out = tmp_path / "ent"
    code = run_cli("entropy", "--geometry", "hyperbolic", "--t-end", "2.5",
                   "--window-lo", "6", "--window-hi", "10",
                   "--t-sequence", "0,0.5,2", "--out", str(out))
    assert code == 0
    lines = (out / "outputs" / "entropy.csv").read_text().splitlines()
    assert lines[0] == "t,h,stderr,window_lo,window_hi,collapse_proxy"
    hs = [float(line.split(",")[1]) for line in lines[1:]]
    for h, t in zip(hs, (0.0, 0.5, 2.0)):
        assert h == pytest.approx(2 / math.sqrt(1 + 4 * t), rel=0.02)
    assert "verdict: decreasing" in (out / "manifest.txt").read_text()


def test_audit_command(tmp_path):
    out = tmp_path / "audit"
    code = run_cli("audit", "--geometry", "hyperbolic", "--t-end", "1",
                   "--t-sequence", "0.25,0.5", "--audit-radii", "1,2",
                   "--window-lo", "6", "--window-hi", "10", "--out", str(out))
    assert code == 0
    outputs = out / "outputs"
    lines = (outputs / "audit.csv").read_text().splitlines()
    assert lines[0].startswith("scenario,t,r,omega,domega_dt_measured,rhs_eq2,"
                               "shell_term,hypothesis_sign,bound_eq5,h_estimate,"
                               "h_stderr,collapse_proxy,verdict")
    assert len(lines) == 1 + 2 * 2
    row = lines[1].split(",")
    assert row[0] == "hyperbolic"
    # decomposition holds exactly: measured - rhs - shell = 0
    measured, rhs, shell = float(row[4]), float(row[5]), float(row[6])
    assert measured - rhs - shell == pytest.approx(0.0, abs=1e-15)
    for name in ("radial.csv", "soliton.csv", "supersolution.png", "audit.png"):
        assert (outputs / name).exists()


def test_classify_command_schema(tmp_path):
    out = tmp_path / "cls"
    code = run_cli("classify", "--geometry", "round-sphere", "--t-end", "1",
                   "--out", str(out))
    assert code == 0
    rec = json.loads((out / "outputs" / "classify.jsonl").read_text().splitlines()[0])
    assert set(rec) == {"scenario", "verdict", "T", "exponent", "constant", "residual"}
    assert rec["verdict"] == "I"
    assert rec["T"] == pytest.approx(0.25, abs=1e-6)
    assert rec["exponent"] == pytest.approx(-1.0, abs=0.01)


def test_rel_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("REL_THREADS", "3")
    out = tmp_path / "envt"
    assert run_cli("flow", "--geometry", "euclidean", "--t-end", "0.5",
                   "--out", str(out)) == 0
    assert "threads: 3" in (out / "manifest.txt").read_text()
    monkeypatch.setenv("REL_THREADS", "zebra")
    assert run_cli("flow", "--geometry", "euclidean", "--t-end", "0.5",
                   "--out", str(tmp_path / "envb")) == 1


def test_scenario_rerun_is_bit_identical(tmp_path):
    args = ("audit", "--geometry", "sol", "--t-end", "1", "--t-sequence", "0.5",
            "--audit-radii", "1,2", "--window-lo", "4", "--window-hi", "7",
            "--r-count", "8", "--quadrature", "lebedev26", "--ray-tol", "1e-8")
    for sub in ("a", "b"):
        assert run_cli(*args, "--out", str(tmp_path / sub)) == 0
    assert trees_identical(tmp_path / "a" / "outputs", tmp_path / "b" / "outputs")


def test_config_hash_tracks_content():
    a = build_config({"geometry": "nil"})
    b = build_config({"geometry": "sol"})
    assert config_hash(a) != config_hash(b)
    assert config_hash(a) == config_hash(build_config({"geometry": "nil"}))
