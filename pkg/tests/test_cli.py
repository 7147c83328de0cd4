from __future__ import annotations

import json

import pytest

from autoresonance.cli import OUT_DIR_ENV, main


def run(tmp_path, *argv, sub="out"):
    out = tmp_path / sub
    return main(["--out-dir", str(out), *argv]), out


def error_of(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_preset_writes_csv_and_manifest(tmp_path):
    code, out = run(tmp_path, "preset", "fig2a", "--sample", "1.0")
    assert code == 0
    assert (out / "fig2a.csv").read_text().splitlines()[0] == "tau,rho,psi"
    manifest = json.loads((out / "fig2a.manifest.json").read_text())
    assert manifest["command"] == "preset" and manifest["outputs"] == ["fig2a.csv"]
    assert manifest["params"]["m"] == 4.0 and manifest["params"]["y0"] == [0.27, 0.01]
    assert "workers" not in manifest["invocation"] and "out_dir" not in manifest["invocation"]


def test_oscillator_headers(tmp_path):
    code, out = run(tmp_path, "simulate", "--system", "oscillator", "--eps", "0.02", "--y0", "0.1", "0",
                    "--span", "0", "5", "--sample", "0.5")
    assert code == 0
    assert (out / "simulate_oscillator.csv").read_text().splitlines()[0] == "t,u,v,E,Delta"


def test_asymptotics_files(tmp_path):
    code, out = run(tmp_path, "asymptotics", "--m", "4", "--branch", "1", "--K", "4", "--points", "5")
    assert code == 0
    coeffs = json.loads((out / "asymptotics_b1_K4.json").read_text())
    assert coeffs["rho_coeffs"][2] == pytest.approx(1.5, rel=1e-14)
    assert (out / "asymptotics_b1_K4_residual.csv").read_text().splitlines()[0] == "tau,res_rho,res_psi"


def test_degenerate_pumping_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "asymptotics", "--m", "0.5")
    assert code == 2
    assert error_of(capsys)["error"] == "DegeneratePumping"


def test_usage_errors(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "preset", "nope"]) == 1
    assert error_of(capsys)["exit_code"] == 1
    assert main(["bogus"]) == 1
    assert main(["simulate", "--y0", "1"]) == 1


def test_numerical_failure_exit_code(tmp_path, capsys):
    # starting at rho = 0 hits the singular amplitude of the phase equation
    code, _ = run(tmp_path, "simulate", "--y0", "0", "0", "--span", "0", "1")
    assert code == 3
    assert error_of(capsys)["exit_code"] == 3


def test_classify_table(tmp_path):
    code, out = run(tmp_path, "classify", "--m", "1.5")
    assert code == 0
    verdicts = json.loads((out / "classify.json").read_text())["verdicts"]
    assert [v["regime"] for v in verdicts] == ["Stable", "Stable", "Unstable", "Unstable"]
    code, out = run(tmp_path, "classify", "--eps", "0.001", "--alpha", "5e-5", "--f0", "1", "--h0", "5", sub="osc")
    assert json.loads((out / "classify.json").read_text())["regime"]["kind"] == "TwoStableModes"


def test_lyapunov_fixture_and_non_applicable(tmp_path):
    code, out = run(tmp_path, "lyapunov", "--m", "4", "--branch", "1", "--n", "500")
    assert code == 0
    rep = json.loads((out / "lyapunov_b1.json").read_text())
    assert rep["bound_violations"] == 0 and rep["derivative_violations"] == 0 and rep["min_margin"] > 0
    code, out = run(tmp_path, "lyapunov", "--m", "0", "--branch", "1", "--d-star", "0.05", "--eta-star", "1e4",
                    "--n", "500", sub="m0")
    assert code == 0
    assert json.loads((out / "lyapunov_b1.json").read_text())["applicable"] is False


def test_lyapunov_without_domain_is_a_usage_error(tmp_path):
    code, _ = run(tmp_path, "lyapunov", "--m", "7", "--branch", "1")
    assert code == 1


def test_basin_and_crosscheck_headers(tmp_path):
    code, out = run(tmp_path, "basin", "--rho-range", "0.27", "0.27", "1", "--psi-range", "0.01", "0.01", "1")
    assert code == 0
    lines = (out / "basin.csv").read_text().splitlines()
    assert lines[0] == "index,rho0,psi0,state,rho_final,psi_final,tau_final"
    assert lines[1].split(",")[3] == "captured"
    code, out = run(tmp_path, "crosscheck", "--eps", "0.02", "--f0", "4", "--tau-span", "1", "1.5", sub="cc")
    assert code == 0
    assert (out / "crosscheck.csv").read_text().splitlines()[0] == "t,tau,envelope,predicted,rel_error,Delta,psi"


@pytest.mark.parametrize(
    "argv",
    [
        ["preset", "fig2c", "--sample", "0.5"],
        ["basin", "--rho-range", "0.2", "2.2", "3", "--psi-range", "-1", "1", "2", "--horizon", "10"],
    ],
)
def test_replay_is_byte_identical(tmp_path, argv):
    code, first = run(tmp_path, "--workers", "1", *argv, sub="first")
    assert code == 0
    manifest = next(first.glob("*.manifest.json"))
    code, second = run(tmp_path, "--workers", "2", "replay", str(manifest), sub="second")
    assert code == 0
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_config_file_and_environment(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"out-dir": str(tmp_path / "from_cfg"), "sample": 2.0}))
    assert main(["--config", str(cfg), "preset", "fig2a"]) == 0
    lines = (tmp_path / "from_cfg" / "fig2a.csv").read_text().splitlines()
    assert len(lines) == 1 + 26
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "from_env"))
    assert main(["classify"]) == 0
    assert (tmp_path / "from_env" / "classify.json").exists()
    assert main(["--config", str(tmp_path / "missing.json"), "classify"]) == 1
