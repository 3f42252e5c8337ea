import json
from pathlib import Path

import pytest

from bvforge.cli import RunConfig, UsageError, main

MODELS = Path(__file__).resolve().parent.parent / "models"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_cme_abelian_passes(capsys):
    code, out = run(capsys, "cme", "--model", MODELS / "u1_2x2.toml")
    assert code == 0
    assert "[PASS] cme" in out.out


def test_cme_su2_reports_sectors(capsys):
    code, out = run(capsys, "cme", "--model", MODELS / "su2_2x2.toml", "--output", "structured")
    assert code == 1
    recs = [json.loads(line) for line in out.out.splitlines()]
    assert "header" in recs[0]
    cme = recs[1]
    assert cme["check"] == "cme" and not cme["passed"]
    assert cme["result"]["residual_terms"] == 672
    assert cme["tolerance"] == "exact"
    assert cme["metadata"]["seed"] == recs[0]["header"]["config"]["seed"]


def test_gaugefix_check_abelian(capsys):
    code, out = run(capsys, "gaugefix", "--model", MODELS / "u1_2x2.toml", "--check",
                    "--alpha", "2", "--samples", "5")
    assert code == 0
    for name in ("gaugefix.cme", "gaugefix.nilpotency", "gaugefix.brst_table",
                 "gaugefix.homomorphism", "gaugefix.gamma_invariance"):
        assert f"[PASS] {name}" in out.out


def test_homology_scalar_caveat(capsys):
    code, out = run(capsys, "homology", "--model", MODELS / "scalar_4x4.toml",
                    "--af-window", "0..2", "--cap", "1", "--degree", "1")
    assert code == 0
    assert "H_1=6" in out.out and "zero modes" in out.out


def test_homology_cap_overflow(capsys):
    code, out = run(capsys, "homology", "--model", MODELS / "su2_2x2.toml", "--cap", "1")
    assert code == 1 and "raise --cap" in out.out


def test_peierls_command(capsys):
    code, out = run(capsys, "peierls", "--model", MODELS / "scalar_16x16.toml",
                    "--F", "phi@(4,2)", "--G", "Dbt(phi@(4,2))", "--output", "structured")
    assert code == 0
    rec = json.loads(out.out.splitlines()[1])
    assert rec["result"]["bracket"]["poly"] == "1.0+0.0*i"
    assert rec["tolerance"] == 1e-8 and rec["result"]["wrap"] is False


def test_structured_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for p in (a, b):
        assert main(["all", "--model", str(MODELS / "u1_2x2.toml"), "--output", "structured",
                     "--seed", "7", "--samples", "5", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", "--model", "x"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["homology", "--model", str(MODELS / "scalar_4x4.toml"), "--af-window", "0-2"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["peierls", "--model", str(MODELS / "scalar_4x4.toml"), "--F", "phi@(0,0"])
    assert exc.value.code == 2


def test_model_errors_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[lattice]\nn_t = 2\nn_x = 2\nwidth = 3\n")
    assert main(["cme", "--model", str(bad)]) == 3
    assert "bad.toml:4" in capsys.readouterr().err
    assert main(["gaugefix", "--model", str(MODELS / "scalar_4x4.toml")]) == 3


def test_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("BVFORGE_THREADS", "zero")
    with pytest.raises(SystemExit) as exc:
        main(["cme", "--model", str(MODELS / "u1_2x2.toml")])
    assert exc.value.code == 2
    monkeypatch.setenv("BVFORGE_THREADS", "2")
    assert main(["cme", "--model", str(MODELS / "u1_2x2.toml"), "--output", "structured"]) == 0
    assert '"threads":2' in capsys.readouterr().out


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig("cme", "m", tol=0)
    with pytest.raises(UsageError):
        RunConfig("cme", "m", af_window=(2, 1))
