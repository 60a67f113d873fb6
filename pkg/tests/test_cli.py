"""CLI subcommands: artifacts, manifests, determinism, and error paths."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from mmqed.cli import main

FAST_LZ = ('--set', 'lz_ramp.grid={"start": 10, "stop": 12, "points": 5}')


def _run(args):
    runner = CliRunner()
    return runner.invoke(main, args, catch_exceptions=False)


def test_exchange_scan_artifacts(tmp_path):
    out = tmp_path / "ex"
    result = _run(["exchange-scan", "--out", str(out)])
    assert result.exit_code == 0
    assert (out / "exchange.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "exchange-scan"
    assert manifest["backend"] in ("compiled", "python")
    assert "exchange.csv" in manifest["artifacts"]
    assert len(manifest["config_hash"]) == 16
    assert manifest["versions"]["mmqed"]


def test_artifacts_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        result = _run(["lz-ramp", "--out", str(out), "--seed", "3", *FAST_LZ])
        assert result.exit_code == 0
    assert (a / "lz_ramp.csv").read_bytes() == (b / "lz_ramp.csv").read_bytes()


def test_spectroscopy_reports_crossings(tmp_path):
    out = tmp_path / "sp"
    result = _run(["spectroscopy", "--out", str(out),
                   "--set", 'spectroscopy.grid={"start": 6.6, "stop": 7.7, '
                            '"points": 401}'])
    assert result.exit_code == 0
    crossings = json.loads((out / "crossings.json").read_text())
    gaps = sorted(round(c["gap_ghz"] * 1e3, 1) for c in crossings)
    assert len(crossings) == 3
    assert gaps[0] == pytest.approx(110.1, abs=0.5)
    assert gaps[-1] == pytest.approx(159.8, abs=0.5)


def test_unknown_override_fails_with_field_path(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["exchange-scan", "--out",
                                  str(tmp_path / "x"),
                                  "--set", "device.bogus=1"])
    assert result.exit_code != 0
    assert "device.bogus" in result.output


def test_validate_exit_codes(tmp_path, monkeypatch):
    from mmqed.acceptance import AcceptanceResult
    import mmqed.acceptance as acc

    def fake_run_all(**kwargs):
        return [AcceptanceResult("alpha", True, "ok", 0.1),
                AcceptanceResult("beta", passed, "detail", 0.1)]

    monkeypatch.setattr(acc, "run_all", fake_run_all)
    runner = CliRunner()
    passed = True
    result = runner.invoke(main, ["validate", "--out", str(tmp_path / "v1")])
    assert result.exit_code == 0
    assert "[PASS] alpha" in result.output
    report = json.loads((tmp_path / "v1" / "validate.json").read_text())
    assert [r["passed"] for r in report] == [True, True]

    passed = False
    result = runner.invoke(main, ["validate", "--out", str(tmp_path / "v2")])
    assert result.exit_code != 0
    assert "beta" in result.output


def test_seed_and_threads_recorded(tmp_path):
    out = tmp_path / "lz"
    result = _run(["lz-ramp", "--out", str(out), "--seed", "11",
                   "--threads", "2", *FAST_LZ])
    assert result.exit_code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 11
    assert manifest["threads"] == 2
    assert manifest["config"]["run"]["seed"] == 11
