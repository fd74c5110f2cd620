import json
import subprocess
import sys

import pytest

from demoshape.cli import main

FAST = ["--steps", "1000", "--eval-interval", "500", "--runs", "2"]


def test_demo_command(capsys):
    assert main(["demo", "5", "optimal"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "t x y"
    assert lines[2] == "0 0 0" and lines[-1] == "8 4 4"


def test_oracle_check(capsys):
    assert main(["oracle-check", "--side", "5", "--demo", "worst"]) == 0
    out = capsys.readouterr().out
    assert "Theorem 1: PASS" in out
    assert "mutant: rejected" in out


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["demo", "5", "optimal", "--bogus"])
    assert e.value.code == 1


def test_missing_config(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.json")]) == 2
    assert "nope.json" in capsys.readouterr().err


def test_bad_config_values(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"method": "warp"}))
    assert main(["run", str(path)]) == 2


def test_run_with_overrides(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"sides": [5], "method": "ridm", "horizon": 60}))
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out), "--seed", "7"] + FAST) == 0
    assert (out / "ridm_side5.csv").exists()
    assert (out / "curves_side5.svg").exists()


def test_ablate_writes_four_curves(tmp_path, capsys):
    out = tmp_path / "abl"
    assert main(["ablate", "--side", "5", "--out", str(out)] + FAST) == 0
    curves = sorted(p.name for p in out.glob("*_side5.csv"))
    assert curves == ["dshape-GR-PBRS_side5.csv", "dshape-GR-SA_side5.csv", "dshape-GR_side5.csv", "dshape_side5.csv"]


def test_sweep_and_plot(tmp_path, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", "--side", "5", "--demo", "good", "--values", "1", "25", "--out", str(out)] + FAST) == 0
    names = sorted(p.name for p in out.glob("*_side5.csv"))
    assert names == ["dshape_side5.csv", "manhattan_c1_side5.csv", "manhattan_c25_side5.csv"]
    svg = tmp_path / "p.svg"
    assert main(["plot", *map(str, sorted(out.glob("*_side5.csv"))), "--out", str(svg), "--optimal", "-7"]) == 0
    assert svg.read_text().count("<svg") == 1


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "demoshape.cli", "demo", "10", "worst"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1] == "12 9 3"
