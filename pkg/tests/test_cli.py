import json
import subprocess
import sys

import pytest

from gpw.cli import run


def _call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err


def test_classify_square(capsys):
    code, rep, _ = _call(capsys, "classify", "--metric", "poly:0,0,1")
    assert code == 0
    assert rep["results"]["class"] == "SymmetricNonFlat"
    assert rep["results"]["dim_killing"] == 8
    assert rep["schema"] == 1
    assert set(rep) == {"schema", "command", "inputs", "results", "tolerances", "seed", "pass"}


def test_parse_error_exit_code(capsys):
    code, rep, _ = _call(capsys, "classify", "--metric", "poly:")
    assert code == 2
    assert rep["pass"] is False
    assert rep["results"]["position"] == 5


def test_verify_osserman_expsum(capsys):
    code, rep, _ = _call(capsys, "verify", "--metric", "exp:1@1+1@2", "--property", "osserman", "--samples", "1000", "--seed", "7")
    assert code == 0 and rep["pass"]
    assert rep["results"]["profiles"] == {"spacelike": [1, 0], "timelike": [1, 0]}
    assert rep["seed"] == 7


def test_curvature_with_oracle(capsys):
    code, rep, _ = _call(capsys, "curvature", "--metric", "poly:0,0,1", "--oracle")
    assert code == 0
    assert rep["results"]["oracle_max_abs_difference"] <= 1e-5


def test_geodesic_and_dump(capsys, tmp_path):
    dump = tmp_path / "traj.csv"
    code, rep, _ = _call(
        capsys, "geodesic", "--metric", "poly:0,0,1", "--velocity", "1,1,0,0", "--t", "1", "--oracle", "--steps", "2000",
        "--dump-trajectory", str(dump),
    )
    assert code == 0
    assert rep["results"]["point"] == pytest.approx([1, 1, 2 / 3, -1 / 3], abs=1e-14)
    assert dump.read_text().splitlines()[0] == "t,x,y,xt,yt"


def test_killing_is_deterministic(capsys):
    a = _call(capsys, "killing", "--metric", "exp:1@1")
    b = _call(capsys, "killing", "--metric", "exp:1@1")
    assert a[0] == 0
    assert a[1] == b[1]
    assert a[1]["results"]["dimension"] == 6


def test_isometry_commands(capsys):
    code, rep, _ = _call(capsys, "isometry", "--from", "exp:1@1@0", "--to", "exp:2@3@5")
    assert code == 0 and rep["results"]["status"] == "isometry"
    code, rep, _ = _call(capsys, "isometry", "--from", "exp:1@1@0.3", "--to", "exp:1@1+1@2@0.3", "--K", "4")
    assert code == 0 and rep["results"]["mismatch_p"] == 2


def test_bad_point_is_input_error(capsys):
    code, rep, _ = _call(capsys, "isometry", "--from", "exp:1@1@0,1", "--to", "exp:1@1@0")
    assert code == 2


def test_pretty_and_out(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, rep, err = _call(capsys, "classify", "--metric", "exp:1@1", "--pretty", "--out", str(out))
    assert code == 0
    assert "classify: PASS" in err
    assert json.loads(out.read_text()) == rep


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("GPW_SEED", "11")
    _, rep, _ = _call(capsys, "classify", "--metric", "poly:0")
    assert rep["seed"] == 11


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gpw.cli", "classify", "--metric", "poly:0"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["class"] == "Flat"
