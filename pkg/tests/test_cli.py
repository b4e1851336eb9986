import json
import subprocess
import sys

import pytest

from deltaloops.cli import main


@pytest.fixture
def ring_config(tmp_path):
    p = tmp_path / "ring.json"
    p.write_text(json.dumps({"k": 2, "scatterers": [{"pos": [0, 0, 0], "alpha": 0}],
                             "trace": {"bounds": [[-1, 1]] * 3}}))
    return p


def test_single_center_no_ring(capsys):
    assert main(["single-center", "--alpha", "0.06", "--k", "2"]) == 0
    out = capsys.readouterr().out
    assert "no nodal ring (alpha/k = 0.03 > 2.679e-2)" in out


def test_single_center_ring(capsys):
    assert main(["single-center", "--alpha", "0", "--k", "2"]) == 0
    out = capsys.readouterr().out
    assert "distance 0.5\n" in out
    assert "radius   0.410546" in out
    assert "kappa*" in out


def test_single_center_negative_alpha(capsys):
    assert main(["single-center", "--alpha", "-0.05", "--k", "2"]) == 0
    assert "branch   0" in capsys.readouterr().out


def test_single_center_bad_k(capsys):
    assert main(["single-center", "--alpha", "0", "--k", "-1"]) == 1
    assert "k must be positive" in capsys.readouterr().err


def test_usage_errors():
    assert main([]) == 2
    assert main(["bogus"]) == 2
    assert main(["single-center", "--alpha", "x", "--k", "2"]) == 2
    assert main(["field", "cfg.json", "--at", "1,2"]) == 2


def test_missing_config_is_domain_error(tmp_path, capsys):
    assert main(["trace", str(tmp_path / "missing.json")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_invalid_config_reports_path(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"k": 2, "scatterers": [{"pos": [0, 0, 0], "alfa": 0}]}')
    assert main(["trace", str(p)]) == 1
    assert "scatterers[0].alfa" in capsys.readouterr().err


def test_trace_free_field(tmp_path, capsys):
    p = tmp_path / "free.json"
    p.write_text('{"k": 2}')
    assert main(["trace", str(p), "--output-dir", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "loops.csv").read_text().count("\n") == 1
    assert "loops: 0" in capsys.readouterr().out


def test_trace_ring(tmp_path, ring_config, capsys):
    assert main(["trace", str(ring_config), "--output-dir", str(tmp_path / "out")]) == 0
    out = capsys.readouterr().out
    assert "loops: 1 (1 closed)" in out
    for name in ("loops.csv", "loops.obj", "tubes.obj", "archive.json"):
        assert (tmp_path / "out" / name).exists()


def test_field_at_negative_coordinates(ring_config, capsys):
    assert main(["field", str(ring_config), "--at", "-0.285398,0.410546,0"]) == 0
    out = capsys.readouterr().out
    psi = out.splitlines()[0]
    assert psi.startswith("psi  = ")
    value = complex(psi.split("=")[1].strip())
    assert abs(value) < 1e-6


def test_field_at_scatterer_is_domain_error(ring_config):
    assert main(["field", str(ring_config), "--at", "0,0,0"]) == 1


def test_winding(ring_config, capsys):
    assert main(["winding", str(ring_config), "--loop", "0", "--vertex", "5", "--radius", "0.01"]) == 0
    out = capsys.readouterr().out
    w = int(next(l for l in out.splitlines() if l.startswith("winding")).split()[1])
    assert abs(w) == 1
    assert main(["winding", str(ring_config), "--loop", "3", "--vertex", "0", "--radius", "0.01"]) == 1


def test_check_reports_each_diagnostic(ring_config, capsys):
    code = main(["check", str(ring_config), "--points", "20"])
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4
    assert all(l.startswith(("PASS", "FAIL")) for l in lines)
    assert code == (0 if all(l.startswith("PASS") for l in lines) else 1)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "deltaloops", "single-center", "--alpha", "0.06", "--k", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "no nodal ring" in res.stdout
