import json
import subprocess
import sys
from pathlib import Path

import pytest

import conjscan.cli as cli
from conjscan import ConjscanError
from conjscan.cli import format_value, run

GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("args,produced,golden", [
    (["scan", "--problem", "demo_interval"], "scan.csv", "scan_interval.csv"),
    (["scan", "--problem", "demo_curvature", "--n", "1001"], "scan.csv", "scan_curvature.csv"),
    (["matrix-lab", "--seed", "0", "--paths", "6"], "matrix_lab.csv", "matrix_lab.csv"),
    (["bifurcate", "--problem", "demo_interval", "--n", "1001"], "bifurcate.csv", "bifurcate_interval.csv"),
], ids=["scan-interval", "scan-curvature", "matrix-lab", "bifurcate"])
def test_outputs_match_golden_files(tmp_path, args, produced, golden):
    assert run(args + ["--output", str(tmp_path)]) == 0
    assert (tmp_path / produced).read_bytes() == (GOLDEN / golden).read_bytes()


def test_summary_json(tmp_path):
    assert run(["verify-smale", "--problem", "demo_radial", "--n", "1001", "--output", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["smale_lhs"] == summary["smale_rhs"] == 5
    assert summary["smale_holds"] and summary["bifurcation_lower_bound"] == 2
    assert [c["multiplicity"] for c in summary["crossings"]] == [1, 2, 2]


def test_format_value():
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(True) == "true" and format_value(False) == "false"
    assert format_value(3) == "3" and format_value(None) == ""
    assert format_value(1.0 / 3.0) == "0.333333333333"


def test_validate_and_morse(tmp_path, capsys):
    assert run(["validate", "--problem", "demo_radial"]) == 0
    assert run(["morse", "--problem", "demo_radial", "--n", "501", "--output", str(tmp_path)]) == 0
    out = json.loads((tmp_path / "morse.json").read_text())
    assert out["morse_index"] == 5 and {k: v for k, v in out["per_mode"].items() if v} == {"0": 1, "1": 1, "2": 1}
    assert run(["morse", "--problem", "demo_interval", "--r", "0.5", "--n", "501", "--output", str(tmp_path)]) == 0
    assert "morse index at r=0.5: 1" in capsys.readouterr().out


def test_certify_single_radius(tmp_path):
    assert run(["certify", "--problem", "demo_interval", "--r0", "0.400000041088", "--output", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "certify.json").read_text())
    assert report["signature"] == -1 and report["negative_definite"]


def test_flags_override_config(tmp_path):
    assert run(["scan", "--problem", "demo_interval", "--n", "257", "--samples", "80",
                "--output", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert (summary["n_nodes"], summary["r_samples"]) == (257, 80)


@pytest.mark.parametrize("args", [
    ["scan", "--problem", "no_such_file.cfg"],
    ["frobnicate"],
    ["scan"],
    ["scan", "--problem", "demo_interval", "--n", "3"],
    ["matrix-lab", "--dims", "1"],
    [],
])
def test_errors_exit_one(tmp_path, args):
    assert run(args + (["--output", str(tmp_path)] if len(args) > 1 else [])) == 1


def test_unknown_key_exits_one(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[problem]\nkind = interval\ncolour = blue\n")
    assert run(["validate", "--problem", str(cfg)]) == 1
    assert "UNKNOWN_KEY" in capsys.readouterr().err


def test_identity_violation_exits_two(tmp_path, monkeypatch):
    def violated(*args, **kwargs):
        raise ConjscanError("SMALE_VIOLATION", "forced")

    monkeypatch.setattr(cli, "verify_smale_identity", violated)
    assert run(["verify-smale", "--problem", "demo_interval", "--n", "257", "--output", str(tmp_path)]) == 2


def test_converse_violation_exits_two(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "scan_conjugate_instants", lambda *a, **k: [0.55])
    assert run(["bifurcate", "--problem", "demo_interval", "--n", "257", "--output", str(tmp_path)]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "conjscan.cli", "matrix-lab", "--paths", "2",
                           "--output", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and "2 paths: 2 hold" in proc.stdout
