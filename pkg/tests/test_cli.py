import json
import subprocess
import sys
from pathlib import Path

import pytest

from solgap.cli import EXIT_CODES, run

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def test_gap_human(capsys):
    assert run(["decide", "gap", str(PROBLEMS / "sl2.json")]) == 0
    assert capsys.readouterr().out.strip() == "Gap"


def test_no_gap_human(capsys):
    assert run(["decide", "gap", str(PROBLEMS / "hyperbolic.json")]) == 1
    assert capsys.readouterr().out.strip() == "NoGap, witness W = Q^2, class VirtuallyAbelian"


@pytest.mark.parametrize("prop,name", [("gap", "sl2"), ("ergodic", "negation"), ("strong", "hyperbolic"),
                                       ("ergodic", "sl2"), ("strong", "sl2")])
def test_json_matches_human(capsys, prop, name):
    path = str(PROBLEMS / f"{name}.json")
    code_h = run(["decide", prop, path])
    human = capsys.readouterr().out.strip()
    code_j = run(["decide", prop, path, "--json"])
    report = json.loads(capsys.readouterr().out)
    assert human.split(",")[0] == report["verdict"]
    assert code_h == code_j == EXIT_CODES[report["verdict"]]
    assert len(report["input_hash"]) == 64 and "timing_seconds" in report


def test_certify_verify_round_trip(tmp_path, capsys):
    for name in ("sl2", "hyperbolic", "rotation_third", "heisenberg"):
        out = tmp_path / f"{name}.cert.json"
        assert run(["certify", str(PROBLEMS / f"{name}.json"), "-o", str(out)]) == 0
        assert run(["verify", str(out)]) == 0
    capsys.readouterr()


def test_tampered_certificate(tmp_path, capsys):
    out = tmp_path / "c.json"
    run(["certify", str(PROBLEMS / "negation.json"), "-o", str(out)])
    doc = json.loads(out.read_text())
    erg = next(c for c in doc["certificates"] if c["kind"] == "ergodic")
    erg["witness"]["orbit"].pop()
    out.write_text(json.dumps(doc))
    assert run(["verify", str(out)]) == 1
    assert "NOT verified" in capsys.readouterr().out


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"a": 1, "d": 1, "generators": [{"matrix": [["2"]]}]}))
    assert run(["decide", "gap", str(bad)]) == 64
    assert "generators[0].matrix" in capsys.readouterr().err
    bad.write_text("{not json")
    assert run(["decide", "gap", str(bad)]) == 64
    assert run(["decide", "gap", str(tmp_path / "missing.json")]) == 64
    bad.write_text(json.dumps({"a": 4, "d": 1, "generators": []}))
    assert run(["decide", "gap", str(bad)]) == 64
    assert "square-free" in capsys.readouterr().err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        run(["decide", "nonsense", "x.json"])
    assert info.value.code == 64


def test_simulate_csv(capsys):
    assert run(["simulate", str(PROBLEMS / "hyperbolic.json"), "--heights", "5", "10"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "a,d,H,K,lambda,iterations,residual"
    assert len(lines) == 3


def test_simulate_json(capsys):
    assert run(["simulate", str(PROBLEMS / "sl2.json"), "--heights", "5", "--json"]) == 0
    curve = json.loads(capsys.readouterr().out)["curve"]
    assert curve[0]["H"] == 5 and 0 < curve[0]["lambda"] < 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "solgap", "decide", "ergodic", str(PROBLEMS / "rotation_third.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stdout.startswith("NotErgodic")
