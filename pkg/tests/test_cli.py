import json
import subprocess
import sys

import pytest

from conftest import two_chain
from udrig.cli import main
from udrig.gadgets import load_gadget
from udrig.io import dumps_config, load_config, save_config


@pytest.fixture
def files(tmp_path):
    out = {}
    for name in ("rhombus", "unit_edge", "moser_spindle"):
        p = tmp_path / f"{name}.json"
        save_config(load_gadget(name), p)
        out[name] = str(p)
    p = tmp_path / "chain.json"
    save_config(two_chain(), p)
    out["chain"] = str(p)
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_verify_exit_codes(capsys, files):
    code, out, _ = run(capsys, "verify", files["rhombus"], "--claim", "star:A,C")
    assert code == 1
    doc = json.loads(out)
    assert doc["verdict"]["outcome"] == "refuted" and doc["exit_code"] == 1
    assert run(capsys, "verify", files["rhombus"], "--claim", "wstar:A,C")[0] == 0
    assert run(capsys, "verify", files["unit_edge"], "--claim", "star:X,Y")[0] == 0


def test_spectrum_report(capsys, files):
    code, out, err = run(capsys, "spectrum", files["moser_spindle"], "--pair", "O,T1")
    assert code == 0 and "sqrt(3)" in err
    values = json.loads(out)["spectrum"]["values"]
    assert [v["expr"] for v in values] == ["sqrt(3)"]
    lo, hi = values[0]["decimal"]
    assert lo.startswith("1.7320508075688772935")


def test_incomplete_spectrum_is_undecided(capsys, files):
    assert run(capsys, "spectrum", files["chain"], "--pair", "X,Z")[0] == 2


def test_refute_chain(capsys, files):
    code, out, _ = run(capsys, "refute", files["chain"], "--claim", "star:X,Y", "--restarts", "8")
    assert code == 1
    assert json.loads(out)["verdict"]["witness"]["provenance"] == "exact"


def test_strengthen_writes_config(capsys, files, tmp_path):
    target = tmp_path / "strong.json"
    code, _, _ = run(capsys, "strengthen", files["rhombus"], "--claim", "wstar:A,C", "--write-config", target)
    assert code == 0
    c = load_config(target)
    assert len(c.points) == 7
    # written configurations round-trip unchanged
    assert dumps_config(load_config(target)) == target.read_text()


def test_build_and_search(capsys, files, tmp_path):
    built = tmp_path / "b.json"
    code, _, _ = run(capsys, "build", "epsilon", files["rhombus"], "--at", "A,C", "--eps", "1", "--write-config", built)
    assert code == 0 and len(load_config(built).points) > 4
    assert run(capsys, "build", "catalog", "--name", "rhombus")[0] == 0
    assert run(capsys, "search", files["rhombus"], "--pair", "A,C", "--budget", "0")[0] == 2
    code, out, _ = run(capsys, "closure", files["unit_edge"], "--depth", "1")
    assert code == 0 and len(json.loads(out)["candidates"]) == 2


def test_congruence_table(capsys, tmp_path):
    p = tmp_path / "q.json"
    p.write_text(json.dumps({"points": [
        {"label": "a", "coords": ["0", "0"]}, {"label": "b", "coords": ["1", "0"]},
        {"label": "c", "coords": ["0", "0"]}, {"label": "d", "coords": ["3/2", "0"]}]}))
    code, out, err = run(capsys, "congruence", p, "--N", "5")
    assert code == 1
    assert json.loads(out)["first_failure"] == 5
    assert "overall: False" in err


def test_usage_errors(capsys, files, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"points": [{"label": "a", "coords": ["0", "sqrt(-1)"]}]}))
    code, _, err = run(capsys, "validate", bad)
    assert code == 3 and "points[0].coords[1]" in err
    assert run(capsys, "validate", tmp_path / "missing.json")[0] == 3
    assert run(capsys, "frobnicate")[0] == 3
    assert run(capsys, "verify", files["rhombus"], "--claim", "star:A,Q")[0] == 3
    assert run(capsys, "verify", files["rhombus"], "--claim", "star:A,C", "--precision", "4")[0] == 3


def test_out_file_and_no_timing(capsys, files, tmp_path):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "enumerate", files["rhombus"], "--out", target)
    assert code == 0 and "2 solutions" in out
    doc = json.loads(target.read_text())
    assert doc["enumeration"]["count"] == 2
    assert "duration_seconds" not in doc["manifest"]
    assert len(doc["manifest"]["inputs"][files["rhombus"]]) == 64


def test_console_script_runs(files):
    r = subprocess.run([sys.executable, "-m", "udrig.cli", "validate", files["rhombus"]], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["validation"]["valid"]
