import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from ratmat.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
A = str(CONFIGS / "fixture_a.json")
B = str(CONFIGS / "fixture_b.json")
A_RES = str(CONFIGS / "fixture_a_residues.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_flow_dpv_fixture_b(capsys):
    code, out, _ = run(capsys, "flow", B, "--mode", "dpv", "--steps", "1")
    assert code == 0
    r = rows(out)
    assert len(r) == 2 and r[0]["step"] == "0"
    last = r[1]
    assert float(last["gamma_re"]) == -3 and float(last["gamma_im"]) == 0
    assert abs(float(last["pi_re"]) - 4 / 9) < 1e-15
    assert float(last["mu_re"]) == 4
    assert last["form_used"] == "swapped"
    assert float(last["oracle_discrepancy"]) <= 1e-10
    assert last["z1"] == "-1" and last["zeta1"] == "5"


def test_flow_is_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["flow", B, "--mode", "isospectral", "--steps", "4", "-o", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    header = paths[0].read_text().splitlines()[0].split(",")
    assert header[:3] == ["step", "z1", "zeta1"] and "b1_1_im" in header


def test_flow_halt_exit_code(capsys):
    code, out, err = run(capsys, "flow", A, "--mode", "isomonodromic", "--steps", "2")
    assert code == 2
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["error"] == "ShiftCollision" and payload["step"] == 1
    assert len(rows(out)) == 1  # the partial trajectory holds the initial state


def test_flow_dpv_halt_writes_partial(capsys):
    code, out, err = run(capsys, "flow", B, "--mode", "dpv", "--steps", "5")
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["step"] == 3
    assert len(rows(out)) == 3


def test_verify_fixture_a(capsys):
    code, out, _ = run(capsys, "verify", A)
    assert code == 0
    report = json.loads(out)
    checked = [r for r in report if r["pass"] is not None]
    assert checked and all(r["max_residual"] <= 1e-8 for r in checked)
    assert all(r["pass"] for r in checked)
    skipped = {r["invariant"] for r in report if r["pass"] is None}
    assert "gradient_recovery" in skipped


def test_verify_fixture_b(capsys):
    code, out, _ = run(capsys, "verify", B)
    assert code == 0
    assert all(r["pass"] for r in json.loads(out))


def test_verify_random(capsys):
    code, out, _ = run(capsys, "verify", "--random", "8", "--seed", "4")
    assert code == 0
    report = json.loads(out)
    assert {r["invariant"] for r in report} >= {"inverse_identity", "dpv_oracle"}


@pytest.mark.parametrize("path", [A, B, A_RES])
def test_build_is_idempotent(path, tmp_path, capsys):
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    assert main(["build", path, "-o", str(first)]) == 0
    assert main(["build", str(first), "-o", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    data = json.loads(first.read_text())
    assert {"residue", "inverse", "divisor"} <= set(data)


def test_build_reports_type(capsys):
    code, out, _ = run(capsys, "build", A)
    data = json.loads(out)
    assert data["type"]["mu"] == pytest.approx([1.0, 0.0], abs=1e-12)
    assert data["spectral"]["gamma"] == pytest.approx([5.0, 0.0], abs=1e-12)
    assert data["spectral"]["pi"] == pytest.approx([3.0, 0.0], abs=1e-12)


def test_factorize(capsys):
    code, out, _ = run(capsys, "factorize", A_RES)
    assert code == 0
    data = json.loads(out)
    assert len(data["factors"]) == 2


def test_factorize_degenerate_pairing(capsys):
    code, _, err = run(capsys, "factorize", A_RES, "--pairing", "[[2,1],[3,0]]")
    assert code == 1
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["error"] == "DegeneratePairing" and payload["stage"] == 1


def test_bad_inputs(tmp_path, capsys):
    code, _, err = run(capsys, "build", str(tmp_path / "missing.json"))
    assert code == 1 and json.loads(err)["exit_code"] == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"L0": [1, 2]}')
    assert run(capsys, "build", str(bad))[0] == 1
    bad.write_text("not json")
    assert run(capsys, "build", str(bad))[0] == 1
    assert run(capsys, "flow", B, "--steps", "0")[0] == 1


def test_verbose_after_subcommand():
    out = subprocess.run([sys.executable, "-m", "ratmat", "flow", B, "--mode", "dpv", "--steps", "1", "-v"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "swapped" in out.stderr


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ratmat", "flow", B, "--steps", "1"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "swapped" in out.stdout
