import json
import subprocess
import sys
from pathlib import Path

import pytest

from binpack_games.cli import main

DATA = Path(__file__).parent / "data"
J1, J1P, J2, J2P = (str(DATA / f) for f in ("j1.json", "j1_packing.json", "j2.json", "j2_packing.json"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_pack_opt_j1(capsys):
    code, out, _ = run(capsys, "pack", "--alg", "opt", "--instance", J1)
    assert code == 0 and out["num_bins"] == 2 and out["lower_bound"] == 2


def test_pack_nfi_on_bundle(capsys, tmp_path):
    bundle = tmp_path / "spos.json"
    code, _, _ = run(capsys, "generate", "--family", "spos-tau", "--params", "j=4,N=72", "--out", str(bundle))
    assert code == 0
    data = json.loads(bundle.read_text())
    assert data["claimed_ratio"] == "29/18"
    assert set(data) >= {"instance", "reference_packing", "reference_opt", "claimed_ratio", "params"}
    code, out, _ = run(capsys, "pack", "--alg", "nfi", "--instance", str(bundle))
    assert code == 0 and out["num_bins"] == 116


def test_pack_ff_in_ne_order(capsys, tmp_path):
    bundle = tmp_path / "ff17.json"
    run(capsys, "generate", "--family", "ff17", "--params", "ell=3", "--out", str(bundle))
    code, out, _ = run(capsys, "pack", "--alg", "ff", "--order", "ne-reference", "--instance", str(bundle))
    assert code == 0 and out["num_bins"] == 51
    code, out, _ = run(capsys, "check", "--instance", str(bundle), "--packing", str(bundle), "--kind", "ne")
    assert code == 0 and out["is_ne"] == "true" and out["compressed"]


def test_pack_explicit_order_and_enumerate(capsys):
    code, out, _ = run(capsys, "pack", "--alg", "ff", "--order", "0,1,2,3", "--instance", J1)
    assert out["num_bins"] == 2
    code, out, _ = run(capsys, "pack", "--alg", "gsc", "--tie", "enumerate-all", "--instance", J2)
    assert code == 0 and out["bin_counts"] == [3]
    code, _, err = run(capsys, "pack", "--alg", "ff", "--order", "0,1", "--instance", J1)
    assert code == 1 and "permutation" in err


def test_round_trip_pack_then_check(capsys, tmp_path):
    for alg in ("gsc", "steps"):
        out_file = tmp_path / f"{alg}.json"
        run(capsys, "pack", "--alg", alg, "--instance", J2, "--out", str(out_file))
        code, out, _ = run(capsys, "check", "--instance", J2, "--packing", str(out_file), "--kind", "ne")
        assert code == 0 and out["is_ne"] == "true"


def test_check_examples(capsys, tmp_path):
    code, out, _ = run(capsys, "check", "--instance", J1, "--packing", J1P, "--kind", "all")
    assert code == 0
    assert (out["is_ne"], out["is_sne"], out["is_wpo"], out["is_spo"]) == ("true", "true", "true", "false")
    code, out, _ = run(capsys, "check", "--instance", J2, "--packing", J2P, "--kind", "sne")
    assert out["is_sne"] == "false" and sorted(out["witness"]["sne"]["items"]) == [2, 3, 4, 5]
    code, _, err = run(capsys, "check", "--instance", J1, "--packing", str(DATA / "bad_packing.json"))
    assert code == 1 and "not a partition" in err


def test_check_unknown_exit_code(capsys, tmp_path):
    inst = tmp_path / "big.json"
    inst.write_text(json.dumps({"items": [{"size": "1/50", "count": 40}]}))
    pk = tmp_path / "one.json"
    pk.write_text(json.dumps({"bins": [list(range(40))]}))
    code, out, _ = run(capsys, "check", "--instance", str(inst), "--packing", str(pk), "--kind", "sne")
    assert code == 2 and out["is_sne"] == "unknown"


def test_converge_bound(capsys):
    code, out, _ = run(capsys, "converge-bound", "--n", "6", "--oracle")
    assert code == 0 and out == {"n": 6, "formula": 8, "oracle": 8, "match": True}
    code, out, _ = run(capsys, "converge-bound", "--n", "10")
    assert out == {"n": 10, "formula": 20}
    code, out, _ = run(capsys, "converge-bound", "--n", "3", "--oracle")
    assert out["oracle"] == out["formula"] == 2
    code, _, err = run(capsys, "converge-bound", "--n", "9", "--oracle")
    assert code == 2 and "cap" in err


def test_census(capsys, tmp_path):
    csv_file = tmp_path / "rows.csv"
    code, out, _ = run(capsys, "census", "--instance", J2, "--csv", str(csv_file))
    assert code == 0 and out["prices"]["pos"] == "1"
    assert out["census"]["feasible"] == 128
    assert len(csv_file.read_text().splitlines()) == 129


def test_dynamics_command(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, out, _ = run(capsys, "dynamics", "--instance", J2, "--policy", "random", "--seed", "3",
                       "--trace", str(trace))
    assert code == 0 and out["final_is_ne"] and out["final_bins"] <= out["start_bins"]
    lines = trace.read_text().splitlines()
    assert len(lines) == out["steps"] + 2
    code, out, _ = run(capsys, "dynamics", "--staircase", "10")
    assert code == 0 and out["steps"] == out["formula"] == 20


def test_weights_check(capsys):
    code, out, err = run(capsys, "weights-check", "--fn", "table2", "--bound", "17/10", "--trials", "2000",
                         "--seed", "7")
    assert code == 0 and all(r["passed"] for r in out["checks"])
    assert {r["mode"] for r in out["checks"]} == {"random", "grid-exact"}
    assert "PASS" in err
    code, out, err = run(capsys, "weights-check", "--fn", "omega_bc", "--bound", "1.691", "--mode", "random",
                         "--trials", "2000")
    assert code == 3 and "FAIL" in err


def test_decimal_annotation(capsys):
    code, out, _ = run(capsys, "census", "--instance", J1, "--decimal")
    assert out["prices"]["poa"] == "3/2" and out["prices"]["poa_decimal"] == "1.500000000000"


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["pack", "--alg", "zz", "--instance", J1])
    assert exc.value.code == 1
    code, _, err = run(capsys, "generate", "--family", "ff17", "--params", "ell")
    assert code == 1
    code, _, err = run(capsys, "pack", "--alg", "ff", "--instance", "/nonexistent.json")
    assert code == 1


def test_repeated_runs_are_byte_identical(tmp_path):
    cmd = [sys.executable, "-m", "binpack_games", "dynamics", "--instance", J2, "--policy", "random", "--seed", "9"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["seed"] == 9
