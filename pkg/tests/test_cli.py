import json
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from hdswap import cli
from hdswap.measure import HeraldReport

SCHEMA = json.loads(resources.files("hdswap").joinpath("schema/report.schema.json").read_text())


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_swap_writes_valid_stable_reports(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    code, out, _ = run(capsys, "swap", "--dim", "4", "--detector", "threshold", "--out", str(a))
    assert code == 0
    assert "SWAP_4D\tevents=4\tprobability=4/512" in out
    assert run(capsys, "swap", "--dim", "4", "--detector", "threshold", "--out", str(b))[0] == 0
    for name in ("report.json", "report.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    data = json.loads((a / "report.json").read_text())
    jsonschema.validate(data, SCHEMA)
    assert data["dyadic"]["SWAP_4D"] == "4/512"
    assert data["aggregates"]["SWAP_4D"] == {"num": "1", "den": "128"}
    assert data["manifest"]["config"] == data["config"]
    assert "time" not in json.dumps(data["manifest"])
    header = (a / "report.csv").read_text().splitlines()[0]
    assert header == "kept,pattern,coincidence,kept_coincident,probability,class,fidelity_to_target"


def test_swap_three_dim_counts(tmp_path, capsys):
    code, out, _ = run(capsys, "swap", "--dim", "3", "--variant", "A1", "--detector", "pnr", "--out", str(tmp_path))
    assert code == 0
    counts = json.loads((tmp_path / "report.json").read_text())["event_counts"]
    assert (counts["total_full"], counts["coincidence_full"], counts["success"]) == (772, 68, 4)


def test_swap_float_matches_exact(tmp_path, capsys):
    run(capsys, "swap", "--dim", "4", "--out", str(tmp_path / "x"))
    run(capsys, "swap", "--dim", "4", "--backend", "float", "--ancilla-phase", "0", "--out", str(tmp_path / "f"))
    x = json.loads((tmp_path / "x" / "report.json").read_text())
    f = json.loads((tmp_path / "f" / "report.json").read_text())
    jsonschema.validate(f, SCHEMA)
    for cls, frac in x["aggregates"].items():
        assert f["aggregates"][cls] == pytest.approx(int(frac["num"]) / int(frac["den"]), abs=1e-12)


def test_preset(capsys):
    code, out, _ = run(capsys, "swap", "--preset", "hyper4d")
    assert code == 0 and "SWAP_4D\tevents=16" in out


def test_herald_four_dim(capsys):
    code, out, _ = run(capsys, "herald", "--pattern", "b'':3,e':1,f':4,c'':2")
    assert code == 0
    assert "probability 1/512" in out
    assert "state (|1,2⟩−|2,1⟩+|3,4⟩−|4,3⟩)/2" in out
    assert "hyper (|H(te),V(te)⟩−|V(te),H(te)⟩+|H(tl),V(tl)⟩−|V(tl),H(tl)⟩)/2" in out


def test_herald_singlet(capsys):
    code, out, _ = run(capsys, "herald", "--pattern", "b'':2,e':1,f':1,c'':2")
    assert code == 0 and "state (|1,2⟩−|2,1⟩)/√2" in out and "class SWAP_2D" in out


def test_herald_zero_probability(capsys):
    code, out, _ = run(capsys, "herald", "--pattern", "b'':1,e':1,f':1,c'':1")
    assert code == 0 and "probability 0" in out


def test_herald_bad_patterns(capsys):
    assert run(capsys, "herald", "--pattern", "b'':x")[0] == 1
    assert run(capsys, "herald", "--pattern", "a:1,e':1")[0] == 1


@pytest.mark.parametrize(
    "argv,expected",
    [
        (["--eta", "1", "--n", "3"], "1.0"),
        (["--eta", "0.95", "--n", "5"], "0.7737809375"),
        (["--eta", "0.9", "--n", "3"], "0.729"),
    ],
)
def test_decay(capsys, argv, expected):
    code, out, _ = run(capsys, "decay", *argv)
    assert code == 0 and out.strip() == expected


def test_decay_sweep_csv(capsys):
    code, out, _ = run(capsys, "decay", "--eta", "0.9", "0.95", "--n", "0", "--n-max", "3")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "eta,n,fidelity" and len(lines) == 9
    assert lines[4] == "0.9,3,0.729"


def test_count(capsys):
    code, out, _ = run(capsys, "count", "--dim", "4")
    assert code == 0 and json.loads(out)["success"] == 4


@pytest.mark.parametrize(
    "argv",
    [
        ["swap", "--dim", "7"],
        ["swap", "--dim", "4", "--variant", "A1"],
        ["swap", "--dim", "4", "--ancilla-phase", "0.5"],
        ["swap", "--dim", "6", "--ancilla", "symmetric"],
        ["decay", "--eta", "1.5", "--n", "2"],
        ["decay", "--eta", "x", "--n", "2"],
        [],
    ],
)
def test_bad_input_exits_one(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_invariant_violation_exits_two(monkeypatch, capsys):
    monkeypatch.setattr(HeraldReport, "total_probability", lambda self, kept=None: 0)
    code, _, err = run(capsys, "swap", "--dim", "4")
    assert code == 2 and "invariant" in err


def test_matches_golden_files(tmp_path, capsys):
    golden = Path(__file__).parent / "fixtures" / "d4_threshold_fixed"
    assert run(capsys, "swap", "--dim", "4", "--out", str(tmp_path))[0] == 0
    for name in ("report.json", "report.csv"):
        assert (tmp_path / name).read_bytes() == (golden / name).read_bytes()
