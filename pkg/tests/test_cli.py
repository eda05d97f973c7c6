import json
import math

import pytest

from ancient_heat.cli import run
from ancient_heat.domain import load_domain


@pytest.fixture
def work(tmp_path):
    (tmp_path / "p2.json").write_text('{"n": 2, "edges": [[0, 1, 1.0]], "origin": 0}\n')
    (tmp_path / "a.csv").write_text("vertex,value\n0,1\n1,0\n")
    (tmp_path / "e.csv").write_text("vertex,value\n0,1\n1,-1\n")
    return tmp_path


def test_solve_golden(work, capsys):
    d = str(work)
    code = run(["solve", "--domain", f"{d}/p2.json", "--data", f"{d}/a.csv", "--t", "1",
                "--direction", "backward", "--tol", "1e-10", "--out", f"{d}/u"])
    assert code == 0
    lines = (work / "u.csv").read_text().splitlines()
    assert lines[0] == "vertex,value"
    u0, u1 = (float(l.split(",")[1]) for l in lines[1:])
    assert u0 == pytest.approx((1 + math.e**2) / 2, abs=1e-10)
    assert u1 == pytest.approx((1 - math.e**2) / 2, abs=1e-10)
    rep = json.loads((work / "u.report.json").read_text())
    assert rep["tail_bound"] <= 1e-10 and rep["rho_bar"] == 2
    assert json.loads(capsys.readouterr().out) == rep


def test_forward_solve(work):
    d = str(work)
    assert run(["solve", "--domain", f"{d}/p2.json", "--data", f"{d}/a.csv", "--t", "1",
                "--direction", "forward", "--out", f"{d}/f"]) == 0
    u0 = float((work / "f.csv").read_text().splitlines()[1].split(",")[1])
    assert u0 == pytest.approx((1 + math.e**-2) / 2, abs=1e-12)


def test_check_golden(work, capsys):
    d = str(work)
    code = run(["check", "--domain", f"{d}/p2.json", "--data", f"{d}/e.csv", "--jmax", "32",
                "--A3", "1", "--A4", "0.5"])
    assert code == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["holds"] is False and rep["first_violation_j"] == 1
    assert rep["A4_hat"] == pytest.approx(math.log(2), abs=1e-9)
    code = run(["check", "--domain", f"{d}/p2.json", "--data", f"{d}/e.csv", "--jmax", "32",
                "--A3", "1", "--A4", str(math.log(2))])
    assert code == 0


def test_parse_failure(capsys):
    assert run(["solve", "--t", "abc"]) == 2
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "--t" in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["solve", "--domain", "x.json", "--data", "a.csv", "--t", "1", "--bogus"],
        ["check", "--domain", "p2.json", "--data", "e.csv", "--A3", "-1", "--A4", "1"],
        ["solve", "--domain", "p2.json", "--data", "a.csv", "--t", "1", "--tol", "0"],
        ["solve", "--domain", "p2.json", "--data", "a.csv", "--t", "-1"],
        ["reconstruct", "--domain", "p2.json", "--data", "a.csv", "--t", "1"],
        ["solve", "--domain", "missing.json", "--data", "a.csv", "--t", "1"],
        ["solve", "--domain", "p2.json", "--data", "bad.csv", "--t", "1"],
        ["domain", "build", "--lattice", "8xq"],
        ["solve", "--domain", "p2.json", "--data", "a.csv", "--t", "40", "--jcap", "5"],
        ["tychonov", "--nx", "0"],
    ],
)
def test_usage_errors(work, monkeypatch, capsys, argv):
    (work / "bad.csv").write_text("vertex,value\n0,1\n")
    monkeypatch.chdir(work)
    assert run(argv) == 2
    err = capsys.readouterr().err
    assert err.startswith("ancient-heat: error:") and err.count("\n") == 1


def test_malformed_domain_names_field(work, monkeypatch, capsys):
    (work / "neg.json").write_text('{"n": 2, "edges": [[0, 1, -1.0]]}')
    monkeypatch.chdir(work)
    assert run(["solve", "--domain", "neg.json", "--data", "a.csv", "--t", "1"]) == 2
    assert "nonpositive weight" in capsys.readouterr().err


def test_domain_commands(work, capsys):
    d = str(work)
    assert run(["domain", "build", "--lattice", "4x3", "--h", "0.5", "--boundary", "dirichlet", "--out", f"{d}/g.json"]) == 0
    g = load_domain(work / "g.json")
    assert g.n == 12 and g.lattice.boundary == "dirichlet"
    assert run(["domain", "random", "--n", "15", "--seed", "3", "--out", f"{d}/r.json"]) == 0
    first = (work / "r.json").read_bytes()
    assert run(["domain", "random", "--n", "15", "--seed", "3", "--out", f"{d}/r.json"]) == 0
    assert (work / "r.json").read_bytes() == first
    capsys.readouterr()
    assert run(["domain", "info", "--domain", f"{d}/g.json"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["n"] == 12 and info["rho_bar"] == pytest.approx(32.0)


def test_ladder_and_reconstruct(work, capsys):
    d = str(work)
    assert run(["ladder", "--domain", f"{d}/p2.json", "--data", f"{d}/e.csv", "--jmax", "8", "--out", f"{d}/lad"]) == 0
    rows = (work / "lad.csv").read_text().splitlines()
    assert rows[0] == "j,vertex,value" and rows[-1] == "8,1,-256"
    assert run(["reconstruct", "--domain", f"{d}/p2.json", "--data", f"{d}/e.csv", "--t", "-1", "--out", f"{d}/anc"]) == 0
    u0 = float((work / "anc.csv").read_text().splitlines()[1].split(",")[1])
    assert u0 == pytest.approx(math.e**2, rel=1e-12)


@pytest.mark.parametrize("exp", ["meanvalue", "caccioppoli", "induction", "derivsup", "remainder"])
def test_verify(work, exp):
    d = str(work)
    assert run(["domain", "build", "--lattice", "8x8", "--out", f"{d}/g.json"]) == 0
    assert run(["verify", "--experiment", exp, "--domain", f"{d}/g.json", "--jmax", "4", "--out", f"{d}/v"]) == 0
    rep = json.loads((work / "v.json").read_text())
    assert rep["pass"] is True and rep["seed"] == 0
    assert (work / "v.csv").read_text().startswith("inequality,j,")


def test_verify_with_data(work):
    d = str(work)
    assert run(["verify", "--experiment", "caccioppoli", "--domain", f"{d}/p2.json", "--data", f"{d}/e.csv",
                "--jmax", "3", "--out", f"{d}/v"]) == 0
    rep = json.loads((work / "v.json").read_text())
    assert all(r["ratio"] < 4 for r in rep["rows"])


def test_tychonov(work):
    d = str(work)
    assert run(["tychonov", "--x0", "0", "--x1", "2", "--nx", "41", "--t", "0.5", "--out", f"{d}/tych.csv"]) == 0
    lines = (work / "tych.csv").read_text().splitlines()
    assert lines[0] == "x,t,value,tail_estimate" and len(lines) == 42
    assert float(lines[1].split(",")[2]) == pytest.approx(math.exp(-4), rel=1e-15)
    cert = json.loads((work / "tych.certificate.json").read_text())
    assert cert["derivatives_at_zero"] == [0] * 10 and cert["gap"] > 0


def test_thread_env(work, monkeypatch):
    monkeypatch.setenv("ANCIENT_HEAT_THREADS", "1")
    d = str(work)
    assert run(["solve", "--domain", f"{d}/p2.json", "--data", f"{d}/a.csv", "--t", "1"]) == 0


def test_deterministic_outputs(work):
    d = str(work)
    outs = []
    for k in range(2):
        run(["domain", "build", "--lattice", "8x8", "--out", f"{d}/g.json"])
        run(["verify", "--experiment", "induction", "--domain", f"{d}/g.json", "--jmax", "4", "--seed", "7",
             "--out", f"{d}/v{k}"])
        outs.append(((work / f"v{k}.json").read_bytes(), (work / f"v{k}.csv").read_bytes()))
    assert outs[0] == outs[1]
