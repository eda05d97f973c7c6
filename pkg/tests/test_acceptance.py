"""Numbered acceptance criteria; a pass/fail line per criterion is printed
in the terminal summary."""
import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from ancient_heat.counterexample import tychonov_eval, tychonov_f_derivative, tychonov_residual
from ancient_heat.domain import build_lattice, laplacian, path_graph, random_connected_graph, spectral_radius_bound
from ancient_heat.inequalities import (
    taylor_remainder_decay,
    verify_caccioppoli,
    verify_derivative_sup,
    verify_induction_bound,
    verify_mean_value,
)
from ancient_heat.ladder import GrowthBound, build_ladder, check_solvability, estimate_growth
from ancient_heat.oracle import ancient_window, eigendecompose, heat_evolve_exact
from ancient_heat.series import evaluate_series, roundtrip_error, solve_backward

# tolerances pinned by the acceptance criteria
SERIES_TOL = 1e-10
SERIES_REL = 1e-9
SERIES_BUDGET_S = 10.0
P2_TOL = 1e-9
SPECTRAL_REL = 1e-8
A4_TOL = 1e-6
MARGIN_TOL = 1e-9
ROUNDTRIP_REL = 1e-6
R2_MIN = 0.9
REMAINDER_RTOL = 1e-6
CHAIN_BUDGET_S = 60.0
SCALE_REL = 1e-12
TYCHONOV_TOL = 1e-7
RESIDUAL_MAX = 1e-4


def _random_cases(seed=0, count=20):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(5, 61))
        g = random_connected_graph(n, rng, 2.0 / n, (0.25, 1.0))
        yield g, rng.standard_normal(n)


@pytest.mark.acceptance(1, "series agrees with the spectral oracle on 20 random graphs")
def test_criterion_1_oracle_equivalence():
    elapsed = 0.0
    checked = 0
    for g, a in _random_cases():
        op = laplacian(g)
        rho = spectral_radius_bound(op)
        start = time.perf_counter()
        spec = eigendecompose(op)
        for t in (-1.0, -0.1, 0.5):
            assert abs(t) * rho <= 20
            u, _ = evaluate_series(op, a, t, SERIES_TOL)
            ref = heat_evolve_exact(spec, a, t)
            bound = max(SERIES_TOL, SERIES_REL * np.max(np.abs(ref)))
            assert np.max(np.abs(u - ref)) <= bound
            checked += 1
        elapsed += time.perf_counter() - start
    assert checked == 60
    assert elapsed < SERIES_BUDGET_S


@pytest.mark.acceptance(2, "P2 closed form at t = -1")
def test_criterion_2_p2_closed_form():
    u, _ = evaluate_series(laplacian(path_graph(2)), [1.0, 0.0], -1.0, 1e-12)
    e2 = math.exp(2.0)
    assert u[0] == pytest.approx(0.5 * (1 + e2), abs=P2_TOL)
    assert u[1] == pytest.approx(0.5 * (1 - e2), abs=P2_TOL)
    assert u[0] == pytest.approx(4.19452805, abs=1e-8)


@pytest.mark.acceptance(3, "ladder shift identity and spectral cross-check")
def test_criterion_3_ladder_identities():
    for g, a in _random_cases(seed=1, count=10):
        op = laplacian(g)
        lad = build_ladder(op, a, 20)
        for j in range(20):
            assert np.array_equal(op.matrix @ lad.fields[j], lad.fields[j + 1])
        spec = eigendecompose(op)
        c = spec.eigenvectors.T @ a
        for j in range(21):
            ref = spec.eigenvectors @ (spec.eigenvalues**j * c)
            scale = np.max(np.abs(ref))
            assert np.max(np.abs(lad.fields[j] - ref)) <= SPECTRAL_REL * scale


@pytest.mark.acceptance(4, "eigenvector data meets the growth cap (1, ln 2) with zero margin")
def test_criterion_4_growth_forward():
    op = laplacian(path_graph(2))
    lad = build_ladder(op, [1.0, -1.0], 32)
    est = estimate_growth(lad)
    assert abs(est.A4_hat - math.log(2)) <= A4_TOL
    v = check_solvability(lad, GrowthBound(1.0, math.log(2)))
    assert v.holds
    assert abs(v.margin) <= MARGIN_TOL


@pytest.mark.acceptance(5, "backward solutions obey e^(t rho) growth; P10 round trip")
def test_criterion_5_growth_converse():
    for g, a in _random_cases(seed=2, count=5):
        op = laplacian(g)
        rho = spectral_radius_bound(op)
        for t in (0.1, 0.5, 1.0, 2.0):
            u = solve_backward(op, a, t, 1e-12)
            assert np.max(np.abs(u)) <= np.max(np.abs(a)) * math.exp(t * rho) * (1 + 1e-12)
    op = laplacian(path_graph(10))
    rho = spectral_radius_bound(op)
    a = np.random.default_rng(5).standard_normal(10)
    err, cond = roundtrip_error(op, a, 5.0 / rho, 1e-13)
    assert cond == pytest.approx(math.exp(5.0))
    assert err <= ROUNDTRIP_REL


def _lattice_window(seed):
    g = build_lattice((8, 8), 1.0, "neumann")
    op = laplacian(g)
    spec = eigendecompose(op)
    a = np.random.default_rng(seed).standard_normal(g.n)
    return op, ancient_window(spec, a, -9.0, 0.01, band=2.0)


@pytest.mark.acceptance(6, "proof chain on an 8x8 neumann lattice, jmax = 4")
def test_criterion_6_proof_chain():
    start = time.perf_counter()
    op, u = _lattice_window(0)
    for check in (verify_caccioppoli, verify_induction_bound, verify_derivative_sup):
        rep = check(u, op, 4)
        assert rep.passed, rep.inequality
        assert rep.fit is not None and rep.fit["r2"] >= R2_MIN
    for x in (0, 27, 63):
        for t in (-0.5, -1.0, -3.0):
            rem = taylor_remainder_decay(u, op, x, t, 12, REMAINDER_RTOL)
            assert not rem.violated
    assert time.perf_counter() - start < CHAIN_BUDGET_S


@pytest.mark.acceptance(7, "inequality ratios are invariant under u -> 1000 u")
def test_criterion_7_scale_invariance():
    op, u = _lattice_window(3)
    big = u.scaled(1e3)
    for check in (verify_mean_value, verify_caccioppoli, verify_induction_bound, verify_derivative_sup):
        r1 = check(u, op, 4).ratios
        r2 = check(big, op, 4).ratios
        np.testing.assert_allclose(r2, r1, rtol=SCALE_REL, atol=0)


@pytest.mark.acceptance(8, "Tychonov: flat at t = 0, f(0.5) = e^-4, small PDE residual")
def test_criterion_8_tychonov():
    for k in range(41):
        assert tychonov_f_derivative(k, 0.0) == 0.0
    val = tychonov_eval(0.0, 0.5).value
    assert abs(val - 0.01831564) <= TYCHONOV_TOL
    assert val == pytest.approx(math.exp(-4.0), rel=1e-15)
    assert tychonov_residual(0.3, 0.6, 1e-3) <= RESIDUAL_MAX


_REPORT_SCRIPT = r"""
import sys
from pathlib import Path
from ancient_heat.cli import run

out = Path(sys.argv[1])
(out / "p2.json").write_text('{"n": 2, "edges": [[0, 1, 1.0]], "origin": 0}\n')
(out / "a.csv").write_text("vertex,value\n0,1\n1,0\n")
(out / "e.csv").write_text("vertex,value\n0,1\n1,-1\n")
p = lambda name: str(out / name)
codes = [
    run(["domain", "build", "--lattice", "8x8", "--out", p("g.json")]),
    run(["domain", "random", "--n", "30", "--seed", "0", "--out", p("r.json")]),
    run(["solve", "--domain", p("p2.json"), "--data", p("a.csv"), "--t", "1", "--tol", "1e-10", "--out", p("u")]),
    run(["reconstruct", "--domain", p("p2.json"), "--data", p("a.csv"), "--t", "-2", "--out", p("anc")]),
    run(["ladder", "--domain", p("p2.json"), "--data", p("e.csv"), "--jmax", "16", "--out", p("lad")]),
    run(["check", "--domain", p("p2.json"), "--data", p("e.csv"), "--jmax", "32", "--A3", "1", "--A4", "0.5", "--out", p("chk")]),
]
for exp in ("meanvalue", "caccioppoli", "induction", "derivsup", "remainder"):
    codes.append(run(["verify", "--experiment", exp, "--domain", p("g.json"), "--jmax", "4", "--seed", "0", "--out", p("v_" + exp)]))
codes.append(run(["tychonov", "--x0", "0", "--x1", "2", "--nx", "41", "--t", "0.5", "--out", p("tych.csv")]))
import json
print(json.dumps(codes))
"""


def _report_run(out: Path) -> dict[str, bytes]:
    out.mkdir()
    proc = subprocess.run(
        [sys.executable, "-c", _REPORT_SCRIPT, str(out)], capture_output=True, text=True, check=True
    )
    codes = json.loads(proc.stdout.strip().splitlines()[-1])
    assert codes == [0, 0, 0, 0, 0, 1] + [0] * 6
    return {f.name: f.read_bytes() for f in sorted(out.iterdir())}


@pytest.mark.acceptance(9, "two seed-0 runs write byte-identical reports")
def test_criterion_9_determinism(tmp_path):
    first = _report_run(tmp_path / "run1")
    second = _report_run(tmp_path / "run2")
    assert len(first) >= 20
    assert first.keys() == second.keys()
    for name in first:
        assert first[name] == second[name], name
