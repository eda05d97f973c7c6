"""Numerical checks of the interior estimates behind time analyticity.

Every check works on sampled caloric data ``u(x, t)`` over a window
``[t_0, 0]`` and on space-time cubes ``Q(0, j) = B(0, j) x [-j, 0]`` built
from hop balls around the domain origin. Integrals are plain sums: unit
weight per vertex times the time step. Time derivatives are taken as
powers of the Laplacian, ``d^j u / dt^j = Delta^j u``, which is exact for
caloric data.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .domain import DomainGraph, LaplacianOperator, SpaceTimeField, hop_distance
from .ladder import build_ladder

DEFAULTS = {"r2_min": 0.9, "slope_excess_max": 0.25, "remainder_rtol": 1e-6}


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class SpaceTimeCube:
    j: float
    vertex_mask: np.ndarray
    time_mask: np.ndarray

    @property
    def mask(self) -> np.ndarray:
        return self.vertex_mask[:, None] & self.time_mask[None, :]

    def volume(self, dt: float) -> float:
        return float(self.vertex_mask.sum() * self.time_mask.sum() * dt)


def space_time_cube(distances: np.ndarray, times: np.ndarray, j: float) -> SpaceTimeCube:
    slack = 1e-9 * max(1.0, abs(j))
    return SpaceTimeCube(j, np.asarray(distances) <= j, times >= -j - slack)


def cutoff_profile(distances: np.ndarray, times: np.ndarray, j: int) -> np.ndarray:
    """Lipschitz cutoff: 1 on Q(0, j), 0 outside Q(0, j + 0.5).

    The spatial factor is the indicator of the hop ball, since hop distances
    are integers and no vertex lies in the half-unit shell; the time factor
    ramps linearly from 0 at ``-(j + 0.5)`` to 1 at ``-j``.
    """
    space = (np.asarray(distances) <= j).astype(float)
    ramp = np.clip((np.asarray(times) + j + 0.5) / 0.5, 0.0, 1.0)
    return space[:, None] * ramp[None, :]


@dataclass(frozen=True)
class MeanValueParams:
    """Parameters of the general mean value inequality.

    Only ``p = 2`` with unit shifts is executed.
    """

    p: float = 2.0
    delta: float = 0.5
    eta: float = 0.5
    T1: float = 0.5
    T2: float = 1.0

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError("p must be positive")
        if not (0 < self.delta < 1 and 0 < self.eta < 1):
            raise ValueError("delta and eta must lie in (0, 1)")
        if not self.T1 < self.T2:
            raise ValueError("need T1 < T2")


@dataclass
class InequalityReport:
    inequality: str
    rows: list[dict]
    fit: dict | None
    constants: dict
    passed: bool
    config: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    window: tuple[float, float] = (0.0, 0.0)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r["ratio"] for r in self.rows])

    def to_dict(self) -> dict:
        return {
            "inequality": self.inequality,
            "rows": self.rows,
            "fit": self.fit,
            "constants": self.constants,
            "pass": self.passed,
            "config": self.config,
            "notes": self.notes,
            "window": list(self.window),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["inequality", "j", "lhs", "rhs", "ratio"])
        for r in self.rows:
            w.writerow([self.inequality, r["j"]] + [format(float(r[k]), ".17g") for k in ("lhs", "rhs", "ratio")])
        return buf.getvalue()


def loglinear_fit(x, y) -> dict | None:
    """Least-squares line through (x, y); None with fewer than two points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return None
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ np.array([slope, intercept])
    ss_res = float(res @ res)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    tiny = 1e-24 * max(1.0, float(y @ y))
    if ss_tot <= tiny:
        r2 = 1.0 if ss_res <= tiny else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return {"slope": float(slope), "intercept": float(intercept), "r2": float(r2)}


def _ratio(lhs: float, rhs: float) -> float:
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs == 0 else math.inf


def _row(j, lhs, rhs) -> dict:
    return {"j": int(j), "lhs": float(lhs), "rhs": float(rhs), "ratio": float(_ratio(lhs, rhs))}


def _setup(u: SpaceTimeField, domain, reach: float):
    g = domain.graph if isinstance(domain, LaplacianOperator) else domain
    if not isinstance(g, DomainGraph):
        raise TypeError("domain must be a DomainGraph or LaplacianOperator")
    if u.values.shape[0] != g.n:
        raise WindowError(f"field has {u.values.shape[0]} vertices, domain has {g.n}")
    if u.times.size < 2:
        raise WindowError("need at least two time samples")
    if u.times[0] > -reach + 1e-9 * reach:
        raise WindowError(f"window starts at {u.times[0]:g}, needs to cover [-{reach:g}, 0]")
    return g, hop_distance(g)


def _integral(values: np.ndarray, cube: SpaceTimeCube, dt: float) -> float:
    return float(np.sum(values[cube.mask]) * dt)


def _powers(op: LaplacianOperator, values: np.ndarray, jmax: int) -> list[np.ndarray]:
    out = [values]
    for _ in range(jmax):
        out.append(op.matrix @ out[-1])
    return out


def _loglog_check(name, rows, r2_min, slope_excess_max, const_name):
    """Shared pass logic for bounds with a j-independent constant.

    Fits ``log lhs`` against ``log rhs``; a slope above ``1 + excess``
    would mean the ratio grows without bound, so no uniform constant.
    """
    ratios = np.array([r["ratio"] for r in rows])
    finite = bool(np.all(np.isfinite(ratios)))
    use = [r for r in rows if r["lhs"] > 0 and r["rhs"] > 0]
    fit = loglinear_fit([math.log(r["rhs"]) for r in use], [math.log(r["lhs"]) for r in use])
    if fit is not None:
        fit["x"] = "log_rhs"
    ok = finite and (fit is None or (fit["r2"] >= r2_min and fit["slope"] <= 1.0 + slope_excess_max))
    const = float(ratios.max()) if ratios.size else 0.0
    return InequalityReport(
        name, rows, fit, {const_name: const}, ok,
        {"r2_min": r2_min, "slope_excess_max": slope_excess_max},
    )


def verify_mean_value(
    u: SpaceTimeField,
    domain,
    jmax: int,
    params: MeanValueParams | None = None,
    r2_min: float = DEFAULTS["r2_min"],
    slope_excess_max: float = DEFAULTS["slope_excess_max"],
) -> InequalityReport:
    """``sup_{Q(0,j)} u^2`` against ``int_{Q(0,j+1)} u^2`` for j = 1..jmax."""
    params = params or MeanValueParams()
    if params.p != 2:
        raise NotImplementedError("only the p = 2 mean value inequality is executed")
    g, d = _setup(u, domain, jmax + 1)
    u2 = u.values**2
    rows = []
    for j in range(1, jmax + 1):
        inner = space_time_cube(d, u.times, j)
        outer = space_time_cube(d, u.times, j + 1)
        rows.append(_row(j, float(u2[inner.mask].max()), _integral(u2, outer, u.dt)))
    rep = _loglog_check("meanvalue", rows, r2_min, slope_excess_max, "C1")
    rep.window = (float(u.times[0]), 0.0)
    rep.notes.append("curvature constant K0 = 0; exp(C2 sqrt(K0) j) = 1")
    return rep


def verify_caccioppoli(
    u: SpaceTimeField,
    op: LaplacianOperator,
    jmax: int,
    r2_min: float = DEFAULTS["r2_min"],
    slope_excess_max: float = DEFAULTS["slope_excess_max"],
) -> InequalityReport:
    """``int_{Q(0,j)} (Delta u)^2`` against ``int_{Q(0,j+1)} u^2``; max ratio estimates C0."""
    g, d = _setup(u, op, jmax + 1)
    lap2 = (op.matrix @ u.values) ** 2
    u2 = u.values**2
    rows = []
    for j in range(1, jmax + 1):
        inner = space_time_cube(d, u.times, j)
        outer = space_time_cube(d, u.times, j + 1)
        rows.append(_row(j, _integral(lap2, inner, u.dt), _integral(u2, outer, u.dt)))
    rep = _loglog_check("caccioppoli", rows, r2_min, slope_excess_max, "C0")
    rep.window = (float(u.times[0]), 0.0)
    return rep


def verify_induction_bound(
    u: SpaceTimeField,
    op: LaplacianOperator,
    jmax: int,
    r2_min: float = DEFAULTS["r2_min"],
) -> InequalityReport:
    """``int_{Q(0,j+1)} (Delta^j u)^2 / int_{Q(0,2j+1)} u^2``, fitted as ``C0^j``."""
    g, d = _setup(u, op, 2 * jmax + 1)
    pw = _powers(op, u.values, jmax)
    u2 = u.values**2
    rows = []
    for j in range(1, jmax + 1):
        inner = space_time_cube(d, u.times, j + 1)
        outer = space_time_cube(d, u.times, 2 * j + 1)
        rows.append(_row(j, _integral(pw[j] ** 2, inner, u.dt), _integral(u2, outer, u.dt)))
    ratios = np.array([r["ratio"] for r in rows])
    finite = bool(np.all(np.isfinite(ratios)))
    use = [r for r in rows if r["ratio"] > 0]
    fit = loglinear_fit([r["j"] for r in use], [math.log(r["ratio"]) for r in use])
    consts = {}
    if fit is not None:
        fit["x"] = "j"
        consts = {"log_C0": fit["slope"], "C0": math.exp(fit["slope"])}
    ok = finite and (fit is None or fit["r2"] >= r2_min)
    return InequalityReport(
        "induction", rows, fit, consts, ok, {"r2_min": r2_min}, window=(float(u.times[0]), 0.0)
    )


def verify_derivative_sup(
    u: SpaceTimeField,
    op: LaplacianOperator,
    jmax: int,
    r2_min: float = DEFAULTS["r2_min"],
) -> InequalityReport:
    """``s_j = sup_{Q(0,j)} |Delta^j u|`` for j = 0..jmax, fitted as ``C1 C3^j``.

    Rows carry ``lhs = s_j`` and ``rhs = s_0``, so ``ratio`` is the growth
    relative to the starting sup.
    """
    g, d = _setup(u, op, max(jmax, 1))
    pw = _powers(op, u.values, jmax)
    sups = []
    for j in range(jmax + 1):
        cube = space_time_cube(d, u.times, j)
        sups.append(float(np.abs(pw[j][cube.mask]).max()))
    rows = [_row(j, s, sups[0]) for j, s in enumerate(sups)]
    finite = bool(np.all(np.isfinite([r["ratio"] for r in rows])))
    use = [(j, s) for j, s in enumerate(sups) if s > 0]
    fit = loglinear_fit([j for j, _ in use], [math.log(s) for _, s in use])
    consts = {}
    if fit is not None:
        fit["x"] = "j"
        consts = {"C1": math.exp(fit["intercept"]), "C3": math.exp(fit["slope"])}
    ok = finite and (fit is None or fit["r2"] >= r2_min)
    return InequalityReport(
        "derivsup", rows, fit, consts, ok, {"r2_min": r2_min}, window=(float(u.times[0]), 0.0)
    )


@dataclass
class RemainderReport:
    vertex: int
    t: float
    rows: list[dict]
    violated: bool
    decays: bool
    rtol: float

    @property
    def passed(self) -> bool:
        return not self.violated

    def to_dict(self) -> dict:
        return {
            "inequality": "remainder",
            "vertex": self.vertex,
            "t": self.t,
            "rows": self.rows,
            "violated": self.violated,
            "decays": self.decays,
            "rtol": self.rtol,
            "pass": self.passed,
        }

    def to_csv(self) -> str:
        lines = ["inequality,j,remainder,bound"]
        lines += [f"remainder,{r['j']},{r['remainder']:.17g},{r['bound']:.17g}" for r in self.rows]
        return "\n".join(lines) + "\n"


def taylor_remainder_decay(
    u: SpaceTimeField,
    op: LaplacianOperator,
    x: int,
    t: float,
    jmax: int,
    rtol: float = DEFAULTS["remainder_rtol"],
) -> RemainderReport:
    """Taylor remainder at vertex ``x`` and sample time ``t <= 0``.

    ``remainder_j = |u(x,t) - sum_{i<j} Delta^i u(x,0) t^i / i!|`` and
    ``bound_j = |t|^j / j! * max_{s in [t, 0]} |Delta^j u(x, s)|``, the
    max taken over the samples.
    """
    if t > 0:
        raise ValueError("t must be <= 0")
    if not 0 <= x < op.n:
        raise ValueError(f"vertex {x} out of range")
    k = int(np.argmin(np.abs(u.times - t)))
    if abs(u.times[k] - t) > 1e-9 * max(1.0, abs(t)):
        raise WindowError(f"t = {t} is not a sample time of the window")
    t = float(u.times[k])
    seg = u.values[:, k:]
    coeffs = build_ladder(op, u.values[:, -1], jmax).fields[:, x]
    target = u.values[x, k]
    pw = seg
    rows = []
    partial = 0.0
    term = 1.0  # t^j / j!
    for j in range(jmax + 1):
        rem = abs(target - partial)
        bound = abs(term) * float(np.abs(pw[x]).max())
        rows.append({"j": j, "remainder": float(rem), "bound": float(bound)})
        partial += coeffs[j] * term
        term *= t / (j + 1)
        if j < jmax:
            pw = op.matrix @ pw
    violated = any(r["remainder"] > r["bound"] * (1 + rtol) for r in rows)
    rems = [r["remainder"] for r in rows]
    decays = rems[-1] == 0.0 or rems[-1] <= 1e-2 * max(rems)
    return RemainderReport(int(x), t, rows, violated, decays, rtol)


EXPERIMENTS = ("meanvalue", "caccioppoli", "induction", "derivsup", "remainder")
