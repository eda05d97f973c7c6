"""Time-Taylor series ``u(t) = sum_j a_j t^j / j!`` with a rigorous truncation bound.

The bound uses ``||Delta^j a||_inf <= rho^j ||a||_inf`` where ``rho`` is the
Gershgorin bound, which for a graph Laplacian equals the induced
infinity-norm. Long times are split into ``k`` steps with
``|t| rho / k <= max_step`` and the series is rebuilt at each step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import LaplacianOperator, check_field, spectral_radius_bound
from .ladder import CoefficientLadder, build_ladder

J_MAX = 512
MAX_STEP = 8.0


class TruncationError(ArithmeticError):
    def __init__(self, achieved: float, tol: float, j_max: int):
        super().__init__(f"tail bound {achieved:.3e} > tol {tol:.3e} at hard cap J={j_max}")
        self.achieved = achieved
        self.tol = tol
        self.j_max = j_max


@dataclass(frozen=True)
class TruncationReport:
    J_used: int
    tail_bound: float
    requested_tol: float
    rho_bar: float
    splits: int = 1
    J_per_step: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "J_used": self.J_used,
            "tail_bound": self.tail_bound,
            "tol": self.requested_tol,
            "rho_bar": self.rho_bar,
            "splits": self.splits,
        }


def log_tail(x: float, J: int) -> float:
    """Upper bound on ``log sum_{j>J} x^j / j!`` for ``x >= 0``."""
    if x == 0.0:
        return -math.inf
    log_first = (J + 1) * math.log(x) - math.lgamma(J + 2)
    ratio = x / (J + 2)
    if ratio < 1.0:
        return log_first - math.log1p(-ratio)
    return x  # sum of the whole series


def truncation_index(x: float, log_target: float, j_max: int = J_MAX) -> tuple[int, float]:
    """Smallest J with ``log_tail(x, J) <= log_target``; raises past ``j_max``."""
    J = 0
    while True:
        lt = log_tail(x, J)
        if lt <= log_target:
            return J, lt
        if J >= j_max:
            raise TruncationError(math.exp(min(lt, 700.0)), math.exp(min(log_target, 700.0)), j_max)
        J += 1


def horner(coeffs: np.ndarray, t: float) -> np.ndarray:
    """``sum_j coeffs[j] t^j / j!`` accumulated from the top index down."""
    J = coeffs.shape[0] - 1
    acc = coeffs[J].copy()
    for j in range(J - 1, -1, -1):
        acc *= t / (j + 1)
        acc += coeffs[j]
    return acc


def _ladder_coeffs(op, a, J, ladder: CoefficientLadder | None):
    if ladder is None or ladder.normalized:
        return build_ladder(op, a, J).fields
    if ladder.J >= J:
        return ladder.fields[: J + 1]
    tail = build_ladder(op, ladder.fields[-1], J - ladder.J).fields
    return np.concatenate([ladder.fields, tail[1:]])


def evaluate_series(
    op: LaplacianOperator | CoefficientLadder,
    a=None,
    t: float = 0.0,
    tol: float = 1e-12,
    *,
    j_max: int = J_MAX,
    max_step: float = MAX_STEP,
) -> tuple[np.ndarray, TruncationReport]:
    """Evaluate ``sum_j Delta^j a t^j / j!`` to sup-norm accuracy ``tol``.

    ``op`` may be a prebuilt :class:`CoefficientLadder`, in which case ``a``
    is taken from it and the ladder is reused (and extended if short) when
    no time splitting is needed.

    The reported ``tail_bound`` covers truncation only. Errors from early
    steps are propagated with the step amplification ``e^{|tau| rho}`` when
    running backward and 1 forward (``e^{tau Delta}`` is sub-stochastic for
    ``tau > 0``).
    """
    ladder = None
    if isinstance(op, CoefficientLadder):
        ladder = op
        op = ladder.operator
        if a is None:
            a = ladder.a0
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = check_field(op.graph, a)
    rho = spectral_radius_bound(op)
    if t == 0.0 or rho == 0.0:
        return a.copy(), TruncationReport(0, 0.0, tol, rho, 1, (0,))

    x_total = abs(t) * rho
    k = max(1, math.ceil(x_total / max_step))
    tau = t / k
    x = abs(tau) * rho
    log_gain = x if t < 0 else 0.0
    log_tol = math.log(tol) - math.log(k)

    u = a
    total_tail = 0.0
    Js = []
    for step in range(k):
        norm = float(np.max(np.abs(u)))
        if norm == 0.0:
            Js.append(0)
            continue
        # later steps amplify this step's tail by log_gain each
        log_target = log_tol - (k - 1 - step) * log_gain - math.log(norm)
        J, lt = truncation_index(x, log_target, j_max)
        coeffs = _ladder_coeffs(op, u, J, ladder if step == 0 and k == 1 else None)
        u = horner(coeffs, tau)
        total_tail += math.exp(lt + math.log(norm) + (k - 1 - step) * log_gain)
        Js.append(J)
    return u, TruncationReport(max(Js), total_tail, tol, rho, k, tuple(Js))


def reconstruct_ancient(op: LaplacianOperator, u0, t: float, tol: float = 1e-12, **kw) -> np.ndarray:
    """Value at an earlier time ``t <= 0`` of the ancient solution with slice ``u0`` at 0."""
    if t > 0:
        raise ValueError(f"reconstruct_ancient needs t <= 0, got {t}")
    return evaluate_series(op, u0, t, tol, **kw)[0]


def solve_backward(op: LaplacianOperator, a, t: float, tol: float = 1e-12, **kw) -> np.ndarray:
    """Solve ``Delta u + du/dt = 0``, ``u(0) = a`` at time ``t >= 0``."""
    if t < 0:
        raise ValueError(f"solve_backward needs t >= 0, got {t}")
    return evaluate_series(op, a, -t, tol, **kw)[0]


def roundtrip_error(op: LaplacianOperator, a, tau: float, tol: float = 1e-12, spec=None) -> tuple[float, float]:
    """Backward series solve over ``tau`` then exact forward evolution.

    Returns the relative sup-norm mismatch and the conditioning proxy
    ``e^{tau rho}``.
    """
    from .oracle import eigendecompose, heat_evolve_exact

    if tau < 0:
        raise ValueError("tau must be nonnegative")
    a = check_field(op.graph, a)
    rho = spectral_radius_bound(op)
    if tau == 0:
        return 0.0, 1.0
    spec = spec if spec is not None else eigendecompose(op)
    b = solve_backward(op, a, tau, tol)
    back = heat_evolve_exact(spec, b, tau)
    scale = float(np.max(np.abs(a)))
    err = float(np.max(np.abs(back - a))) / scale if scale else float(np.max(np.abs(back)))
    return err, math.exp(tau * rho)


@dataclass
class SeriesSolution:
    """A coefficient ladder with the evaluations made from it."""

    ladder: CoefficientLadder
    records: list[tuple[float, np.ndarray, TruncationReport]] = field(default_factory=list)

    def evaluate(self, t: float, tol: float = 1e-12, **kw) -> np.ndarray:
        u, rep = evaluate_series(self.ladder, t=t, tol=tol, **kw)
        self.records.append((t, u, rep))
        return u


def series_solution(op: LaplacianOperator, a, times, tol: float = 1e-12, J: int = 64) -> SeriesSolution:
    sol = SeriesSolution(build_ladder(op, a, J))
    for t in times:
        sol.evaluate(t, tol)
    return sol
