"""Coefficient ladders a_{j+1} = Delta a_j and the exponential-growth criterion."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import LaplacianOperator, check_field

VERDICT_NOTE = (
    "criterion checked for j <= J only; on a finite graph it always holds for "
    "A4 >= ln(rho) and A3 large enough, so compare A4_hat against the cap"
)


class LadderOverflowError(ArithmeticError):
    def __init__(self, j: int):
        super().__init__(f"ladder overflowed at j={j}; rebuild with normalize=True")
        self.j = j


class GrowthFitError(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientLadder:
    """Coefficients ``a_j = exp(log_scale[j]) * fields[j]``.

    Without normalisation ``log_scale`` is all zeros and ``fields[j]`` is
    ``a_j`` itself. With normalisation each ``fields[j]`` has sup norm 1 (or
    is identically zero, with ``log_scale[j] = -inf``).
    """

    fields: np.ndarray
    log_scale: np.ndarray
    operator: LaplacianOperator = field(repr=False)
    normalized: bool = False

    @property
    def J(self) -> int:
        return self.fields.shape[0] - 1

    @property
    def a0(self) -> np.ndarray:
        return self.coefficient(0)

    def coefficient(self, j: int) -> np.ndarray:
        if not self.normalized:
            return self.fields[j]
        if not np.isfinite(self.log_scale[j]):
            return np.zeros_like(self.fields[j])
        with np.errstate(over="ignore"):
            return self.fields[j] * np.exp(self.log_scale[j])

    @property
    def coefficients(self) -> np.ndarray:
        if not self.normalized:
            return self.fields
        return np.stack([self.coefficient(j) for j in range(self.J + 1)])

    def log_abs(self) -> np.ndarray:
        """``log|a_j(x)|`` as a (J+1, n) array, ``-inf`` where zero."""
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.fields)) + self.log_scale[:, None]

    def log_sup(self) -> np.ndarray:
        return self.log_abs().max(axis=1)


def build_ladder(op: LaplacianOperator, a, J: int, normalize: bool = False) -> CoefficientLadder:
    if J < 0:
        raise ValueError(f"J must be nonnegative, got {J}")
    a = check_field(op.graph, a)
    out = np.empty((J + 1, op.n))
    log_scale = np.zeros(J + 1)
    if not normalize:
        out[0] = a
        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(J):
                out[j + 1] = op.matrix @ out[j]
                if not np.all(np.isfinite(out[j + 1])):
                    raise LadderOverflowError(j + 1)
        return CoefficientLadder(out, log_scale, op, False)

    cur, log_s = a, 0.0
    for j in range(J + 1):
        if j > 0:
            cur = op.matrix @ out[j - 1]
        s = float(np.max(np.abs(cur))) if cur.size else 0.0
        if s == 0.0:
            out[j:] = 0.0
            log_scale[j:] = -np.inf
            break
        out[j] = cur / s
        log_s += math.log(s)
        log_scale[j] = log_s
    return CoefficientLadder(out, log_scale, op, True)


@dataclass(frozen=True)
class GrowthBound:
    A3: float
    A4: float

    def __post_init__(self):
        if not (self.A3 > 0 and self.A4 > 0):
            raise ValueError(f"growth constants must be positive, got A3={self.A3}, A4={self.A4}")


@dataclass(frozen=True)
class GrowthEstimate:
    A3_hat: float
    A4_hat: float
    per_j_log_sup: list[tuple[int, float]]
    fit_residual: float
    j_range: tuple[int, int]
    mu: float = 0.0


def _weighted_log_sup(ladder: CoefficientLadder, distances, mu: float) -> np.ndarray:
    logs = ladder.log_abs()
    if mu:
        logs = logs - mu * np.asarray(distances, dtype=float)[None, :]
    return logs.max(axis=1)


def estimate_growth(
    ladder: CoefficientLadder, distances=None, mu: float = 0.0, j_min: int = 0
) -> GrowthEstimate:
    """Least-squares line through ``(j, log M_j)``, ``M_j = sup |a_j| e^{-mu d}``.

    Zero ``M_j`` are skipped. Slope is ``A4_hat``, ``exp(intercept)`` is ``A3_hat``.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if mu and distances is None:
        raise ValueError("a spatial weight mu > 0 needs distances")
    if ladder.J < j_min + 2:
        raise GrowthFitError(f"need J >= j_min + 2 for a fit, got J={ladder.J}, j_min={j_min}")
    logs = _weighted_log_sup(ladder, distances, mu)
    js = np.arange(j_min, ladder.J + 1)
    ys = logs[j_min:]
    keep = np.isfinite(ys)
    if not keep.any():
        raise GrowthFitError("ladder is identically zero from j_min on (trivially solvable)")
    if keep.sum() < 2:
        raise GrowthFitError("fewer than two nonzero coefficients; growth rate undefined")
    x, y = js[keep].astype(float), ys[keep]
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - y) ** 2)))
    return GrowthEstimate(
        A3_hat=float(math.exp(intercept)),
        A4_hat=float(slope),
        per_j_log_sup=[(int(j), float(v)) for j, v in zip(x, y)],
        fit_residual=resid,
        j_range=(int(j_min), int(ladder.J)),
        mu=float(mu),
    )


@dataclass(frozen=True)
class SolvabilityVerdict:
    holds: bool
    estimate: GrowthEstimate | None
    cap: GrowthBound
    first_violation_j: int | None
    margin: float
    J: int
    note: str = VERDICT_NOTE

    def to_dict(self) -> dict:
        est = self.estimate
        return {
            "A3_hat": None if est is None else est.A3_hat,
            "A4_hat": None if est is None else est.A4_hat,
            "residual": None if est is None else est.fit_residual,
            "holds": self.holds,
            "first_violation_j": self.first_violation_j,
            "margin": self.margin if math.isfinite(self.margin) else None,
            "J": self.J,
            "mu": 0.0 if est is None else est.mu,
            "cap": {"A3": self.cap.A3, "A4": self.cap.A4},
            "note": self.note,
        }


def check_solvability(
    ladder: CoefficientLadder,
    cap: GrowthBound,
    distances=None,
    mu: float = 0.0,
    j_min: int = 0,
) -> SolvabilityVerdict:
    """Test ``|a_j(x)| <= A3 exp(A4 (j + d(x, 0)))`` for all ``j <= J`` and all x.

    ``margin`` is the smallest log-gap over all (j, x) with nonzero a_j(x).
    Gaps within 1e-12 (relative to the log cap) are snapped to zero so that
    exact equality cases such as 2^j against e^{j ln 2} are not lost to
    rounding.
    """
    n = ladder.operator.n
    d = np.zeros(n) if distances is None else np.asarray(distances, dtype=float)
    js = np.arange(ladder.J + 1, dtype=float)
    log_cap = math.log(cap.A3) + cap.A4 * (js[:, None] + d[None, :])
    gap = log_cap - ladder.log_abs()
    snap = np.abs(gap) <= 1e-12 * np.maximum(1.0, np.abs(log_cap))
    gap = np.where(snap, 0.0, gap)
    per_j = gap.min(axis=1)
    margin = float(per_j.min())
    bad = np.flatnonzero(per_j < 0)
    first = int(bad[0]) if bad.size else None
    try:
        est = estimate_growth(ladder, d, mu, j_min)
    except GrowthFitError:
        est = None
    return SolvabilityVerdict(first is None, est, cap, first, margin, ladder.J)
