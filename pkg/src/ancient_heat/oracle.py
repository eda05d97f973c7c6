"""Reference solutions used to check the series machinery.

Three independent routes to ``e^{t Delta} a``: a dense eigendecomposition
(cyclic Jacobi), Crank-Nicolson stepping with conjugate gradients, and
backward finite differences for time derivatives of sampled data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .domain import LaplacianOperator, SpaceTimeField, check_field, spectral_radius_bound

MAX_DENSE = 512
MAX_FD_ORDER = 6


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # descending, all <= 0 up to round-off
    eigenvectors: np.ndarray  # columns are orthonormal eigenfields
    residual: float
    sweeps: int = 0

    def to_dict(self) -> dict:
        return {"eigenvalues": [float(x) for x in self.eigenvalues], "residual": self.residual}

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T


def _round_robin(m: int):
    """Pairings for a round-robin tournament on ``m`` (even) players."""
    players = list(range(m))
    for _ in range(m - 1):
        yield [(players[k], players[m - 1 - k]) for k in range(m // 2)]
        players = [players[0], players[-1]] + players[1:-1]


def jacobi_eigh(A: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi eigensolver for a dense symmetric matrix.

    Rotations are grouped into rounds of disjoint (p, q) pairs, so each
    round updates whole column/row blocks at once. Returns
    ``(eigenvalues, eigenvectors, sweeps)`` unsorted.
    """
    A = np.array(A, dtype=float, copy=True)
    n = A.shape[0]
    Vt = np.eye(n)  # rows are eigenvectors
    if n == 1:
        return A.diagonal().copy(), Vt, 0
    m = n + (n % 2)
    rounds = []
    for pairs in _round_robin(m):
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), Vt, 0
    floor = np.finfo(float).eps * 1e-2 * scale
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for P, Q in rounds:
            apq = A[P, Q]
            active = np.abs(apq) > floor
            if not active.any():
                continue
            rotated = True
            P, Q, apq = P[active], Q[active], apq[active]
            theta = (A[Q, Q] - A[P, P]) / (2.0 * apq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # A <- J^T A J as two row passes with a transpose in between
            for _ in range(2):
                rowP, rowQ = A[P, :], A[Q, :]
                A[P, :] = c[:, None] * rowP - s[:, None] * rowQ
                A[Q, :] = s[:, None] * rowP + c[:, None] * rowQ
                A = np.ascontiguousarray(A.T)
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            vP, vQ = Vt[P, :], Vt[Q, :]
            Vt[P, :] = c[:, None] * vP - s[:, None] * vQ
            Vt[Q, :] = s[:, None] * vP + c[:, None] * vQ
        off = np.linalg.norm(A - np.diag(A.diagonal()))
        if off <= tol * scale or not rotated:
            return A.diagonal().copy(), Vt.T.copy(), sweep
    raise OracleError(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})")


JACOBI_MAX = 128


def eigendecompose(op: LaplacianOperator, cap: int = MAX_DENSE, method: str = "auto") -> SpectralDecomposition:
    """Full eigendecomposition of Delta, eigenvalues in descending order.

    ``method`` is ``"jacobi"``, ``"lapack"`` (``numpy.linalg.eigh``) or
    ``"auto"``, which uses Jacobi up to n = 128 where it costs well under a
    second, and LAPACK beyond.
    """
    if op.n > cap:
        raise OracleError(f"dense decomposition capped at n={cap}, got n={op.n}")
    L = op.matrix.toarray()
    sweeps = 0
    if method == "auto":
        method = "jacobi" if op.n <= JACOBI_MAX else "lapack"
    if method == "jacobi":
        lam, V, sweeps = jacobi_eigh(L)
    elif method == "lapack":
        lam, V = np.linalg.eigh(L)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(-lam, kind="stable")
    lam, V = lam[order], V[:, order]
    # fix each eigenvector's sign so output is reproducible across methods
    pivot = np.argmax(np.abs(V) > 1e-8 * np.abs(V).max(axis=0), axis=0)
    signs = np.sign(V[pivot, np.arange(V.shape[1])])
    V = V * np.where(signs == 0, 1.0, signs)
    residual = float(np.max(np.linalg.norm(L @ V - V * lam, axis=0))) if op.n else 0.0
    return SpectralDecomposition(lam, V, residual, sweeps)


def heat_evolve_exact(spec: SpectralDecomposition, a, t: float) -> np.ndarray:
    """``sum_i exp(lambda_i t) <a, phi_i> phi_i``; negative t runs backward."""
    a = np.asarray(a, dtype=float)
    expo = spec.eigenvalues * t
    if np.max(expo) > 700.0:
        raise OracleError(f"e^(lambda t) overflows: max exponent {np.max(expo):.1f} at t={t}")
    V = spec.eigenvectors
    return V @ (np.exp(expo) * (V.T @ a))


def ancient_window(
    spec: SpectralDecomposition, a, t_start: float, dt: float, band: float | None = None
) -> SpaceTimeField:
    """Exact caloric samples on the uniform grid ``t_start, ..., 0``.

    ``t_start`` is rounded to a whole number of steps. With ``band`` set,
    modes with ``|lambda| > band`` are dropped from the spectral
    coefficients themselves; projecting the data beforehand is not enough,
    because round-off left in a dropped mode grows like ``e^{|lambda t|}``.
    """
    if t_start > 0 or dt <= 0:
        raise ValueError("need t_start <= 0 and dt > 0")
    m = int(round(-t_start / dt))
    times = -dt * np.arange(m, -1, -1, dtype=float)
    times[-1] = 0.0
    V = spec.eigenvectors
    coef = V.T @ np.asarray(a, dtype=float)
    if band is not None:
        coef[spec.eigenvalues < -band] = 0.0
    expo = np.exp(np.outer(spec.eigenvalues, times))
    return SpaceTimeField(V @ (coef[:, None] * expo), times)


def conjugate_gradient(matvec, b: np.ndarray, x0: np.ndarray, tol: float = 1e-12, maxiter: int | None = None):
    """Plain CG for SPD systems; stops when ``||r|| <= tol * max(1, ||b||)``."""
    x = x0.copy()
    r = b - matvec(x)
    d = r.copy()
    rr = float(r @ r)
    target = tol * max(1.0, float(np.linalg.norm(b)))
    maxiter = maxiter or 10 * b.size + 10
    for _ in range(maxiter):
        if math.sqrt(rr) <= target:
            return x, math.sqrt(rr)
        Ad = matvec(d)
        alpha = rr / float(d @ Ad)
        x += alpha * d
        r -= alpha * Ad
        rr_new = float(r @ r)
        d = r + (rr_new / rr) * d
        rr = rr_new
    if math.sqrt(rr) <= target:
        return x, math.sqrt(rr)
    raise OracleError(f"CG did not converge: residual {math.sqrt(rr):.3e} > {target:.3e}")


def heat_evolve_stepped(op: LaplacianOperator, a, t: float, steps: int) -> np.ndarray:
    """Crank-Nicolson: ``(I - h/2 Delta) u+ = (I + h/2 Delta) u`` with ``h = t/steps``."""
    if t <= 0:
        raise ValueError("stepped oracle needs t > 0")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    u = check_field(op.graph, a).copy()
    h = t / steps
    L = op.matrix

    def lhs(v):
        return v - 0.5 * h * (L @ v)

    for _ in range(steps):
        rhs = u + 0.5 * h * (L @ u)
        u, _ = conjugate_gradient(lhs, rhs, u)
    return u


@lru_cache(maxsize=None)
def backward_stencil(order: int, accuracy: int = 2) -> tuple[Fraction, ...]:
    """Exact weights ``w_k`` with ``f^(order)(0) ~ h^-order sum_k w_k f(-k h)``.

    Fornberg's recursion on the nodes ``0, -1, ..., -(order+accuracy-1)``
    carried out in rationals.
    """
    if order < 0 or accuracy < 1:
        raise ValueError("need order >= 0 and accuracy >= 1")
    npts = order + accuracy
    x = [Fraction(-k) for k in range(npts)]
    z = Fraction(0)
    c = [[Fraction(0)] * (order + 1) for _ in range(npts)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = x[0] - z
    for i in range(1, npts):
        mn = min(i, order)
        c2 = Fraction(1)
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2
            for k in range(mn, 0, -1):
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3
            c[j][0] = c4 * c[j][0] / c3
        c1 = c2
    return tuple(c[k][order] for k in range(npts))


def fd_time_step(rho_bar: float, order: int, accuracy: int = 2) -> float:
    """Default sample spacing: 1e-3 / max(1, rho), widened for high orders
    so that round-off ``eps / dt^order`` stays below truncation."""
    eps = np.finfo(float).eps
    return max(1e-3, eps ** (1.0 / (order + accuracy))) * min(1.0, 1.0 / rho_bar) if rho_bar > 0 else 1e-3


def time_derivative_fd(u: SpaceTimeField, order: int, vertices=None, accuracy: int = 2) -> np.ndarray:
    """Backward-difference estimate of ``d^order u / dt^order`` at t = 0."""
    if not 1 <= order <= MAX_FD_ORDER:
        raise ValueError(f"derivative order must be in [1, {MAX_FD_ORDER}], got {order}")
    w = backward_stencil(order, accuracy)
    if u.times.size < len(w):
        raise ValueError(f"need {len(w)} time samples for order {order}, have {u.times.size}")
    vals = u.values if vertices is None else u.values[np.asarray(vertices)]
    # samples at 0, -dt, -2dt, ... are the trailing columns in reverse
    cols = vals[:, ::-1][:, : len(w)]
    weights = np.array([float(x) for x in w])
    return cols @ weights / u.dt**order


def sample_for_fd(spec: SpectralDecomposition, a, order: int, rho_bar: float, accuracy: int = 2) -> SpaceTimeField:
    dt = fd_time_step(rho_bar, order, accuracy)
    npts = order + accuracy
    return ancient_window(spec, a, -(npts - 1) * dt, dt)


__all__ = [
    "SpectralDecomposition",
    "OracleError",
    "eigendecompose",
    "jacobi_eigh",
    "heat_evolve_exact",
    "heat_evolve_stepped",
    "ancient_window",
    "backward_stencil",
    "time_derivative_fd",
    "sample_for_fd",
    "fd_time_step",
    "conjugate_gradient",
    "spectral_radius_bound",
]
