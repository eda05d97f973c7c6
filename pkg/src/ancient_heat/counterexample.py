"""Tychonov's solution of the 1-D heat equation and its failure of time analyticity.

``v(x, t) = sum_k f^(k)(t) x^(2k) / (2k)!`` with ``f(t) = exp(-1/t^2)`` for
``t > 0`` and ``f = 0`` for ``t <= 0``. Writing ``s = 1/t``,
``f^(k)(t) = P_k(s) exp(-s^2)`` where the integer polynomials obey
``P_{k+1}(s) = -s^2 P_k'(s) + 2 s^3 P_k(s)``.

Coefficients of ``P_k`` reach 1e39 by k = 30 and the polynomial values
cancel heavily, so ``P_k`` is evaluated exactly on the rational ``1/t`` and
only the final ratio is rounded to floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

K_MAX = 200


class TychonovError(ArithmeticError):
    pass


@lru_cache(maxsize=None)
def tychonov_poly(k: int) -> tuple[int, ...]:
    """Integer coefficients of ``P_k`` in increasing powers of ``s``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > K_MAX:
        raise TychonovError(f"derivative order {k} beyond cap {K_MAX}")
    if k == 0:
        return (1,)
    prev = tychonov_poly(k - 1)
    out = [0] * (len(prev) + 3)
    for i, c in enumerate(prev):
        if i:
            out[i + 1] -= i * c  # -s^2 * (i c s^(i-1))
        out[i + 3] += 2 * c
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def _scaled_poly(k: int, t: float) -> int:
    """Exact integer ``q^(3k) P_k(p/q)`` where ``p/q = 1/t``."""
    coeffs = tychonov_poly(k)
    s = 1 / Fraction(t)
    p, q = s.numerator, s.denominator
    # sum_i c_i p^i q^(3k-i): Horner in p, scaling by q
    acc = 0
    qpow = 1
    for c in reversed(coeffs):
        acc = acc * p + c * qpow
        qpow *= q
    return acc


def _split(num: int, den: int) -> tuple[float, int]:
    """``|num| / den = mant * 2**e`` with ``mant`` in [0.5, 2), correctly rounded."""
    num = abs(num)
    e = num.bit_length() - den.bit_length()
    mant = Fraction(num, den << e) if e >= 0 else Fraction(num << -e, den)
    return float(mant), e


def _log_ratio(num: int, den: int) -> float:
    mant, e = _split(num, den)
    return math.log(mant) + e * _LN2


def _ratio_exp(num: int, den: int, c: float) -> float:
    """``num / den * exp(-c)`` without forming either huge factor in floating point."""
    if num == 0:
        return 0.0
    mant, e = _split(num, den)
    k2 = round(c / _LN2)
    lv = math.log(mant) + (e - k2) * _LN2 - (c - k2 * _LN2)
    if lv > 709.0:
        raise TychonovError("value overflows double precision")
    if lv < -745.0:
        return 0.0
    val = math.ldexp(mant * math.exp(-(c - k2 * _LN2)), e - k2)
    return val if num > 0 else -val


_LN2 = math.log(2.0)


def log_f_derivative(k: int, t: float) -> tuple[int, float]:
    """``(sign, log|f^(k)(t)|)``; sign 0 in the flat region t <= 0."""
    if t <= 0:
        return 0, -math.inf
    acc = _scaled_poly(k, t)
    if acc == 0:
        return 0, -math.inf
    q = (1 / Fraction(t)).denominator
    return (1 if acc > 0 else -1), _log_ratio(acc, q ** (3 * k)) - (1 / t) ** 2


def tychonov_f_derivative(k: int, t: float) -> float:
    if k < 0 or k > K_MAX:
        raise TychonovError(f"derivative order must be in [0, {K_MAX}], got {k}")
    if t <= 0:
        return 0.0
    q = (1 / Fraction(t)).denominator
    try:
        return _ratio_exp(_scaled_poly(k, t), q ** (3 * k), (1 / t) ** 2)
    except TychonovError:
        return math.inf if _scaled_poly(k, t) > 0 else -math.inf


def _log_term(k: int, m: int, x: float, t: float) -> tuple[int, float]:
    """Sign and log-magnitude of ``f^(k+m)(t) x^(2m) / (2m)!``."""
    sign, lf = log_f_derivative(k + m, t)
    if sign == 0:
        return 0, -math.inf
    if m == 0:
        return sign, lf
    return sign, lf + 2 * m * math.log(abs(x)) - math.lgamma(2 * m + 1)


@dataclass(frozen=True)
class TychonovValue:
    value: float
    tail_estimate: float
    terms: int

    def __iter__(self):
        return iter((self.value, self.tail_estimate))


def _exact_sum(m0: int, K: int, x: float, t: float) -> float:
    """``sum_{k<=K} f^(m0+k)(t) x^(2k)/(2k)!`` with one rounding at the end.

    All terms share the factor ``exp(-1/t^2) / q^(3 m0)``; the rest is
    brought over the common denominator ``q^(3K) xd^(2K) (2K)!``.
    """
    q = (1 / Fraction(t)).denominator
    xf = Fraction(x)
    xn, xd = xf.numerator, xf.denominator
    fact_K = math.factorial(2 * K)
    num = 0
    fact = 1  # (2k)!
    for k in range(K + 1):
        if k:
            fact *= (2 * k - 1) * (2 * k)
        num += (
            _scaled_poly(m0 + k, t)
            * xn ** (2 * k)
            * q ** (3 * (K - k))
            * xd ** (2 * (K - k))
            * (fact_K // fact)
        )
    den = q ** (3 * (m0 + K)) * xd ** (2 * K) * fact_K
    try:
        return _ratio_exp(num, den, (1 / t) ** 2)
    except TychonovError:
        raise TychonovError(f"v overflows at (x={x}, t={t})") from None


def _tail_from(mags: list[float]) -> float:
    a, b, c = mags[-3:]
    if not (a > b > c):
        return math.inf
    r = max(b / a, c / b)
    return c * r / (1 - r)


def tychonov_eval(
    x: float,
    t: float,
    K: int | None = None,
    *,
    time_derivative: int = 0,
    rtol: float = 1e-16,
    atol: float = 0.0,
) -> TychonovValue:
    """Partial sum of ``d^m v / dt^m`` at (x, t) with a tail estimate.

    With ``K`` given the sum runs over ``k <= K`` and raises unless the
    last three term magnitudes are strictly decreasing. Otherwise terms are
    added until three consecutive decreases give a tail estimate below
    ``max(atol, rtol * |partial sum|)``, up to the derivative cap.
    """
    m0 = time_derivative
    if t <= 0:
        return TychonovValue(0.0, 0.0, 0)
    if x == 0:
        return TychonovValue(tychonov_f_derivative(m0, t), 0.0, 1)
    kmax = K_MAX - m0 if K is None else K
    if K is not None and (K < 1 or K + m0 > K_MAX):
        raise TychonovError(f"K must be in [1, {K_MAX - m0}], got {K}")
    # term magnitudes (floats, log-space) drive truncation; the sum is exact
    mags: list[float] = []
    tail = math.inf
    rough = 0.0
    for k in range(kmax + 1):
        sign, lt = _log_term(m0, k, x, t)
        if lt > 709:
            raise TychonovError(f"term k={k} overflows at (x={x}, t={t})")
        mags.append(math.exp(lt) if lt > -745 else 0.0)
        rough += sign * mags[-1]
        if K is None and k >= 2:
            tail = _tail_from(mags)
            # the float running sum may be ruined by cancellation: confirm exactly
            if tail <= max(atol, rtol * abs(rough)) and tail <= max(
                atol, rtol * abs(_exact_sum(m0, k, x, t))
            ):
                break
    if K is not None:
        tail = _tail_from(mags) if len(mags) >= 3 else math.inf
    if not math.isfinite(tail):
        raise TychonovError(f"terms not yet decreasing at K={kmax} for (x={x}, t={t})")
    total = _exact_sum(m0, len(mags) - 1, x, t)
    if K is None and tail > max(atol, rtol * abs(total)):
        raise TychonovError(f"tail {tail:.3e} above tolerance at cap K={kmax} for (x={x}, t={t})")
    return TychonovValue(total, tail, len(mags))


def tychonov_residual(x: float, t: float, h: float) -> float:
    """``|dv/dt - d2v/dx2|`` by central differences with step ``h``."""
    if t <= -h:
        return 0.0
    if t - h <= 0:
        raise ValueError("need t - h > 0 (or t <= -h)")

    def v(xx, tt):
        return tychonov_eval(xx, tt, atol=h**3, rtol=0.0).value

    vt = (v(x, t + h) - v(x, t - h)) / (2 * h)
    vxx = (v(x + h, t) - 2 * v(x, t) + v(x - h, t)) / h**2
    return abs(vt - vxx)


@dataclass(frozen=True)
class AnalyticityGap:
    taylor_prediction: float
    actual: float
    gap: float
    derivatives_at_zero: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "derivatives_at_zero": list(self.derivatives_at_zero),
            "sample_value": self.actual,
            "gap": self.gap,
            "taylor_prediction": self.taylor_prediction,
        }


def analyticity_gap(x: float, t: float, n_derivatives: int = 10) -> AnalyticityGap:
    """Time-Taylor prediction from t = 0 (identically zero) against v(x, t)."""
    if t <= 0:
        raise ValueError("t must be positive")
    derivs = tuple(tychonov_eval(x, 0.0, time_derivative=m).value for m in range(n_derivatives))
    prediction = 0.0
    for m, dm in enumerate(derivs):
        prediction += dm * t**m / math.factorial(m)
    actual = tychonov_eval(x, t).value
    return AnalyticityGap(prediction, actual, abs(actual - prediction), derivs)


def growth_profile(xs, ts) -> list[tuple[float, float, float]]:
    """For each x, ``(x, max_t log|v(x, t)|, argmax t)`` over the grid ``ts``.

    Growth faster than ``e^{c x^2}`` for every c shows up as
    ``max_t log|v| / x^2`` increasing in x.
    """
    out = []
    for x in xs:
        best, arg = -math.inf, math.nan
        for t in ts:
            v = tychonov_eval(float(x), float(t)).value
            if v != 0 and math.log(abs(v)) > best:
                best, arg = math.log(abs(v)), float(t)
        out.append((float(x), best, arg))
    return out
