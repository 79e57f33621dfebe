"""Numeric L-values at s = 1: root numbers, L(1), L'(1), twists, L'(E/K,1).

The root number is read off numerically from the Fricke symmetry of the
exponential sum g(t) = sum a_n exp(-2 pi n t / sqrt(N)), which must satisfy
g(1/t) = eps * t^2 * g(t); the residual of the better sign is reported and a
result is accepted only if it beats the tolerance.

Central values use the classical rapidly convergent series
    L(E,1)  = 2 sum a_n/n exp(-2 pi n / sqrt(N))            (eps = +1)
    L'(E,1) = 2 sum a_n/n E1(2 pi n / sqrt(N))              (eps = -1)
with E1 the exponential integral, evaluated by a series / continued fraction
hybrid. Tail bounds use |a_n| <= d(n) sqrt(n) <= sqrt(3) n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .arith import is_squarefree
from .ec_core import CurveQ, an_series, b_invariants
from .quadforms import is_fundamental, kronecker

_SQRT3 = math.sqrt(3.0)
_EULER_GAMMA = 0.5772156649015328606

DEFAULT_NONVANISHING_THRESHOLD = 1e-3
DEFAULT_PRECISION = 1e-8


class LSeriesInconclusiveError(ArithmeticError):
    """Neither functional equation sign fits within tolerance."""


_AN_CACHE: dict = {}


def cached_an(curve: CurveQ, n_max: int, ap_source=None):
    """Shared a_n table per curve, grown geometrically on demand."""
    key = (curve.ainvs, curve.N)
    cur = _AN_CACHE.get(key)
    if cur is None or cur.n_max < n_max:
        cur = an_series(curve, max(n_max, 64), ap_source=ap_source)
        _AN_CACHE[key] = cur
    return cur


def exp1(x: float) -> float:
    """Exponential integral E1(x) for x > 0, ~1e-14 relative accuracy."""
    if x <= 0:
        raise ValueError("E1 needs x > 0")
    if x <= 1.0:
        # E1(x) = -gamma - ln x + sum (-1)^(k+1) x^k / (k k!)
        s = 0.0
        term = 1.0
        k = 1
        while True:
            term *= x / k
            add = term / k
            s += add if k % 2 == 1 else -add
            if add < 1e-18:
                break
            k += 1
        return -_EULER_GAMMA - math.log(x) + s
    # modified Lentz continued fraction e^{-x}/(x+1- 1/(x+3- 4/(x+5- ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 200):
        a = -i * i
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x)


def _tail_terms(x: float, target: float, linear_weight: bool) -> int:
    """Smallest T with the tail bound below target for sum w(n) r^n, r = e^-x.

    linear_weight=True bounds |a_n| r^n with a_n <= sqrt(3) n; otherwise
    bounds sqrt(3) r^n (the a_n/n series).
    """
    r = math.exp(-x)
    T = 8
    while T < 10**7:
        if linear_weight:
            bound = _SQRT3 * r ** (T + 1) * ((T + 1) * (1 - r) + r) / (1 - r) ** 2
        else:
            bound = _SQRT3 * r ** (T + 1) / (1 - r)
        if bound < target:
            return T
        T = int(T * 1.3) + 1
    raise ArithmeticError("series tail will not reach target")


def _g_sum(series, T: int, x: float) -> float:
    # sum_{n<=T} a_n exp(-x n), summed smallest-terms-first for reproducibility
    v = series.values
    return float(sum(int(v[n]) * math.exp(-x * n) for n in range(T, 0, -1)))


def root_number(curve: CurveQ, precision: float = 1e-10) -> tuple[int, float]:
    """Functional equation sign and the residual it leaves, from Fricke symmetry."""
    sqN = math.sqrt(curve.N)
    c = 2.0 * math.pi / sqN
    ts = (1.07, 1.23)
    x_min = c / max(ts)
    T = _tail_terms(x_min, precision * 1e-2, linear_weight=True)
    series = cached_an(curve, T)
    vals = {}
    for t in ts:
        vals[t] = _g_sum(series, T, c * t)
        vals[1.0 / t] = _g_sum(series, T, c / t)
    scale = max(abs(v) for v in vals.values()) + 1e-300
    best = {}
    for eps in (1, -1):
        best[eps] = max(
            abs(vals[1.0 / t] - eps * t * t * vals[t]) / scale for t in ts
        )
    eps = 1 if best[1] <= best[-1] else -1
    if best[eps] > precision * 1e4:  # sign must fit far better than the tolerance floor
        raise LSeriesInconclusiveError(
            f"no functional equation sign fits: residuals {best}"
        )
    return eps, best[eps]


@dataclass
class LEval:
    value_at_1: float
    derivative_at_1: float | None
    epsilon: int
    terms_used: int
    tail_bound: float
    fe_residual: float


def l_eval(curve: CurveQ, precision: float = DEFAULT_PRECISION) -> LEval:
    """L(E,1) and, for odd sign, L'(E,1), with explicit truncation bounds."""
    eps, resid = root_number(curve)
    sqN = math.sqrt(curve.N)
    c = 2.0 * math.pi / sqN
    if eps == 1:
        T = _tail_terms(c, precision / 4.0, linear_weight=False)
        series = cached_an(curve, T)
        v = series.values
        val = 2.0 * float(sum(int(v[n]) / n * math.exp(-c * n) for n in range(T, 0, -1)))
        tail = 2.0 * _SQRT3 * math.exp(-c * (T + 1)) / (1 - math.exp(-c))
        return LEval(val, None, 1, T, tail, resid)
    T = _tail_terms(c, precision / 4.0, linear_weight=False)
    series = cached_an(curve, T)
    v = series.values
    der = 2.0 * float(sum(int(v[n]) / n * exp1(c * n) for n in range(T, 0, -1)))
    r = math.exp(-c)
    tail = 2.0 * _SQRT3 * r ** (T + 1) / (c * (T + 1) * (1 - r))
    return LEval(0.0, der, -1, T, tail, resid)


@dataclass(frozen=True)
class TwistSpec:
    base: CurveQ
    d: int
    curve: CurveQ
    conductor: int


def twist(curve: CurveQ, d: int) -> TwistSpec:
    """Quadratic twist by a fundamental discriminant d coprime to N.

    The twisted model keeps b-invariants (d b2, d^2 b4, d^3 b6), so its
    discriminant is d^6 Delta and point counting on it is valid at every
    prime not dividing d * Delta.
    """
    if d != 1 and not is_fundamental(d):
        raise ValueError(f"{d} is not a fundamental discriminant")
    if math.gcd(d, curve.N) != 1:
        raise ValueError(f"twisting discriminant {d} shares a factor with N = {curve.N}")
    a1, a2, a3, a4, a6 = curve.ainvs
    if d % 2 == 1:
        tw = (
            a1,
            a2 * d + a1 * a1 * (d - 1) // 4,
            a3,
            a4 * d * d + a1 * a3 * (d * d - 1) // 2,
            a6 * d ** 3 + a3 * a3 * (d ** 3 - 1) // 4,
        )
    else:
        b2, b4, b6, _ = b_invariants(curve)
        tw = (0, d * b2 // 4, 0, d * d * b4 // 2, d ** 3 * b6 // 4)
    n_tw = curve.N * d * d
    label = curve.label and f"{curve.label}.tw{d}"
    return TwistSpec(curve, d, CurveQ(*tw, n_tw, label), n_tw)


@dataclass
class LOverK:
    """L'(E/K, 1) through the factorization L(E/K,s) = L(E,s) L(E_d,s)."""

    d_K: int
    value: float
    nonzero: bool
    l_curve: LEval
    l_twist: LEval


def l_over_K(
    curve: CurveQ,
    d_K: int,
    precision: float = DEFAULT_PRECISION,
    threshold: float = DEFAULT_NONVANISHING_THRESHOLD,
) -> LOverK:
    le = l_eval(curve, precision)
    tw = twist(curve, d_K)
    te = l_eval(tw.curve, precision)
    if le.epsilon * te.epsilon != -1:
        raise LSeriesInconclusiveError(
            f"twist by {d_K} did not flip the sign ({le.epsilon}, {te.epsilon}); "
            "Heegner parity violated, root number computation suspect"
        )
    if le.epsilon == -1:
        value = le.derivative_at_1 * te.value_at_1
    else:
        value = le.value_at_1 * te.derivative_at_1
    return LOverK(d_K, value, abs(value) > threshold, le, te)


def gate_from_leval(le: LEval, threshold: float = DEFAULT_NONVANISHING_THRESHOLD) -> str:
    if le.epsilon == 1 and abs(le.value_at_1) > threshold:
        return "rank0"
    if le.epsilon == -1 and abs(le.derivative_at_1) > threshold:
        return "rank1"
    return "not_eligible"


def analytic_rank_gate(
    curve: CurveQ,
    threshold: float = DEFAULT_NONVANISHING_THRESHOLD,
    precision: float = DEFAULT_PRECISION,
) -> str:
    """'rank0', 'rank1' or 'not_eligible' from the sign and the central value."""
    try:
        le = l_eval(curve, precision)
    except LSeriesInconclusiveError:
        return "not_eligible"
    return gate_from_leval(le, threshold)
