"""Elliptic curves over Q: Weierstrass models, reduction mod p, point counts, a_n.

Curves are integral models y^2 + a1*x*y + a3*y = x^3 + a2*x^2 + a4*x + a6 with
the conductor N supplied and validated, not recomputed: every prime of N must
divide the discriminant, and reduction at small primes away from N must be
nonsingular. Models are assumed globally minimal.

Point counting is naive O(p) enumeration with a quadratic-residue table,
capped at p <= 10^6. No Schoof-type counting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import prime_divisors, primes_upto

POINT_COUNT_CEILING = 10**6
_VALIDATION_PMAX = 50


class BadReductionError(ValueError):
    """Operation requires good reduction at p, but p divides the conductor."""


class PointCountBoundError(ValueError):
    """Requested field size exceeds the naive enumeration ceiling."""


@dataclass(frozen=True)
class CurveQ:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    N: int
    label: str | None = None

    def __post_init__(self):
        if self.N <= 0:
            raise ValueError("conductor must be positive")
        d = discriminant(self)
        if d == 0:
            raise ValueError("singular model (discriminant 0)")
        for p in prime_divisors(self.N):
            if d % p != 0:
                raise ValueError(f"conductor prime {p} does not divide the discriminant")
        for p in primes_upto(_VALIDATION_PMAX):
            if self.N % p != 0 and d % p == 0:
                raise ValueError(
                    f"model is singular mod {p} but {p} does not divide N; "
                    "non-minimal model or wrong conductor"
                )

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)


def b_invariants(curve: CurveQ) -> tuple[int, int, int, int]:
    a1, a2, a3, a4, a6 = curve.ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def c_invariants(curve: CurveQ) -> tuple[int, int]:
    b2, b4, b6, _ = b_invariants(curve)
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    return c4, c6


def discriminant(curve) -> int:
    """Discriminant of the given model (0 for a singular tuple)."""
    if isinstance(curve, tuple):
        a1, a2, a3, a4, a6 = curve
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    else:
        b2, b4, b6, b8 = b_invariants(curve)
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def good_reduction(curve: CurveQ, p: int) -> bool:
    return curve.N % p != 0


@dataclass(frozen=True)
class CurveFp:
    """A curve with good reduction at p, coefficients reduced mod p."""

    p: int
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        d = discriminant((self.a1, self.a2, self.a3, self.a4, self.a6))
        if d % self.p == 0:
            raise BadReductionError(f"singular reduction mod {self.p}")


def reduce_mod(curve: CurveQ, p: int) -> CurveFp:
    if not good_reduction(curve, p):
        raise BadReductionError(f"{curve.label or curve.ainvs} has bad reduction at {p}")
    a1, a2, a3, a4, a6 = (a % p for a in curve.ainvs)
    return CurveFp(p, a1, a2, a3, a4, a6)


def count_points(curve_fp: CurveFp) -> int:
    """#E(F_p) including the point at infinity."""
    p = curve_fp.p
    if p > POINT_COUNT_CEILING:
        raise PointCountBoundError(f"p = {p} exceeds enumeration ceiling {POINT_COUNT_CEILING}")
    a1, a2, a3, a4, a6 = curve_fp.a1, curve_fp.a2, curve_fp.a3, curve_fp.a4, curve_fp.a6
    if p == 2:
        cnt = 1
        for x in (0, 1):
            for y in (0, 1):
                if (y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)) % 2 == 0:
                    cnt += 1
        return cnt
    # odd p: complete the square, (2y + a1 x + a3)^2 = 4*rhs + (a1 x + a3)^2
    x = np.arange(p, dtype=np.int64)
    x2 = (x * x) % p
    x3 = (x2 * x) % p
    rhs = (x3 + a2 * x2 + a4 * x + a6) % p
    lin = (a1 * x + a3) % p
    disc = (4 * rhs + lin * lin) % p
    chi = np.full(p, -1, dtype=np.int64)
    chi[(x * x) % p] = 1
    chi[0] = 0
    return int((1 + chi[disc]).sum()) + 1


def _fp2_mul(u, v, p, eps):
    # elements of F_{p^2} = F_p(sqrt(eps)) as pairs (a, b) = a + b*sqrt(eps)
    return ((u[0] * v[0] + eps * u[1] * v[1]) % p, (u[0] * v[1] + u[1] * v[0]) % p)


def _fp2_pow(u, e, p, eps):
    r = (1, 0)
    while e:
        if e & 1:
            r = _fp2_mul(r, u, p, eps)
        u = _fp2_mul(u, u, p, eps)
        e >>= 1
    return r


def count_points_ext(curve: CurveQ, p: int, k: int) -> int:
    """#E(F_{p^k}) by enumeration, k <= 2. Oracle-grade, small p only."""
    if k == 1:
        return count_points(reduce_mod(curve, p))
    if k != 2:
        raise ValueError("only k = 1 or 2 supported")
    if p * p > POINT_COUNT_CEILING:
        raise PointCountBoundError(f"p^2 = {p * p} exceeds ceiling {POINT_COUNT_CEILING}")
    cfp = reduce_mod(curve, p)
    a1, a2, a3, a4, a6 = cfp.a1, cfp.a2, cfp.a3, cfp.a4, cfp.a6
    if p == 2:
        # F_4 = F_2[t]/(t^2 + t + 1), elements (a, b) = a + b t
        def mul(u, v):
            # (a+bt)(c+dt) = ac + (ad+bc)t + bd t^2, t^2 = t + 1
            a, b = u
            c, d = v
            return ((a * c + b * d) % 2, (a * d + b * c + b * d) % 2)

        def add(*els):
            return (sum(e[0] for e in els) % 2, sum(e[1] for e in els) % 2)

        elems = [(0, 0), (1, 0), (0, 1), (1, 1)]
        cnt = 1
        const = [(a6 % 2, 0), (a4 % 2, 0), (a2 % 2, 0), (a3 % 2, 0), (a1 % 2, 0)]
        c6_, c4_, c2_, c3_, c1_ = const
        for x in elems:
            x2 = mul(x, x)
            x3 = mul(x2, x)
            rhs = add(x3, mul(c2_, x2), mul(c4_, x), c6_)
            for y in elems:
                lhs = add(mul(y, y), mul(c1_, mul(x, y)), mul(c3_, y))
                if lhs == rhs:
                    cnt += 1
        return cnt
    # odd p: find a quadratic non-residue for the extension
    eps = next(e for e in range(2, p) if pow(e, (p - 1) // 2, p) == p - 1)
    half = (p * p - 1) // 2
    cnt = 1
    for u0 in range(p):
        for u1 in range(p):
            x = (u0, u1)
            x2 = _fp2_mul(x, x, p, eps)
            x3 = _fp2_mul(x2, x, p, eps)
            rhs = ((x3[0] + a2 * x2[0] + a4 * x[0] + a6) % p, (x3[1] + a2 * x2[1] + a4 * x[1]) % p)
            lin = ((a1 * x[0] + a3) % p, (a1 * x[1]) % p)
            lin2 = _fp2_mul(lin, lin, p, eps)
            d = ((4 * rhs[0] + lin2[0]) % p, (4 * rhs[1] + lin2[1]) % p)
            if d == (0, 0):
                cnt += 1
            else:
                s = _fp2_pow(d, half, p, eps)
                cnt += 2 if s == (1, 0) else 0
    return cnt


def ap(curve: CurveQ, p: int) -> int:
    """Trace of Frobenius a_p = p + 1 - #E(F_p) at a prime of good reduction."""
    n = count_points(reduce_mod(curve, p))
    a = p + 1 - n
    if a * a > 4 * p:
        raise ArithmeticError(f"Hasse bound violated at p={p}: a_p={a}")
    return a


def reduction_type(curve: CurveQ, p: int) -> tuple[str, int]:
    """Classify bad reduction at p | N: ('multiplicative', +-1) or ('additive', 0).

    The sign is +1 for split multiplicative reduction (tangent slopes at the
    node rational over F_p), -1 for nonsplit.
    """
    if good_reduction(curve, p):
        raise ValueError(f"{p} is a prime of good reduction")
    a1, a2, a3, a4, a6 = (a % p for a in curve.ainvs)
    sing = None
    if p == 2:
        for x in (0, 1):
            for y in (0, 1):
                f = (y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)) % 2
                fx = (a1 * y - (3 * x * x + 2 * a2 * x + a4)) % 2
                fy = (2 * y + a1 * x + a3) % 2
                if f == 0 and fx == 0 and fy == 0:
                    sing = (x, y)
    else:
        inv2 = pow(2, -1, p)
        for x in range(p):
            y = (-(a1 * x + a3) * inv2) % p
            f = (y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)) % p
            fx = (a1 * y - (3 * x * x + 2 * a2 * x + a4)) % p
            if f == 0 and fx == 0:
                sing = (x, y)
                break
    if sing is None:
        raise ArithmeticError(f"no singular point found mod {p} despite p | N")
    r, t = sing
    # translate the singular point to the origin
    a1s = a1 % p
    a2s = (a2 + 3 * r) % p
    a3s = (a3 + r * a1 + 2 * t) % p
    a4s = (a4 + 2 * r * a2 + 3 * r * r - t * a1) % p
    a6s = (a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1) % p
    if (a3s, a4s, a6s) != (0, 0, 0):
        raise ArithmeticError(f"translation to singular point failed mod {p}")
    # tangent cone y^2 + a1 x y - a2 x^2; node iff two distinct tangents
    if p == 2:
        if a1s == 0:
            return ("additive", 0)
        return ("multiplicative", 1 if a2s == 0 else -1)
    dq = (a1s * a1s + 4 * a2s) % p
    if dq == 0:
        return ("additive", 0)
    return ("multiplicative", 1 if pow(dq, (p - 1) // 2, p) == 1 else -1)


@dataclass
class ApTable:
    """Memo of a_p values for one curve run, with provenance per prime."""

    entries: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def get(self, curve: CurveQ, p: int) -> int:
        key = (curve.ainvs, p)
        if key not in self.entries:
            self.entries[key] = ap(curve, p)
            self.provenance[key] = "computed"
        return self.entries[key]

    def put(self, curve: CurveQ, p: int, value: int, provenance: str = "cache"):
        if abs(value) > 2 * math.isqrt(p) + 1:
            raise ValueError(f"cached a_{p} = {value} violates the Hasse bound")
        self.entries[(curve.ainvs, p)] = value
        self.provenance[(curve.ainvs, p)] = provenance


@dataclass
class AnSeries:
    n_max: int
    values: np.ndarray  # index n, values[0] unused

    def __getitem__(self, n: int) -> int:
        return int(self.values[n])


def _spf_sieve(n: int) -> np.ndarray:
    spf = np.arange(n + 1, dtype=np.int64)
    for i in range(2, math.isqrt(n) + 1):
        if spf[i] == i:
            sl = spf[i * i :: i]
            sl[sl == np.arange(i * i, n + 1, i)] = i
    return spf


def an_series(curve: CurveQ, n_max: int, ap_source=None) -> AnSeries:
    """Fourier coefficients a_1..a_{n_max} via the Euler product recursion.

    Good p: a_{p^k} = a_p a_{p^{k-1}} - p a_{p^{k-2}}; multiplicative bad p:
    a_{p^k} = a_p^k with a_p = +-1; additive bad p: a_{p^k} = 0.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if ap_source is None:
        table = ApTable()
        ap_source = lambda p: table.get(curve, p)
    a = np.zeros(n_max + 1, dtype=np.int64)
    a[1] = 1
    if n_max == 1:
        return AnSeries(1, a)
    spf = _spf_sieve(n_max)
    bad = {p: reduction_type(curve, p)[1] for p in prime_divisors(curve.N) if p <= n_max}
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        if m > 1:
            a[n] = a[n // m] * a[m]
        elif p in bad:
            a[n] = bad[p] ** e
        elif e == 1:
            a[n] = ap_source(p)
        else:
            a[n] = a[p] * a[n // p] - p * a[n // (p * p)]
    return AnSeries(n_max, a)
