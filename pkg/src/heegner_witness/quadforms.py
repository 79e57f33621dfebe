"""Imaginary quadratic discriminants, form class groups, ring class structure.

Binary quadratic forms (a, b, c) of discriminant D = b^2 - 4ac < 0 model ideal
classes of the order of discriminant D; Gaussian composition gives the group
law. The Galois group of the ring class field H_c over the Hilbert class field
is computed two ways: exactly, by enumerating (O_K/c)^* / (Z/c)^*, and by the
product-of-C_{p+1} shape it must have for squarefree c with all p | c inert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as _np

from .arith import euler_phi, factorize, is_prime, is_squarefree

UNIT_QUOTIENT_CEILING = 10**6


class InvalidDiscriminantError(ValueError):
    pass


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n), fully multiplicative extension of Legendre."""
    if n == 0:
        return 1 if d in (1, -1) else 0
    if d % 2 == 0 and n % 2 == 0:
        return 0
    result = 1
    if n < 0:
        n = -n
        if d < 0:
            result = -result
    while n % 2 == 0:
        n //= 2
        if d % 8 in (3, 5):
            result = -result
    # n odd positive; jacobi-style reciprocity loop
    d %= n
    while d != 0:
        while d % 2 == 0:
            d //= 2
            if n % 8 in (3, 5):
                result = -result
        d, n = n, d
        if d % 4 == 3 and n % 4 == 3:
            result = -result
        d %= n
    return result if n == 1 else 0


def is_fundamental(d: int) -> bool:
    if d == 1:
        return True
    if d == 0:
        return False
    if d % 4 == 1 or (d < 0 and d % 4 == -3):
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3, -2, -1) and is_squarefree(m)
    return False


@dataclass(frozen=True)
class Discriminant:
    d: int
    fundamental: bool

    def __post_init__(self):
        if self.d >= 0:
            raise InvalidDiscriminantError("imaginary quadratic: d must be negative")
        if self.d % 4 not in (0, 1):
            raise InvalidDiscriminantError(f"{self.d} is not 0 or 1 mod 4")
        if self.fundamental != is_fundamental(self.d):
            raise InvalidDiscriminantError(f"fundamental flag wrong for {self.d}")


def make_discriminant(d: int) -> Discriminant:
    return Discriminant(d, is_fundamental(d))


def _as_d(d) -> int:
    return d.d if isinstance(d, Discriminant) else d


def splitting_type(d_K, p: int) -> str:
    """'split', 'inert' or 'ramified' for the prime p in Q(sqrt(d_K))."""
    d = _as_d(d_K)
    if not is_fundamental(d):
        raise InvalidDiscriminantError(f"{d} is not a fundamental discriminant")
    s = kronecker(d, p)
    return {1: "split", -1: "inert", 0: "ramified"}[s]


def _check_disc(D: int):
    if D >= 0 or D % 4 not in (0, 1):
        raise InvalidDiscriminantError(f"invalid form discriminant {D}")


def reduce_form(a: int, b: int, c: int) -> tuple[int, int, int]:
    """Reduced representative of the class of the positive definite form (a,b,c)."""
    while True:
        if -a < b <= a <= c:
            if a == c and b < 0:
                b = -b
            return (a, b, c)
        if a > c:
            a, b, c = c, -b, a
            continue
        # normalize b into (-a, a]
        bn = b % (2 * a)
        if bn > a:
            bn -= 2 * a
        r = (bn - b) // (2 * a)
        c = a * r * r + b * r + c
        b = bn


def principal_form(D: int) -> tuple[int, int, int]:
    _check_disc(D)
    k = D % 2
    return (1, k, (k * k - D) // 4)


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """All reduced primitive forms of discriminant D < 0; one per class."""
    _check_disc(D)
    forms = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            q = b * b - D
            if q % (4 * a) == 0:
                c = q // (4 * a)
                if c >= a and math.gcd(math.gcd(a, b), c) == 1:
                    if a == c and b < 0:
                        continue
                    forms.append((a, b, c))
        a += 1
    return sorted(forms)


def _solve_linmod(a: int, b: int, m: int) -> tuple[int, int]:
    # solutions of a x = b (mod m) as x = u + v k
    g, d, _ = _gcdext(a, m)
    if b % g != 0:
        raise ArithmeticError("no solution in composition step")
    u = (b // g) * d % m
    v = m // g
    return u, v


def _gcdext(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def compose(f, g, D: int) -> tuple[int, int, int]:
    """Gaussian composition of primitive forms of discriminant D, reduced output."""
    a1, b1, c1 = f
    a2, b2, c2 = g
    for (a, b, c) in (f, g):
        if b * b - 4 * a * c != D:
            raise ValueError(f"form {(a, b, c)} does not have discriminant {D}")
    s = (b1 + b2) // 2
    h = (b2 - b1) // 2
    w = math.gcd(math.gcd(a1, a2), s)
    j = w
    sa = a1 // w
    t = a2 // w
    u = s // w
    mu, nu = _solve_linmod(t * u, h * u + sa * c1, sa * t)
    lam = _solve_linmod(t * nu, h - t * mu, sa)[0]
    k = mu + nu * lam
    ell = (k * t - h) // sa
    m = (t * u * k - h * u - c1 * sa) // (sa * t)
    A = sa * t
    B = j * u - (k * t + ell * sa)
    C = k * ell - j * m
    return reduce_form(A, B, C)


def form_inverse(f, D: int) -> tuple[int, int, int]:
    a, b, c = f
    return reduce_form(a, -b, c)


def canonical_invariants(orders) -> list[int]:
    """Elementary divisor form (each divides the next) of prod C_{n} over orders."""
    primary: dict[int, list[int]] = {}
    for n in orders:
        if n < 1:
            raise ValueError("cyclic orders must be positive")
        for p, e in factorize(n):
            primary.setdefault(p, []).append(e)
    slots: dict[int, dict[int, int]] = {}
    width = 0
    for p, exps in primary.items():
        exps.sort(reverse=True)
        width = max(width, len(exps))
        slots[p] = dict(enumerate(exps))
    divisors = []
    for i in range(width):
        d = 1
        for p, byrank in slots.items():
            if i in byrank:
                d *= p ** byrank[i]
        divisors.append(d)
    divisors.sort()
    return divisors


def pow_divides(o: int, p: int, j: int) -> bool:
    # does x of order o satisfy x^(p^j) = 1, i.e. o | p^j
    while o % p == 0:
        o //= p
        j -= 1
        if j < 0:
            return False
    return o == 1


def _exact_plog(n: int, p: int) -> int:
    e = 0
    while n > 1:
        if n % p != 0:
            raise ArithmeticError(f"count {n} is not a power of {p}")
        n //= p
        e += 1
    return e


def abelian_invariants(n: int, element_orders) -> list[int]:
    """Elementary divisors of an abelian group of order n given all element orders."""
    from collections import Counter

    cnt = Counter(element_orders)
    if sum(cnt.values()) != n:
        raise ValueError("element order multiset does not match group order")
    partitions: dict[int, list[int]] = {}
    for p, e_max in factorize(n):
        s = [0]
        for j in range(1, e_max + 1):
            cj = sum(c for o, c in cnt.items() if pow_divides(o, p, j))
            s.append(_exact_plog(cj, p))
        # number of cyclic p-factors of exponent >= j is s[j] - s[j-1]
        ranks = [s[j] - s[j - 1] for j in range(1, e_max + 1)]
        part = []
        for j, r in enumerate(ranks, start=1):
            nxt = ranks[j] if j < len(ranks) else 0
            for _ in range(r - nxt):
                part.append(p ** j)
        partitions[p] = sorted(part, reverse=True)
    width = max((len(v) for v in partitions.values()), default=0)
    out = []
    for i in range(width):
        d = 1
        for p, part in partitions.items():
            if i < len(part):
                d *= part[i]
        out.append(d)
    out.sort()
    return out


@dataclass
class ClassGroup:
    D: int
    forms: list
    table: dict
    invariants: list

    @property
    def order(self) -> int:
        return len(self.forms)


def class_group(D: int) -> ClassGroup:
    """Form class group of discriminant D: representatives, table, invariants."""
    forms = reduced_forms(D)
    h = len(forms)
    table = {}
    for f in forms:
        for g in forms:
            table[(f, g)] = compose(f, g, D)
    ident = reduce_form(*principal_form(D))
    orders = []
    for f in forms:
        acc, o = f, 1
        while acc != ident:
            acc = table[(acc, f)]
            o += 1
            if o > h:
                raise ArithmeticError("element order exceeds group order; composition bug")
        orders.append(o)
    inv = abelian_invariants(h, orders) if h > 1 else []
    return ClassGroup(D, forms, table, inv)


def class_number(D: int) -> int:
    return len(reduced_forms(D))


def unit_quotient_structure(d_K, c: int) -> list[int]:
    """Abelian invariants of (O_K/c)^* / (Z/c)^* by residue enumeration.

    Requires d_K = 1 mod 4 (so O_K = Z[w], w = (1+sqrt(d_K))/2), gcd(c, d_K) = 1,
    and c^2 within the enumeration ceiling.
    """
    d = _as_d(d_K)
    if d % 4 != 1:
        raise InvalidDiscriminantError("residue enumeration needs d_K = 1 mod 4")
    if c < 1:
        raise ValueError("conductor must be positive")
    if math.gcd(c, d) != 1:
        raise ValueError("conductor must be coprime to d_K")
    if c * c > UNIT_QUOTIENT_CEILING:
        raise ValueError(f"c^2 = {c * c} exceeds enumeration ceiling")
    if c == 1:
        return []
    w2 = (d - 1) // 4  # w^2 = w2 + w

    def mul(u, v):
        x1, y1 = u
        x2, y2 = v
        yy = y1 * y2
        return ((x1 * x2 + yy * w2) % c, (x1 * y2 + x2 * y1 + yy) % c)

    # norm of x + y w is x^2 + x y + y^2 (1 - d)/4
    nf = (1 - d) // 4
    xs = _np.arange(c, dtype=_np.int64)
    X, Y = _np.meshgrid(xs, xs, indexing="ij")
    norms = (X * X + X * Y + nf * (Y * Y)) % c
    mask = _np.gcd(norms, c) == 1
    units = list(zip(X[mask].tolist(), Y[mask].tolist()))
    rational = [(t, 0) for t in range(c) if math.gcd(t, c) == 1]
    coset_id: dict = {}
    next_id = 0
    for u in units:
        if u in coset_id:
            continue
        for t in rational:
            coset_id[mul(u, t)] = next_id
        next_id += 1
    id0 = coset_id[(1, 0)]
    n_cosets = next_id
    reps: list = [None] * n_cosets
    for u in units:
        if reps[coset_id[u]] is None:
            reps[coset_id[u]] = u
    orders = []
    for rep in reps:
        acc, o = rep, 1
        while coset_id[acc] != id0:
            acc = mul(acc, rep)
            o += 1
            if o > n_cosets:
                raise ArithmeticError("quotient order bug")
        orders.append(o)
    return abelian_invariants(n_cosets, orders) if n_cosets > 1 else []


@dataclass(frozen=True)
class RingClassStructure:
    d_K: int
    conductor: int
    primes: tuple
    factors: tuple  # cyclic orders p_i + 1, in prime order
    invariants: tuple  # canonical elementary divisors
    degree: int


def ring_class_structure(d_K, primes) -> RingClassStructure:
    """Gal(H_c/H) for squarefree c = prod p_i with every p_i inert in K.

    The group is C_{p_1+1} x ... x C_{p_n+1}; invariants are returned in
    elementary divisor form. Cross-checked against residue enumeration when
    the conductor is small enough.
    """
    d = _as_d(d_K)
    if not is_fundamental(d):
        raise InvalidDiscriminantError(f"{d} is not fundamental")
    ps = list(primes)
    if len(set(ps)) != len(ps):
        raise ValueError("tower primes must be distinct")
    for p in ps:
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if kronecker(d, p) != -1:
            raise ValueError(f"{p} is not inert in Q(sqrt({d}))")
    c = math.prod(ps) if ps else 1
    factors = tuple(p + 1 for p in ps)
    degree = math.prod(factors) if factors else 1
    inv = tuple(canonical_invariants(factors))
    if c * c <= UNIT_QUOTIENT_CEILING and d % 4 == 1:
        enum = tuple(unit_quotient_structure(d, c))
        if enum != inv:
            raise ArithmeticError(
                f"ring class structure mismatch for d_K={d}, c={c}: "
                f"enumeration {enum} vs formula {inv}"
            )
    return RingClassStructure(d, c, tuple(ps), factors, inv, degree)
