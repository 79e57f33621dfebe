import math

import pytest

from heegner_witness.arith import euler_phi, primes_upto
from heegner_witness.quadforms import kronecker
from heegner_witness.searcher import (
    CartanCountProblem,
    FieldSearchExhausted,
    PrimeSearchExhausted,
    cartan_counts,
    cartan_group_order,
    choose_q,
    crt_target,
    find_K,
    heegner_hypothesis,
    prime_sequence,
    verify_prime_item,
)


def test_find_K_37a(e37a):
    res = find_K(e37a)
    assert res.d_K == -7
    assert res.cong4 and res.coprime and res.heegner and res.lprime_nonzero
    assert res.accepted


def test_find_K_11a(e11a):
    res = find_K(e11a)
    assert res.d_K == -7
    assert kronecker(-7, 11) == 1  # 11 splits


def test_find_K_stable_under_larger_bound(e37a):
    assert find_K(e37a, scan_bound=200).d_K == find_K(e37a, scan_bound=400).d_K


def test_find_K_exhaustion(e37a):
    with pytest.raises(FieldSearchExhausted):
        find_K(e37a, scan_bound=5)


def test_choose_q(e37a, e11a):
    assert choose_q(e37a, -7) == 3
    assert choose_q(e11a, -7) == 3


def test_choose_q_cm_bound():
    # toy CM constraint check: |d_K| = 7 forces q > 1 + 2*7^4/6 = 801.33
    from heegner_witness.ec_core import CurveQ

    e_cm = CurveQ(0, 0, 0, 1, 0, 32, "32a")  # CM by Q(i), d_F = -4
    q = choose_q(e_cm, -7, cm_field=-4)
    assert q >= 809
    assert q > 1 + 2 * 7**4 / 6
    assert kronecker(-4, q) == 1
    assert math.gcd(q, 2 * 7 * 32) == 1


def test_prime_sequence_37a(e37a):
    items = prime_sequence(e37a, -7, 3, 3)
    assert items[0].p == 5
    assert all(it.accepted for it in items)
    # 11 must have been rejected: it is split in Q(sqrt(-7))
    assert 11 not in [it.p for it in items]
    assert kronecker(-7, 11) == 1
    for it in items:
        assert verify_prime_item(e37a, -7, 3, it)
        assert it.p % 3 == 2
        assert it.a_p % 3 != 0


def test_prime_sequence_never_contains_q(e37a):
    # p = q fails p = -1 mod q for q > 2
    items = prime_sequence(e37a, -7, 3, 5)
    assert 3 not in [it.p for it in items]


def test_prime_sequence_exhaustion(e37a):
    with pytest.raises(PrimeSearchExhausted) as ei:
        prime_sequence(e37a, -7, 3, 50, p_bound=100)
    assert 0 < len(ei.value.partial) < 50


def test_crt_target():
    b = crt_target(3, -7, 3)
    assert b == 17
    assert b % 3 == 2 and b % 7 == 3
    b = crt_target(5, -7, -1)
    assert b % 5 == 4 and b % 7 == 6
    with pytest.raises(ValueError):
        crt_target(7, -7, 1)


def test_cartan_counts_examples():
    dc, _ = cartan_counts(CartanCountProblem(5, ("split",), 2))
    assert dc == 4 == euler_phi(5)
    dc, _ = cartan_counts(CartanCountProblem(3, ("nonsplit",), 2))
    assert dc == 4  # norm fibers of F_9^* -> F_3^* have size 4
    # trace-0 fiber: diag(x,-x) with -x^2 = b; -2 = 3 is a non-residue mod 5,
    # -4 = 1 is a residue with roots +-1
    dc, tc = cartan_counts(CartanCountProblem(5, ("split",), 2, trace_zero_mod=5))
    assert dc == 4 and tc == 0
    dc, tc = cartan_counts(CartanCountProblem(5, ("split",), 4, trace_zero_mod=5))
    assert dc == 4 and tc == 2


def test_cartan_lower_bound_and_partition():
    for m in range(2, 51):
        from heegner_witness.arith import is_squarefree

        if not is_squarefree(m):
            continue
        ps = [p for p in primes_upto(m) if m % p == 0]
        for assignment in (("split",) * len(ps), ("nonsplit",) * len(ps)):
            total = 0
            units = [b for b in range(1, m) if math.gcd(b, m) == 1]
            for b in units:
                dc, _ = cartan_counts(CartanCountProblem(m, assignment, b))
                assert dc >= euler_phi(m)
                total += dc
            assert total == cartan_group_order(m, assignment)


def test_cartan_mixed_types():
    # m = 15, split at 3 and nonsplit at 5
    dc, _ = cartan_counts(CartanCountProblem(15, ("split", "nonsplit"), 2))
    assert dc >= euler_phi(15)
    total = sum(
        cartan_counts(CartanCountProblem(15, ("split", "nonsplit"), b))[0]
        for b in range(1, 15)
        if math.gcd(b, 15) == 1
    )
    assert total == cartan_group_order(15, ("split", "nonsplit"))


def test_cartan_validation():
    with pytest.raises(ValueError):
        CartanCountProblem(12, ("split", "split"), 1)  # not squarefree
    with pytest.raises(ValueError):
        CartanCountProblem(15, ("split", "split"), 3)  # det not invertible
    with pytest.raises(ValueError):
        cartan_counts(CartanCountProblem(211, ("split",), 2))  # beyond bound


def test_heegner_hypothesis(e37a, e11a):
    assert heegner_hypothesis(e37a, -7)
    assert heegner_hypothesis(e37a, -11)
    assert heegner_hypothesis(e11a, -7)
    assert not heegner_hypothesis(e37a, -19)  # 37 inert in Q(sqrt(-19))
    # 2 is inert in Q(sqrt(-11)) (d = 5 mod 8), so conductor 32 fails
    from heegner_witness.ec_core import CurveQ

    e_cm = CurveQ(0, 0, 0, 1, 0, 32, "32a")
    assert not heegner_hypothesis(e_cm, -11)
