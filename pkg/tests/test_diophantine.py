import math
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotclt.diophantine import (Angle, ExactHit, InsufficientDigits, PrecisionBudgetExceeded, build_liouville,
                                continued_fraction, convergents, find_witnesses, make_witness, witness_exponent)
from rotclt.exact import PowerProduct

GOLDEN = (mpmath.sqrt(5) - 1) / 2


def test_continued_fraction_examples():
    assert continued_fraction(Angle.rational(F(1, 3)), 10) == [0, 3]
    assert continued_fraction(Angle.rational(F(16, 113)), 10) == [0, 7, 16]
    assert continued_fraction(Angle.golden_conjugate(), 8) == [0] + [1] * 7


def test_golden_convergents_beat_q_squared():
    a = Angle.golden_conjugate()
    with mpmath.workprec(400):
        g = (mpmath.sqrt(5) - 1) / 2
        for k in range(1, 60):
            p, q = a.convergent(k)
            assert abs(g - mpmath.mpf(p) / q) < mpmath.mpf(1) / q**2


def test_convergents_examples():
    assert convergents([0, 1, 1, 1, 1]) == [(0, 1), (1, 1), (1, 2), (2, 3), (3, 5)]
    assert convergents([0, 3]) == [(0, 1), (1, 3)]
    assert convergents([0, 2, 2]) == [(0, 1), (1, 2), (2, 5)]


def test_witness_exponent_golden():
    # independent high-precision evaluation of -ln|alpha - 2/3| / ln 3
    with mpmath.workprec(200):
        want = -mpmath.log(abs(GOLDEN - mpmath.mpf(2) / 3)) / mpmath.log(3)
    got = witness_exponent(Angle.golden_conjugate(), 2, 3)
    assert abs(got - float(want)) < 1e-12
    assert abs(got - 2.7521) < 1e-3


def test_witness_exponent_exact_hit():
    with pytest.raises(ExactHit):
        witness_exponent(Angle.rational(F(2, 3)), 2, 3)


def test_convergent_exponents_exceed_two():
    a = Angle.golden_conjugate()
    for k in range(2, 30):
        assert witness_exponent(a, *a.convergent(k)) > 2


def test_truncated_angle_signals_insufficient_digits():
    a = Angle((0, 1, 2), None)
    with pytest.raises(InsufficientDigits):
        continued_fraction(a, 10)


@given(st.fractions(min_value=-10, max_value=10, max_denominator=10**9))
def test_roundtrip_rational(x):
    a = Angle.rational(x)
    p, q = convergents(continued_fraction(a))[-1]
    assert F(p, q) == x


@given(st.lists(st.integers(1, 50), min_size=2, max_size=25))
@settings(max_examples=100)
def test_alternation_and_gap(quots):
    a = Angle(tuple([0] + quots), (1, 2))
    x = a.approx(2000)
    for k in range(1, len(quots)):
        p, q = a.convergent(k)
        qn = a.convergent(k + 1)[1]
        d = x - F(p, q)
        assert (d > 0) == (k % 2 == 0)
        assert F(1, q * (qn + q)) < abs(d) < F(1, q * qn)
        lo, hi = a.gap_bounds(p, q)
        assert lo <= abs(d) <= hi


def test_liouville_k_schedule():
    a = build_liouville(lambda k: k, 4)
    p4, q4 = a.convergent(4)
    lo, hi = a.gap_bounds(p4, q4)
    assert hi <= F(1, q4**4)
    assert [a.convergent(k)[1] for k in range(1, 6)] == [1, 2, 3, 11, 1334]


def test_liouville_constant_two_is_minimal():
    a = build_liouville(lambda k: 2, 5)
    assert all(v == 1 for v in a.quotients[1:])


def test_liouville_gamma_six_witnesses():
    a = build_liouville(lambda k: 6, 3, prefix=(0, 10))
    ws = find_witnesses(a, 6, 1, max_index=4)
    assert [w.q for w in ws] == [10, 100001, a.convergent(3)[1]]
    for w in ws:
        assert w.certified
        assert PowerProduct.of(w.gap_upper) <= PowerProduct.power(w.q, -6)


def test_liouville_exponents_unbounded():
    a = build_liouville(lambda k: k, 6)
    ex = [witness_exponent(a, *a.convergent(k)) for k in range(3, 7)]
    assert all(e >= k for e, k in zip(ex, range(3, 7)))
    assert ex == sorted(ex)


def test_liouville_budget():
    with pytest.raises(PrecisionBudgetExceeded):
        build_liouville(lambda k: 2 * k, 8, max_bits=64)


def test_liouville_schedule_must_be_nondecreasing():
    with pytest.raises(ValueError):
        build_liouville(lambda k: 10 - k, 3)


def test_json_roundtrip():
    a = build_liouville(lambda k: k, 5)
    b = Angle.from_json(a.to_json())
    assert b.quotients == a.quotients and b.tail == a.tail
    d = a.to_json(3)
    d["convergents"][2][1] = "99"
    with pytest.raises(ValueError):
        Angle.from_json(d)


def test_witness_not_certified_for_golden():
    a = Angle.golden_conjugate()
    w = make_witness(a, *a.convergent(10), 3, 1)
    assert not w.certified
