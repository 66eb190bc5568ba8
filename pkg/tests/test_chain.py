import math
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotclt.chain import (FiniteChain, chain_spectrum, lemma2_bound, lemma2_bound_exact, lemma2_constant,
                          lemma2_find_N, max_deviation, mixing_bound, rho_bounds, spectral_gap_radius,
                          stationary_mean, verify_mixing)
from rotclt.diophantine import Angle
from rotclt.observable import CosineSeries
from rotclt.spectral import ResonanceError
from rotclt.walk import exact_tail


def test_chain_validation():
    with pytest.raises(ValueError):
        FiniteChain(4)
    with pytest.raises(ValueError):
        FiniteChain(9, 3)
    assert FiniteChain(1).int_matrix() == [[2]]


def test_matrix_is_doubly_stochastic_circulant():
    P = FiniteChain(7, 3).matrix()
    for i in range(7):
        assert sum(P[i]) == 1 and sum(row[i] for row in P) == 1
        for j in range(7):
            assert P[i][j] == P[j][i] == P[0][(j - i) % 7]


def test_spectrum_examples():
    assert chain_spectrum(FiniteChain(3)) == [1.0, -0.5, -0.5]
    got = chain_spectrum(FiniteChain(5, 2))
    want = [1.0] + [math.cos(2 * math.pi * 2 * k / 5) for k in range(1, 5)]
    assert got == pytest.approx(want, abs=1e-15)
    assert spectral_gap_radius(FiniteChain(5, 2)) == pytest.approx(math.cos(math.pi / 5))
    assert chain_spectrum(FiniteChain(1)) == [1.0]
    assert spectral_gap_radius(FiniteChain(1)) == 0


def test_mixing_examples():
    c = FiniteChain(3)
    assert max_deviation(c, 4) <= F(1, 16)
    mb = mixing_bound(c)
    assert (mb.A, mb.rho_lower, mb.rho_upper) == (1, F(1, 2), F(1, 2))
    assert all(max_deviation(FiniteChain(1), n) == 0 for n in range(1, 6))
    assert mixing_bound(FiniteChain(5, 1)).rho == pytest.approx(math.cos(math.pi / 5))


@pytest.mark.parametrize("q", [3, 5, 7, 9])
def test_matrix_power_verification(q):
    rows = verify_mixing(FiniteChain(q), 64)
    assert len(rows) == 64 and all(ok for _, _, ok in rows)


def test_rho_bracket():
    for q in (5, 7, 9, 101):
        lo, hi = rho_bounds(q)
        with mpmath.workprec(200):
            c = mpmath.cos(mpmath.pi / q)
            assert mpmath.mpf(lo.numerator) / lo.denominator <= c <= mpmath.mpf(hi.numerator) / hi.denominator
        assert hi - lo < 1e-12


def test_lemma2_bound_example():
    s = CosineSeries.single(1, 1)
    got = lemma2_bound(s, FiniteChain(3), 10**4, F(3, 5), F(1, 4))
    want = (0.5 + 2 * 1 * 3 * 1 / (1 - 0.5)) / ((1 / 16) * (10**4) ** 0.2)
    assert got == pytest.approx(want, rel=1e-14)
    assert got == pytest.approx(31.6979, abs=1e-4)


def test_lemma2_scalings():
    s = CosineSeries.single(2, F(1, 3))
    c = FiniteChain(5)
    b = lemma2_bound_exact(s, c, 1000, F(3, 5), F(1, 4))
    assert lemma2_bound_exact(s, c, 1000, F(3, 5), F(1, 2)) * 4 == b
    vals = [lemma2_bound(s, c, n, F(3, 5), F(1, 4)) for n in (1, 10, 100, 10**4)]
    assert vals == sorted(vals, reverse=True)


def test_lemma2_find_N():
    s = CosineSeries.single(1, 1)
    c = FiniteChain(3)
    N = lemma2_find_N(s, c, F(3, 5), F(1, 4), F(1, 24))
    assert lemma2_bound_exact(s, c, N, F(3, 5), F(1, 4)) < F(1, 24)
    assert not lemma2_bound_exact(s, c, N - 1, F(3, 5), F(1, 4)) < F(1, 24)
    # trivially small bound at n = 1
    assert lemma2_find_N(CosineSeries.single(1, F(1, 1000)), c, F(3, 5), 1, 1) == 1
    # delta -> delta/2 multiplies N by about 2**(2/(2s-1)) = 2**10
    N2 = lemma2_find_N(s, c, F(3, 5), F(1, 8), F(1, 24))
    assert N2 / N == pytest.approx(2**10, rel=1e-3)


def test_resonant_frequency_rejected():
    with pytest.raises(ResonanceError):
        lemma2_constant(CosineSeries.single(6, 1), FiniteChain(3))


@given(st.sampled_from([3, 5, 7, 9, 11]), st.integers(1, 40), st.fractions(min_value=0, max_value=1,
                                                                          max_denominator=97))
def test_stationary_mean_zero(q, qp, x):
    c = FiniteChain(q, 2 if q % 2 else 1)
    s = CosineSeries.single(qp, 1)
    m = stationary_mean(s, c, x)
    if qp % q:
        assert abs(m) < 1e-12
    else:
        assert abs(m - math.cos(2 * math.pi * qp * float(x))) < 1e-12


@given(st.sampled_from([3, 5, 7]), st.integers(1, 12), st.integers(1, 10),
       st.fractions(min_value=F(1, 20), max_value=2, max_denominator=20))
@settings(max_examples=30, deadline=None)
def test_bound_dominates_exact_tail(q, n, qp, delta):
    if qp % q == 0:
        qp += 1
    s = CosineSeries.single(qp, 1)
    b = lemma2_bound(s, FiniteChain(q), n, F(3, 5), delta)
    p = exact_tail(s, Angle.rational(F(1, q)), n, delta, F(3, 5), M=2048, two_sided=True)
    assert b >= p
