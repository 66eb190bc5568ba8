import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotclt.exact import PowerProduct
from rotclt.observable import (CosineSeries, cr_norm_bound, cr_norm_log, evaluate, evaluate_exact, evaluate_grid,
                               fourier_coeff, t1_term, t2_amplitude, t2_term)

amps = st.fractions(min_value=F(-4), max_value=F(4), max_denominator=64)
series = st.dictionaries(st.integers(1, 40), amps, min_size=1, max_size=6).map(
    lambda d: CosineSeries(tuple(d.items())))


def test_eval_examples():
    assert evaluate(CosineSeries.single(1, 1), 0) == 1
    assert evaluate(CosineSeries.single(3, 1), F(1, 6)) == -1
    assert evaluate(CosineSeries(((1, 1), (2, 1))), F(1, 2)) == 0
    assert evaluate_exact(CosineSeries(((1, 1), (2, 1))), F(1, 2)) == 0


def test_eval_large_frequency_is_reduced_exactly():
    q = 3**60
    s = CosineSeries.single(q, 1)
    # q * (1/3 + 1/q) = 3**59 + 1 is an integer
    assert evaluate(s, F(1, 3) + F(1, q)) == 1.0


def test_validation():
    with pytest.raises(ValueError):
        CosineSeries(((0, 1),))
    with pytest.raises(ValueError):
        CosineSeries(((2, 1), (2, 3)))


def test_fourier_coeff_examples():
    s = CosineSeries.single(5, 2)
    assert fourier_coeff(s, 5) == 1
    assert fourier_coeff(s, -5) == 1
    assert fourier_coeff(s, 3) == 0
    assert fourier_coeff(s, 0) == 0


def test_cr_norm_examples():
    assert cr_norm_bound(CosineSeries.single(1, 1), 0) == 1
    assert math.isclose(cr_norm_bound(CosineSeries.single(2, 3), 1), 12 * math.pi)
    assert math.isclose(cr_norm_bound(CosineSeries(((1, 1), (2, F(1, 4)))), 2), 8 * math.pi**2)
    assert math.isclose(math.exp(cr_norm_log(CosineSeries.single(2, 3), 1)[0]), 12 * math.pi)


def test_term_constructors():
    assert t1_term(3).terms == ((3, F(1, 8)),)
    assert t1_term(1).terms == ((1, F(1, 2)),)
    assert t2_term(10, 6, F(3, 5)).terms == ((10, F(1, 100)),)
    a = t2_amplitude(10, 6, F(11, 20))
    assert isinstance(a, PowerProduct)
    assert math.isclose(float(a), 10**-2.25)
    with pytest.raises(ValueError):
        t2_term(10, 6, F(1, 2))


def test_json_roundtrip():
    s = CosineSeries(((3, F(1, 8)), (10, t2_amplitude(10, 6, F(11, 20))), (12, -0.25)), F(1, 100))
    assert CosineSeries.from_json(s.to_json()) == s


@given(series)
@settings(max_examples=60)
def test_quadrature_mean_and_parseval(s):
    M = 997  # prime, coprime to every frequency
    v = evaluate_grid(s, M)
    assert abs(v.mean()) < 1e-12
    assert abs((v**2).mean() - sum(float(a) ** 2 for _, a in s.terms) / 2) < 1e-10


@given(series)
@settings(max_examples=60)
def test_fourier_matches_dft(s):
    M = 128
    c = np.fft.fft(evaluate_grid(s, M)) / M
    for n in range(-40, 41):
        assert abs(c[n % M].real - float(fourier_coeff(s, n))) < 1e-12
        assert abs(c[n % M].imag) < 1e-12


@given(series, st.fractions(min_value=0, max_value=1, max_denominator=10**5))
def test_eval_grid_agrees_with_pointwise(s, off):
    M = 16
    v = evaluate_grid(s, M, off)
    for m in range(M):
        assert abs(v[m] - evaluate(s, (m + off) / M)) < 1e-12
