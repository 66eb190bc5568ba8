import math
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotclt.diophantine import Angle
from rotclt.observable import CosineSeries, evaluate_grid
from rotclt.spectral import (ResonanceError, eigenvalue, is_resonant, kv_partial, kv_scan, poisson_partial,
                             poisson_solve, prop1_criterion, sigma2, sigma2_partial, spectral_report,
                             transfer_apply)

angles = st.fractions(min_value=F(1, 10**6), max_value=1 - F(1, 10**6), max_denominator=10**6)
amps = st.fractions(min_value=F(-4), max_value=F(4), max_denominator=64).filter(lambda a: a != 0)
series = st.dictionaries(st.integers(1, 30), amps, min_size=1, max_size=6).map(
    lambda d: CosineSeries(tuple(d.items())))


def shifted(s: CosineSeries, a: F, M: int):
    """``(s(x + a) + s(x - a)) / 2`` on the grid, computed from exact shifted points."""
    return 0.5 * (evaluate_grid(s, M, a * M) + evaluate_grid(s, M, -a * M))


def test_eigenvalue_examples():
    assert eigenvalue(0, F(1, 7)) == 0
    assert eigenvalue(1, F(1, 4)) == 1
    assert eigenvalue(2, F(1, 2)) == 0
    assert is_resonant(2, F(1, 2))


def test_eigenvalue_small_phase_accuracy():
    a = Angle.golden_conjugate()
    n = a.convergent(40)[1]
    with mpmath.workprec(400):
        g = (mpmath.sqrt(5) - 1) / 2
        want = 1 - mpmath.cos(2 * mpmath.pi * n * g)
    assert abs(eigenvalue(n, a) / float(want) - 1) < 1e-12


def test_transfer_examples():
    assert transfer_apply(CosineSeries.single(1, 1), F(1, 2)).terms == ((1, -1),)
    assert transfer_apply(CosineSeries.single(3, 1), F(1, 3)).terms == ((3, 1),)
    assert transfer_apply(CosineSeries.single(1, 1), F(1, 4)).terms == ((1, 0),)


@given(st.integers(1, 50), angles)
@settings(max_examples=50)
def test_eigenrelation(n, a):
    u = CosineSeries.single(n, 1)
    M = 1024
    got = evaluate_grid(transfer_apply(u, a), M)
    want = shifted(u, a, M)
    assert abs(got - want).max() < 1e-12


def test_poisson_examples():
    sol = poisson_solve(CosineSeries.single(1, 1), F(1, 4), 10)
    assert sol.psi == {-1: 0.5, 1: 0.5}
    with pytest.raises(ResonanceError) as e:
        poisson_solve(CosineSeries.single(2, 1), F(1, 2), 10)
    assert e.value.frequency == 2
    assert poisson_solve(CosineSeries.empty(), F(1, 4), 10).psi == {}


@given(series, angles)
@settings(max_examples=40)
def test_poisson_residual(s, a):
    if any(is_resonant(q, a) or eigenvalue(q, a) < 1e-4 for q, _ in s.terms):
        return
    psi = poisson_solve(s, a, s.max_frequency).as_series()
    M = 2 * s.max_frequency + 3
    res = shifted(psi, a, M) - evaluate_grid(psi, M) + evaluate_grid(s, M)
    assert abs(res).max() < 1e-10


def test_partial_sum_examples():
    s = CosineSeries.single(1, 2)
    assert kv_partial(s, F(1, 4), 1) == 2
    assert sigma2_partial(s, F(1, 4), 1) == 2
    assert poisson_partial(s, F(1, 4), 1) == 2
    e = CosineSeries.empty()
    assert kv_partial(e, F(1, 4), 5) == poisson_partial(e, F(1, 4), 5) == sigma2_partial(e, F(1, 4), 5) == 0


def test_golden_single_term():
    s = CosineSeries.single(1, 1)
    a = Angle.golden_conjugate()
    with mpmath.workprec(200):
        g = (mpmath.sqrt(5) - 1) / 2
        c = mpmath.cos(2 * mpmath.pi * g)
        kv = 2 * mpmath.mpf(1) / 4 / (1 - c)
        sg = (1 + c) / (1 - c) / 2
    assert abs(kv_partial(s, a, 1) - float(kv)) < 1e-14
    assert abs(sigma2(s, a) - float(sg)) < 1e-14
    assert abs(sigma2(s, a) - 0.0755830052) < 1e-9


@given(series, angles)
@settings(max_examples=40)
def test_monotone_and_invariants(s, a):
    if any(is_resonant(q, a) for q, _ in s.terms):
        with pytest.raises(ResonanceError):
            kv_partial(s, a, s.max_frequency)
        return
    cuts = list(range(1, s.max_frequency + 1))
    vals = [v for _, v in kv_scan(s, a, cuts)]
    assert vals == sorted(vals)
    kv, po = kv_partial(s, a, s.max_frequency), poisson_partial(s, a, s.max_frequency)
    assert kv <= 2 * po * (1 + 1e-12)
    assert sigma2(s, a) > 0


def test_report_csv():
    rep = spectral_report(CosineSeries.single(1, 1), Angle.golden_conjugate(), 1)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "n,eigenvalue,kv_term,sigma2_term"
    assert len(lines) == 2


def test_prop1_examples():
    r = prop1_criterion(2, 2, 1)
    assert r.holds and r.exponent == 2
    assert not prop1_criterion(1, 2, 1)
    assert prop1_criterion(math.inf, 40, 1).holds
    assert prop1_criterion(2, 2, F(1, 2)).constant == F(1, 2)
    with pytest.raises(ValueError):
        prop1_criterion(2, 1, 1)
