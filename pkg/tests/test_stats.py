import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from statsmodels.stats.proportion import proportion_confint

from rotclt.stats import ks_critical, ks_normal, ks_uniform, wilson_interval, z_value


@given(st.integers(1, 10**6).flatmap(lambda m: st.tuples(st.integers(0, m), st.just(m))))
def test_wilson_matches_statsmodels(km):
    k, m = km
    lo, hi = wilson_interval(k, m, 0.99)
    want = proportion_confint(k, m, alpha=0.01, method="wilson")
    assert abs(lo - want[0]) < 1e-9 and abs(hi - want[1]) < 1e-9
    assert lo <= k / m <= hi


def test_wilson_edges():
    assert wilson_interval(0, 100)[0] == 0.0
    assert wilson_interval(100, 100)[1] == 1.0
    with pytest.raises(ValueError):
        wilson_interval(3, 2)
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_wilson_shrinks_like_root_m():
    w1 = np.diff(wilson_interval(250, 1000))[0]
    w2 = np.diff(wilson_interval(25000, 100000))[0]
    assert abs(w1 / w2 - 10) < 0.2


def test_z_value():
    assert abs(z_value(0.99) - 2.5758293035489) < 1e-9


def test_ks():
    rng = np.random.default_rng(1)
    x = rng.normal(0, 2, 4000)
    assert ks_normal(x, 2.0) < ks_critical(4000)
    assert ks_normal(np.zeros(100), 1.0) == 0.5
    d, p = ks_uniform(rng.random(4000))
    assert p > 0.001
    assert math.isclose(ks_critical(10000), 0.0136)
