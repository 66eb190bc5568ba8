import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotclt.diophantine import Angle
from rotclt.observable import CosineSeries, evaluate
from rotclt.spectral import sigma2
from rotclt.stats import ks_uniform
from rotclt.walk import (WalkConfig, exact_tail, local_times, mc_clt, mc_tail, positions, simulate_sum, sums,
                         trajectory, trial_dump_csv)

GOLD = Angle.golden_conjugate()
COS1 = CosineSeries.single(1, 1)


def naive_sum(cfg, s, trial):
    """Exact-rational reference: evaluate each position of the trajectory."""
    tr = trajectory(cfg, trial)
    alpha = cfg.angle.approx()
    return math.fsum(evaluate(s, tr.start.value + w * alpha) for w in tr.displacements)


def test_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(GOLD, 0, 10)
    with pytest.raises(ValueError):
        WalkConfig(GOLD, 10, 10, F(1, 2))
    with pytest.raises(ValueError):
        WalkConfig(GOLD, 10, 10, seed=-1)
    assert WalkConfig(F(1, 3), 5, 5).angle.value() == F(1, 3)


def test_trajectory_steps():
    tr = trajectory(WalkConfig(GOLD, 200, 1, seed=3), 0)
    W = tr.displacements
    assert W[0] == 0
    assert all(abs(b - a) == 1 for a, b in zip(W, W[1:]))
    assert tr.position(5).value == (tr.start.value + W[5] * GOLD.approx()) % 1


def test_empty_series():
    assert not sums(WalkConfig(GOLD, 50, 20), CosineSeries.empty()).any()
    est = mc_tail(WalkConfig(GOLD, 50, 1000), CosineSeries.empty(), 1)
    assert est.estimate == 0 and est.lo == 0 and est.hi < 0.01


def test_single_step_is_cosine_of_start():
    cfg = WalkConfig(GOLD, 1, 200, seed=9)
    S = sums(cfg, COS1)
    xs = [float(trajectory(cfg, k).start.value) for k in range(200)]
    assert np.allclose(S, np.cos(2 * np.pi * np.array(xs)), atol=1e-12)
    est = mc_tail(WalkConfig(GOLD, 1, 20000, seed=1), COS1, 0)
    assert est.lo <= 0.5 <= est.hi


def test_half_rotation_fixes_frequency_two():
    n = 37
    cfg = WalkConfig(F(1, 2), n, 50, seed=4)
    S = sums(cfg, CosineSeries.single(2, 1))
    xs = np.array([float(trajectory(cfg, k).start.value) for k in range(50)])
    assert np.allclose(S, n * np.cos(4 * np.pi * xs), atol=1e-9)


@given(st.integers(1, 300), st.sampled_from([GOLD, Angle.rational(F(5, 17)), Angle.rational(F(23200, 69601))]),
       st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_sums_match_exact_reference(n, angle, seed):
    s = CosineSeries(((1, F(1, 2)), (3, F(1, 8)), (7, -0.25)))
    cfg = WalkConfig(angle, n, 4, seed=seed)
    S = sums(cfg, s)
    for k in range(4):
        assert abs(S[k] - naive_sum(cfg, s, k)) < 1e-9 * max(1, n)


def test_many_terms_histogram_path():
    s = CosineSeries(tuple((q, F(1, q)) for q in range(1, 9)))
    cfg = WalkConfig(GOLD, 60, 5, seed=2)
    S = sums(cfg, s)
    for k in range(5):
        assert abs(S[k] - naive_sum(cfg, s, k)) < 1e-9


def test_simulate_sum_matches_sums():
    cfg = WalkConfig(GOLD, 500, 9000, seed=11)
    S = sums(cfg, COS1)
    for k in (0, 4193, 4194, 8999):
        assert simulate_sum(cfg, COS1, k) == S[k]


def test_thread_count_does_not_change_results():
    a = sums(WalkConfig(GOLD, 300, 20000, seed=5, threads=1), COS1)
    b = sums(WalkConfig(GOLD, 300, 20000, seed=5, threads=3), COS1)
    assert a.tobytes() == b.tobytes()


def test_seeds_give_different_streams():
    a = sums(WalkConfig(GOLD, 30, 100, seed=1), COS1)
    b = sums(WalkConfig(GOLD, 30, 100, seed=2), COS1)
    assert not np.array_equal(a, b)


def test_stationarity():
    Y = positions(WalkConfig(GOLD, 40, 3000, seed=8))
    pvals = [ks_uniform(Y[:, i])[1] for i in range(40)]
    # at the 1% level a handful of rejections among 40 columns would still be plausible
    assert sum(p < 0.01 for p in pvals) <= 2


@given(st.integers(2, 12), st.fractions(min_value=0, max_value=1, max_denominator=1000),
       st.integers(0, 2**11 - 1))
@settings(max_examples=50)
def test_reflection_symmetry(n, x, code):
    # S(x, eps) = S(-x, -eps) for cosine observables
    s = CosineSeries(((1, 1), (2, F(1, 3))))
    a = F(7, 19)
    eps = [1 if (code >> i) & 1 else -1 for i in range(n - 1)]
    W = np.concatenate([[0], np.cumsum(eps)])
    fwd = math.fsum(evaluate(s, x + int(w) * a) for w in W)
    bwd = math.fsum(evaluate(s, -x - int(w) * a) for w in W)
    assert abs(fwd - bwd) < 1e-12


def test_local_times_count_paths():
    for n in (1, 2, 5, 9):
        H, c = local_times(n)
        assert c.sum() == 2 ** (n - 1)
        assert (H.sum(axis=1) == n).all()


def brute_tail(s, alpha, n, t, s_exp, M):
    hits = 0
    scale = n ** float(s_exp)
    for code in range(2 ** (n - 1)):
        W = [0]
        for i in range(n - 1):
            W.append(W[-1] + (1 if (code >> i) & 1 else -1))
        for m in range(M):
            x = F(2 * m + 1, 2 * M)
            S = math.fsum(evaluate(s, x + w * alpha) for w in W)
            hits += S / scale > t
    return hits / (2 ** (n - 1) * M)


def test_exact_tail_matches_brute_force():
    s = CosineSeries(((1, 1), (3, F(1, 2))))
    for n, t in ((1, 0.2), (3, 0.1), (5, 0.3)):
        want = brute_tail(s, F(5, 13), n, t, 1, 2048)
        assert exact_tail(s, F(5, 13), n, t, 1, M=2048) == pytest.approx(want, abs=1e-12)


def test_exact_tail_examples():
    z = CosineSeries.empty()
    assert exact_tail(z, GOLD, 6, 0.1) == 0
    assert exact_tail(z, GOLD, 6, -0.1) == 1
    assert abs(exact_tail(COS1, GOLD, 1, 0) - 0.5) <= 1 / 2048
    with pytest.raises(ValueError):
        exact_tail(COS1, GOLD, 21, 0)
    with pytest.raises(ValueError):
        exact_tail(COS1, GOLD, 4, 0, M=1024)


def test_exact_tail_step_flip_invariance():
    s = CosineSeries(((1, 1), (2, F(1, 3))))
    a = exact_tail(s, F(3, 11), 9, 0.2, 1, M=4096)
    b = exact_tail(s, F(8, 11), 9, 0.2, 1, M=4096)
    assert a == pytest.approx(b, abs=1e-12)


def test_mc_tail_contains_exact():
    s = CosineSeries(((1, 1), (2, F(1, 2))))
    p = exact_tail(s, GOLD, 8, 0.3, F(3, 5))
    est = mc_tail(WalkConfig(GOLD, 8, 100000, F(3, 5), seed=21), s, 0.3)
    assert est.lo <= p <= est.hi
    assert est.lo <= est.estimate <= est.hi
    assert est.config["series"] == s.to_json()


def test_mc_clt_golden():
    cfg = WalkConfig(GOLD, 2000, 4000, seed=3)
    sig = math.sqrt(sigma2(COS1, GOLD))
    rep = mc_clt(cfg, COS1, sig)
    assert abs(rep.variance / sig**2 - 1) < 0.1
    assert rep.ks_pass


def test_mc_clt_rational_quarter():
    a = Angle.rational(F(1, 4))
    sig = math.sqrt(sigma2(COS1, a))
    rep = mc_clt(WalkConfig(a, 2000, 4000, seed=3), COS1, sig)
    assert abs(rep.variance / sig**2 - 1) < 0.1
    assert rep.ks_pass


def test_mc_clt_degenerate():
    rep = mc_clt(WalkConfig(GOLD, 20, 500), CosineSeries.empty(), 1.0)
    assert rep.degenerate and rep.ks == 0.5
    with pytest.raises(ValueError):
        mc_clt(WalkConfig(GOLD, 20, 500), COS1, 0.0)


def test_trial_dump():
    cfg = WalkConfig(GOLD, 10, 3)
    text = trial_dump_csv(cfg, sums(cfg, COS1))
    lines = text.splitlines()
    assert lines[0] == "trial,S_n,S_n_scaled" and len(lines) == 4
