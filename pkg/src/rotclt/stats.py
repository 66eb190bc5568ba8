"""Binomial confidence intervals and one-sample goodness of fit."""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np
from scipy import stats as _st


def z_value(confidence: float) -> float:
    return NormalDist().inv_cdf(0.5 + confidence / 2)


def wilson_interval(k: int, m: int, confidence: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for ``k`` successes in ``m`` trials."""
    if m <= 0:
        raise ValueError("need at least one trial")
    if not 0 <= k <= m:
        raise ValueError("successes must lie in [0, m]")
    z = z_value(confidence)
    p = k / m
    z2 = z * z
    denom = 1 + z2 / m
    centre = (p + z2 / (2 * m)) / denom
    half = z * math.sqrt(p * (1 - p) / m + z2 / (4 * m * m)) / denom
    lo, hi = centre - half, centre + half
    # exact endpoints at the boundary; rounding can push them a hair past p
    lo = 0.0 if k == 0 else min(max(lo, 0.0), p)
    hi = 1.0 if k == m else max(min(hi, 1.0), p)
    return lo, hi


def ks_normal(x: np.ndarray, sigma: float, mean: float = 0.0) -> float:
    """Kolmogorov-Smirnov distance of the sample to Normal(mean, sigma**2)."""
    return float(_st.kstest(np.asarray(x, dtype=np.float64), "norm", args=(mean, sigma)).statistic)


def ks_uniform(x: np.ndarray) -> tuple[float, float]:
    res = _st.kstest(np.asarray(x, dtype=np.float64), "uniform")
    return float(res.statistic), float(res.pvalue)


def ks_critical(m: int, coeff: float = 1.36) -> float:
    """Asymptotic 5% critical value ``1.36/sqrt(m)``."""
    return coeff / math.sqrt(m)
