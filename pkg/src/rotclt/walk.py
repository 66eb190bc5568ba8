"""Simulation of the random rotation walk ``Y_{i+1} = Y_i +- alpha`` and its additive functionals.

Positions are never accumulated in floating point. A trial is the start
point ``x`` (a 64-bit dyadic) and the integer displacements ``W_i``; the
position is ``x + W_i * alpha`` and every phase ``q * (x + W_i alpha)`` is
reduced mod 1 in integer arithmetic before the single trig call.

The sum is evaluated with the angle-addition identity

    S = sum_j a_j Re( e(q_j x) * sum_i e(q_j W_i alpha) ),   e(t) = exp(2 pi i t)

so only one table of ``e(q_j w alpha)`` over ``|w| < n`` is needed per term.

Randomness: trial ``k`` under master seed ``s`` uses a Philox stream with key
``(s, k)``; word 0 is the start point and the bits of words 1, 2, ... are the
steps (bit ``i`` set means ``+alpha``). Trials are grouped into fixed blocks
and reduced in block order, so results do not depend on the thread count.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .circle import CirclePoint, frac_mul_u64, reduce
from .diophantine import Angle
from .exact import as_rational, fraction_str
from .observable import CosineSeries
from .stats import ks_critical, ks_normal, wilson_interval

_U64 = 2**64
# elements of the (trials x steps) work arrays per block
BLOCK_ELEMS = 1 << 21
# above this many terms the local-time histogram + matmul path is cheaper
HIST_TERMS = 4


@dataclass(frozen=True)
class WalkConfig:
    angle: Angle
    n: int
    m: int
    s: Fraction = Fraction(1)
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not isinstance(self.angle, Angle):
            object.__setattr__(self, "angle", Angle.rational(self.angle))
        s = as_rational(self.s)
        object.__setattr__(self, "s", s)
        if self.n < 1:
            raise ValueError("need n >= 1 steps")
        if self.m < 1:
            raise ValueError("need m >= 1 trials")
        if not Fraction(1, 2) < s <= 1:
            raise ValueError("scaling exponent must lie in (1/2, 1]")
        if not 0 <= self.seed < _U64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @property
    def block(self) -> int:
        # depends only on n, never on the thread count
        return max(1, BLOCK_ELEMS // self.n)

    @property
    def scale(self) -> float:
        return float(self.n) ** float(self.s)

    def to_json(self) -> dict:
        # threads is an execution detail and is left out on purpose
        return {"angle": self.angle.to_json(n_convergents=0), "n": self.n, "m": self.m,
                "s": fraction_str(self.s), "seed": self.seed}

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# -- random streams ---------------------------------------------------------

class _Streams:
    """Philox words for a range of trials; one generator per worker."""

    def __init__(self, seed: int):
        self.bg = np.random.Philox(key=np.array([seed, 0], dtype=np.uint64))
        self.state = self.bg.state

    def words(self, trials: range, nwords: int) -> np.ndarray:
        out = np.empty((len(trials), nwords), dtype=np.uint64)
        st = self.state
        for row, k in enumerate(trials):
            st["state"]["key"][1] = k
            st["state"]["counter"][:] = 0
            st["buffer_pos"] = 4
            st["has_uint32"] = 0
            self.bg.state = st
            out[row] = self.bg.random_raw(nwords)
        return out


def _nwords(n: int) -> int:
    return 1 + (n - 1 + 63) // 64


def _displacements(words: np.ndarray, n: int) -> np.ndarray:
    """``W`` of shape (trials, n) with ``W[:, 0] = 0``."""
    B = words.shape[0]
    W = np.zeros((B, n), dtype=np.int32)
    if n > 1:
        bits = np.unpackbits(np.ascontiguousarray(words[:, 1:]).view(np.uint8), axis=1, bitorder="little")
        steps = bits[:, : n - 1].astype(np.int8) * 2 - 1
        np.cumsum(steps, axis=1, dtype=np.int32, out=W[:, 1:])
    return W


def start_points(words: np.ndarray) -> np.ndarray:
    return words[:, 0]


# -- phase tables -----------------------------------------------------------

def _phase_table(q: int, alpha: Fraction, n: int) -> np.ndarray:
    """``frac(q * w * alpha)`` for ``w = -(n-1) .. n-1`` as float64, exact reduction."""
    P, Q = alpha.numerator, alpha.denominator
    c = (q * P) % Q
    half = np.empty(n, dtype=np.float64)
    r = 0
    small = Q < 2**53
    for w in range(n):
        half[w] = r / Q if small else ((r << 64) // Q) * 2.0**-64
        r += c
        if r >= Q:
            r -= Q
    neg = (1.0 - half[:0:-1]) % 1.0
    return np.concatenate([neg, half])


@dataclass
class _Engine:
    """Precomputed tables for one (series, angle, n)."""

    series: CosineSeries
    n: int
    alpha: Fraction
    amps: np.ndarray = field(init=False)
    freqs: list = field(init=False)
    table: np.ndarray = field(init=False)  # (2n-1, J) complex, e(q_j w alpha)

    def __post_init__(self):
        terms = [(q, float(a)) for q, a in self.series.terms if float(a) != 0.0]
        self.freqs = [q for q, _ in terms]
        self.amps = np.array([a for _, a in terms], dtype=np.float64)
        J = len(terms)
        self.table = np.empty((2 * self.n - 1, J), dtype=np.complex128)
        for j, q in enumerate(self.freqs):
            self.table[:, j] = np.exp(2j * np.pi * _phase_table(q, self.alpha, self.n))

    def sums(self, words: np.ndarray) -> np.ndarray:
        B = words.shape[0]
        if not self.freqs:
            return np.zeros(B)
        idx = _displacements(words, self.n) + (self.n - 1)
        J = len(self.freqs)
        if J <= HIST_TERMS:
            E = np.empty((B, J), dtype=np.complex128)
            for j in range(J):
                E[:, j] = self.table[:, j][idx].sum(axis=1)
        else:
            width = 2 * self.n - 1
            flat = (idx + (np.arange(B, dtype=np.int64) * width)[:, None]).ravel()
            H = np.bincount(flat, minlength=B * width).reshape(B, width).astype(np.float64)
            E = H @ self.table
        x = start_points(words)
        rot = np.empty((B, J), dtype=np.complex128)
        for j, q in enumerate(self.freqs):
            rot[:, j] = np.exp(2j * np.pi * frac_mul_u64(x, q))
        return ((rot * E).real * self.amps).sum(axis=1)


def _alpha(angle: Angle) -> Fraction:
    return angle.approx()


# -- trial driver -----------------------------------------------------------

def _blocks(cfg: WalkConfig):
    B = cfg.block
    return [range(lo, min(lo + B, cfg.m)) for lo in range(0, cfg.m, B)]


def sums(cfg: WalkConfig, s: CosineSeries) -> np.ndarray:
    """``S_n`` for trials ``0 .. m-1`` in trial order."""
    eng = _Engine(s, cfg.n, _alpha(cfg.angle))
    nw = _nwords(cfg.n)
    blocks = _blocks(cfg)

    def run(rng: range) -> np.ndarray:
        return eng.sums(_Streams(cfg.seed).words(rng, nw))

    if cfg.threads == 1 or len(blocks) == 1:
        parts = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            parts = list(ex.map(run, blocks))
    return np.concatenate(parts) if parts else np.zeros(0)


def simulate_sum(cfg: WalkConfig, s: CosineSeries, trial: int) -> float:
    """``S_n`` of one trial; identical to the matching entry of :func:`sums`."""
    if not 0 <= trial < _U64:
        raise ValueError("trial index out of range")
    B = cfg.block
    lo = (trial // B) * B
    # same block boundaries as ``sums`` so the row is computed identically
    hi = min(lo + B, cfg.m) if trial < cfg.m else lo + B
    rng = range(lo, hi)
    eng = _Engine(s, cfg.n, _alpha(cfg.angle))
    return float(eng.sums(_Streams(cfg.seed).words(rng, _nwords(cfg.n)))[trial - lo])


@dataclass(frozen=True)
class Trajectory:
    start: CirclePoint
    displacements: tuple
    angle: Angle

    def position(self, i: int) -> CirclePoint:
        return reduce(self.start.value + self.displacements[i] * self.angle.approx())

    def positions(self) -> list[CirclePoint]:
        return [self.position(i) for i in range(len(self.displacements))]


def trajectory(cfg: WalkConfig, trial: int) -> Trajectory:
    words = _Streams(cfg.seed).words(range(trial, trial + 1), _nwords(cfg.n))
    W = _displacements(words, cfg.n)[0]
    x = Fraction(int(words[0, 0]), _U64)
    return Trajectory(CirclePoint(x), tuple(int(w) for w in W), cfg.angle)


def positions(cfg: WalkConfig, trials: range | None = None) -> np.ndarray:
    """Float positions ``Y_1..Y_n`` for the given trials, shape (trials, n)."""
    trials = range(cfg.m) if trials is None else trials
    words = _Streams(cfg.seed).words(trials, _nwords(cfg.n))
    W = _displacements(words, cfg.n)
    table = _phase_table(1, _alpha(cfg.angle), cfg.n)
    x = start_points(words).astype(np.float64) * 2.0**-64
    return np.mod(x[:, None] + table[W + cfg.n - 1], 1.0)


# -- estimates --------------------------------------------------------------

@dataclass(frozen=True)
class TailEstimate:
    threshold: float
    estimate: float
    lo: float
    hi: float
    trials: int
    successes: int
    seed: int
    config: dict
    confidence: float = 0.99
    two_sided: bool = False
    inclusive: bool = False

    def to_json(self) -> dict:
        return {"threshold": self.threshold, "estimate": self.estimate, "interval": [self.lo, self.hi],
                "trials": self.trials, "successes": self.successes, "seed": self.seed,
                "confidence": self.confidence, "two_sided": self.two_sided,
                "inclusive": self.inclusive, "config": self.config}


def _exceed(stat: np.ndarray, t: float, two_sided: bool, inclusive: bool) -> np.ndarray:
    v = np.abs(stat) if two_sided else stat
    return v >= t if inclusive else v > t


def tail_from_sums(cfg: WalkConfig, S: np.ndarray, t: float, two_sided=False, inclusive=False,
                   confidence=0.99, series: CosineSeries | None = None) -> TailEstimate:
    k = int(np.count_nonzero(_exceed(S / cfg.scale, t, two_sided, inclusive)))
    lo, hi = wilson_interval(k, cfg.m, confidence)
    conf = cfg.to_json()
    conf["digest"] = cfg.digest()
    if series is not None:
        conf["series"] = series.to_json()
    return TailEstimate(float(t), k / cfg.m, lo, hi, cfg.m, k, cfg.seed, conf, confidence, two_sided, inclusive)


def mc_tail(cfg: WalkConfig, s: CosineSeries, t, two_sided: bool = False, inclusive: bool = False,
            confidence: float = 0.99) -> TailEstimate:
    """Estimate ``P(S_n / n**s > t)`` with a Wilson interval."""
    return tail_from_sums(cfg, sums(cfg, s), float(t), two_sided, inclusive, confidence, s)


@dataclass(frozen=True)
class CltReport:
    mean: float
    variance: float
    sigma: float
    ks: float
    critical: float
    trials: int
    degenerate: bool
    seed: int
    config: dict

    @property
    def ks_pass(self) -> bool:
        return self.ks < self.critical

    def to_json(self) -> dict:
        return {"mean": self.mean, "variance": self.variance, "sigma": self.sigma, "ks": self.ks,
                "critical": self.critical, "ks_pass": self.ks_pass, "trials": self.trials,
                "degenerate": self.degenerate, "seed": self.seed, "config": self.config}


def mc_clt(cfg: WalkConfig, s: CosineSeries, sigma: float) -> CltReport:
    """Moments of ``S_n/sqrt(n)`` and its KS distance to ``Normal(0, sigma**2)``."""
    if not sigma > 0:
        raise ValueError("sigma must be positive; compute it with spectral.sigma2")
    z = sums(cfg, s) / math.sqrt(cfg.n)
    var = float(np.var(z))
    conf = cfg.to_json()
    conf["digest"] = cfg.digest()
    conf["series"] = s.to_json()
    return CltReport(float(np.mean(z)), var, float(sigma), ks_normal(z, sigma), ks_critical(cfg.m),
                     cfg.m, var == 0.0, cfg.seed, conf)


def trial_dump_csv(cfg: WalkConfig, S: np.ndarray) -> str:
    lines = ["trial,S_n,S_n_scaled"]
    scale = cfg.scale
    lines += [f"{i},{v!r},{v / scale!r}" for i, v in enumerate(S.tolist())]
    return "\n".join(lines) + "\n"


# -- exact oracle -----------------------------------------------------------

def local_times(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct visit-count vectors over ``w = -(n-1)..n-1`` for all ``2**(n-1)`` paths.

    Returns (histograms, multiplicities).
    """
    if not 1 <= n <= 20:
        raise ValueError("exact enumeration supports 1 <= n <= 20")
    P = 1 << (n - 1)
    codes = np.arange(P, dtype=np.uint32)
    width = 2 * n - 1
    W = np.zeros((P, n), dtype=np.int16)
    if n > 1:
        bits = ((codes[:, None] >> np.arange(n - 1, dtype=np.uint32)) & 1).astype(np.int8)
        np.cumsum(bits * 2 - 1, axis=1, dtype=np.int16, out=W[:, 1:])
    flat = (W.astype(np.int64) + (n - 1) + (np.arange(P, dtype=np.int64) * width)[:, None]).ravel()
    H = np.bincount(flat, minlength=P * width).reshape(P, width).astype(np.int16)
    uniq, counts = np.unique(H, axis=0, return_counts=True)
    return uniq, counts


def default_quadrature(s: CosineSeries, tol: float = 1e-3) -> int:
    """Smallest power of two ``M >= 2048`` with ``2 Q / M <= tol``.

    For a fixed path ``S(x) - c`` is a trig polynomial of degree ``Q`` (the
    top frequency), so it changes sign at most ``2Q`` times; each sign change
    costs at most ``1/M`` of midpoint-rule error.
    """
    need = math.ceil(2 * max(s.max_frequency, 1) / tol)
    M = 2048
    while M < need:
        M *= 2
    return M


def _phi_matrix(s: CosineSeries, alpha: Fraction, n: int, M: int, m0: int, m1: int) -> np.ndarray:
    """``phi(x_m + w alpha)`` for ``x_m = (m + 1/2)/M``, rows w, columns m0..m1."""
    width = 2 * n - 1
    out = np.zeros((width, m1 - m0))
    m = np.arange(m0, m1, dtype=np.int64)
    for q, a in s.terms:
        a = float(a)
        if a == 0.0:
            continue
        if q * 2 * M < 2**62:
            fx = ((q * (2 * m + 1)) % (2 * M)) / (2.0 * M)
        else:
            fx = np.array([float(Fraction((q * (2 * int(k) + 1)) % (2 * M), 2 * M)) for k in m])
        tw = _phase_table(q, alpha, n)
        out += a * np.cos(2 * np.pi * np.mod(tw[:, None] + fx[None, :], 1.0))
    return out


def exact_tail(s: CosineSeries, a, n: int, t, s_exp=1, M: int | None = None, two_sided: bool = False,
               inclusive: bool = False) -> float:
    """``P(S_n / n**s_exp > t)`` by full path enumeration and midpoint quadrature in ``x``."""
    a = a if isinstance(a, Angle) else Angle.rational(a)
    M = default_quadrature(s) if M is None else M
    if M < 2048:
        raise ValueError("quadrature needs M >= 2048")
    s_exp = as_rational(s_exp)
    scale = float(n) ** float(s_exp)
    t = float(t)
    H, counts = local_times(n)
    Hf = H.astype(np.float64)
    weights = counts.astype(np.float64)
    alpha = a.approx()
    chunk = max(1, min(M, (1 << 22) // max(len(H), 1)))
    hits = 0.0
    for m0 in range(0, M, chunk):
        m1 = min(M, m0 + chunk)
        Phi = _phi_matrix(s, alpha, n, M, m0, m1)
        S = Hf @ Phi
        ind = _exceed(S / scale, t, two_sided, inclusive)
        hits += float(weights @ ind.sum(axis=1))
    return hits / (float(1 << (n - 1)) * M)
