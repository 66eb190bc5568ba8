"""Certified builders for the counterexample constructions.

Every "sufficiently close" and "sufficiently large" choice is replaced by an
explicit, minimal-feasible value and the inequality that justifies it is
written to a :class:`ConstructionLedger` with exact operands. Monte Carlo
evidence for the probabilistic claims is attached separately by
:func:`gather_evidence`; the builders themselves never sample.

Two families are provided:

* ``theorem1_build`` -- rational angles ``alpha_k = p_k/q_k`` (odd ``q_k``)
  converging to a limit, observable ``sum a_k cos(2 pi q_k x)`` with
  ``a_k = 2**-q_k`` (faithful) or a configurable schedule (toy).
* ``theorem2_build`` -- a fixed angle with certified approximation
  witnesses ``|alpha - p_k/q_k| <= c/q_k**gamma_k``, observable
  ``sum q_k**(-(gamma_k-1)(1-s)) cos(2 pi q_k x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np

from .chain import FiniteChain, lemma2_bound_exact, lemma2_find_N, smallest_power_above
from .diophantine import Angle, ApproxWitness, InsufficientDigits, make_witness
from .exact import PI_HI, PowerProduct, as_rational, cos_upper, fraction_str, pp_bracket
from .observable import CosineSeries, t2_amplitude

HALF = Fraction(1, 2)


class ConstructionError(ValueError):
    pass


class Infeasible(ConstructionError):
    def __init__(self, msg: str, inequality: str | None = None):
        super().__init__(msg)
        self.inequality = inequality


class ThresholdFailure(ConstructionError):
    pass


class ContainmentFailure(ConstructionError):
    pass


class WitnessMissing(ConstructionError):
    pass


# -- exact values and inequalities -------------------------------------------

def encode(v):
    if isinstance(v, PowerProduct):
        return v.to_json()
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, int):
        return str(v)
    return fraction_str(as_rational(v))


def decode(v):
    if isinstance(v, dict):
        p = PowerProduct.from_json(v)
        return p.coeff if not p.factors else p
    return Fraction(v)


def compare(a, b) -> int:
    """Exact sign of ``a - b`` for Fractions/ints/PowerProducts."""
    pa, pb = isinstance(a, PowerProduct), isinstance(b, PowerProduct)
    if not pa and not pb:
        a, b = Fraction(a), Fraction(b)
        return (a > b) - (a < b)
    # a PowerProduct is always positive
    if not pa and Fraction(a) <= 0:
        return -1
    if not pb and Fraction(b) <= 0:
        return 1
    return PowerProduct.of(a).compare(b)


_REL = {
    "<": lambda c: c < 0,
    "<=": lambda c: c <= 0,
    ">": lambda c: c > 0,
    ">=": lambda c: c >= 0,
    "==": lambda c: c == 0,
}


@dataclass
class Inequality:
    name: str
    level: int
    lhs: object
    rel: str
    rhs: object
    i: int | None = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return _REL[self.rel](compare(self.lhs, self.rhs))

    @property
    def key(self):
        return (self.name, self.level, self.i, self.note)

    def to_json(self) -> dict:
        d = {"name": self.name, "level": self.level, "lhs": encode(self.lhs), "rel": self.rel,
             "rhs": encode(self.rhs), "holds": self.holds}
        if self.i is not None:
            d["i"] = self.i
        if self.note:
            d["note"] = self.note
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Inequality":
        return cls(d["name"], int(d["level"]), decode(d["lhs"]), d["rel"], decode(d["rhs"]),
                   d.get("i"), d.get("note", ""))


@dataclass
class LevelRecord:
    k: int
    p: int
    q: int
    amplitude: object
    N: int
    inequalities: list = field(default_factory=list)
    evidence: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.p, self.q)

    def to_json(self) -> dict:
        return {"k": self.k, "p": str(self.p), "q": str(self.q), "amplitude": encode(self.amplitude),
                "N": str(self.N), "inequalities": [x.to_json() for x in self.inequalities],
                "evidence": self.evidence, "info": self.info}

    @classmethod
    def from_json(cls, d: dict) -> "LevelRecord":
        return cls(int(d["k"]), int(d["p"]), int(d["q"]), decode(d["amplitude"]), int(d["N"]),
                   [Inequality.from_json(x) for x in d.get("inequalities", [])],
                   list(d.get("evidence", [])), dict(d.get("info", {})))


@dataclass
class ConstructionLedger:
    theorem: int
    mode: str
    s: Fraction
    params: dict
    levels: list
    final_alpha: Fraction | None = None
    angle: Angle | None = None
    inequalities: list = field(default_factory=list)  # ledger-wide lines

    @property
    def series(self) -> CosineSeries:
        return CosineSeries(tuple((lv.q, lv.amplitude) for lv in self.levels))

    @property
    def limit_angle(self) -> Angle:
        if self.final_alpha is not None:
            return Angle.rational(self.final_alpha)
        return self.angle

    def all_inequalities(self) -> list:
        out = list(self.inequalities)
        for lv in self.levels:
            out += lv.inequalities
        return out

    @property
    def all_green(self) -> bool:
        return all(x.holds for x in self.all_inequalities())

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "mode": self.mode,
            "s": fraction_str(self.s),
            "params": self.params,
            "levels": [lv.to_json() for lv in self.levels],
            "final_alpha": None if self.final_alpha is None else fraction_str(self.final_alpha),
            "angle": None if self.angle is None else self.angle.to_json(n_convergents=0),
            "inequalities": [x.to_json() for x in self.inequalities],
            "series": self.series.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "ConstructionLedger":
        return cls(int(d["theorem"]), d["mode"], Fraction(d["s"]), dict(d.get("params", {})),
                   [LevelRecord.from_json(x) for x in d["levels"]],
                   None if d.get("final_alpha") is None else Fraction(d["final_alpha"]),
                   None if d.get("angle") is None else Angle.from_json(d["angle"]),
                   [Inequality.from_json(x) for x in d.get("inequalities", [])])


# -- Lemma 1 -------------------------------------------------------------------

def lemma1_delta(q: int, N: int) -> Fraction:
    """Closeness radius ``1/(12 q N)``.

    Points of ``G_q^{1/12}`` stay in ``G_q^{1/12}`` under rotation by ``p/q``;
    moving the angle by less than ``delta`` shifts ``x + n alpha`` by less than
    ``N delta = 1/(12 q)`` for ``|n| <= N``, which keeps it in ``G_q^{1/6}``.
    """
    if q < 1 or N < 1:
        raise ValueError("need q >= 1 and N >= 1")
    return Fraction(1, 12 * q * N)


def lemma1_threshold_N(a, s) -> int:
    """Smallest ``N`` with ``(a/2) N**(1-s) > 2``."""
    a, s = as_rational(a), as_rational(s)
    return smallest_power_above(PowerProduct.of(4 / a), 1 - s)


@dataclass(frozen=True)
class Lemma1Certificate:
    q: int
    p: int
    N: int
    s: Fraction
    amplitude: Fraction
    delta: Fraction
    alpha_prime: Fraction
    threshold_lhs: PowerProduct
    analytic_ok: bool
    sampled_ok: bool
    sample_points: int
    sample_shifts: int

    @property
    def ok(self) -> bool:
        return self.analytic_ok and self.sampled_ok and self.threshold_lhs > 2

    def to_json(self) -> dict:
        return {"q": self.q, "p": self.p, "N": self.N, "s": fraction_str(self.s),
                "amplitude": fraction_str(self.amplitude), "delta": fraction_str(self.delta),
                "alpha_prime": fraction_str(self.alpha_prime), "threshold_lhs": self.threshold_lhs.to_json(),
                "analytic_ok": self.analytic_ok, "sampled_ok": self.sampled_ok, "ok": self.ok,
                "sample_points": self.sample_points, "sample_shifts": self.sample_shifts}


def orbit_containment_sample(alpha_prime: Fraction, q: int, N: int, K: int = 16,
                             max_shifts: int = 20001) -> tuple[bool, int, int]:
    """Exact check that ``x + n alpha'`` lies in ``G_q^{1/6}`` for sampled ``x`` in ``G_q^{1/12}``.

    Sample points are ``x = i/q + u/(12 q K)`` with ``|u| < K``; shifts are all
    ``|n| <= N`` when there are few enough of them, otherwise an even grid that
    includes ``+-N``. Everything is integer arithmetic modulo ``D = 12 q K q'``.
    Returns (ok, number of points, number of shifts).
    """
    pp, qp = alpha_prime.numerator, alpha_prime.denominator
    D = 12 * q * K * qp
    if 2 * N + 1 <= max_shifts:
        shifts = list(range(-N, N + 1))
    else:
        shifts = sorted({int(v) for v in np.linspace(-N, N, max_shifts, dtype=object)} | {-N, N, 0})
    cosets = range(q) if q <= 64 else sorted({0, 1, q // 2, q - 1})
    pts = [(i * 12 * K * qp + u * qp) % D for i in cosets for u in range(-K + 1, K)]
    step = (pp * 12 * q * K) % D
    small = q * D < 2**62 and D * max(N, 1) < 2**62
    if small:
        P = np.array(pts, dtype=np.int64)[:, None]
        n = np.array(shifts, dtype=np.int64)[None, :]
        y = (P + (n * step) % D) % D
        r = (q * y) % D
        ok = bool(np.all(6 * np.minimum(r, D - r) < D))
    else:
        ok = True
        for x in pts:
            for n in shifts:
                r = (q * ((x + n * step) % D)) % D
                if 6 * min(r, D - r) >= D:
                    ok = False
                    break
            if not ok:
                break
    return ok, len(pts), len(shifts)


def lemma1_check(alpha_prime, q: int, N: int, s, amplitude=None, p: int | None = None,
                 K: int = 16) -> Lemma1Certificate:
    """Certify the Lemma 1 event inclusion for ``alpha'`` near ``p/q``."""
    ap = alpha_prime.value() if isinstance(alpha_prime, Angle) else as_rational(alpha_prime)
    s = as_rational(s)
    a = Fraction(1, 2**q) if amplitude is None else as_rational(amplitude)
    if p is None:
        p = round(ap * q)
    if math.gcd(p, q) != 1:
        raise ValueError(f"{p}/{q} is not irreducible")
    delta = lemma1_delta(q, N)
    gap = abs(ap - Fraction(p, q))
    if not gap < delta:
        raise ContainmentFailure(f"|alpha' - {p}/{q}| = {gap} is not below delta = {delta}")
    lhs = PowerProduct.power(N, 1 - s, a / 2)
    if not lhs > 2:
        raise ThresholdFailure(f"threshold (a/2) N^(1-s) > 2 fails: a={a}, N={N}, s={s}")
    analytic = N * gap < Fraction(1, 12 * q)
    sampled, npts, nshift = orbit_containment_sample(ap, q, N, K)
    if not (analytic and sampled):
        raise ContainmentFailure("orbit containment in G_q^{1/6} fails")
    return Lemma1Certificate(q, p, N, s, a, delta, ap, lhs, analytic, sampled, npts, nshift)


# -- Lemma 3 -------------------------------------------------------------------

def lemma3_threshold(c, s) -> PowerProduct:
    """``sqrt(2) / (2 (16 c)**(1-s))``."""
    c, s = as_rational(c), as_rational(s)
    return PowerProduct(HALF, ((Fraction(2), HALF), (16 * c, -(1 - s))))


def lemma3_N(q: int, gamma, c) -> int:
    """``floor(q**(gamma-1) / (16 c))``, exact for rational gamma."""
    g, c = as_rational(gamma), as_rational(c)
    e = g - 1
    u, v = e.numerator, e.denominator
    if u < 0:
        return 0
    # N <= q**(u/v)/(16c)  <=>  (16 c N)**v <= q**u
    X = Fraction(q) ** u
    lo, hi = 0, 1
    while (16 * c * hi) ** v <= X:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if (16 * c * mid) ** v <= X:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class Lemma3Params:
    series: CosineSeries
    N: int
    threshold: PowerProduct
    witness: ApproxWitness
    s: Fraction
    containment_lhs: Fraction  # 16 N q |alpha - p/q| (upper bound); must be < 1
    bound_is_equality: bool  # N c / q**gamma equals 1/(16 q) exactly

    @property
    def containment_ok(self) -> bool:
        return self.containment_lhs < 1

    def to_json(self) -> dict:
        w = self.witness
        return {"series": self.series.to_json(), "N": self.N, "threshold": self.threshold.to_json(),
                "threshold_float": float(self.threshold), "s": fraction_str(self.s),
                "witness": {"p": str(w.p), "q": str(w.q), "gamma": fraction_str(w.gamma), "c": fraction_str(w.c),
                            "gap_upper": fraction_str(w.gap_upper)},
                "containment_lhs": fraction_str(self.containment_lhs), "containment_ok": self.containment_ok,
                "bound_is_equality": self.bound_is_equality}


def lemma3_params(witness: ApproxWitness | None, s) -> Lemma3Params:
    if witness is None:
        raise WitnessMissing("Lemma 3 needs a certified approximation witness")
    if not witness.certified:
        raise WitnessMissing(f"{witness.p}/{witness.q} does not satisfy the gap bound c/q^gamma")
    s = as_rational(s)
    if not HALF < s < 1:
        raise ValueError("s must lie in (1/2, 1)")
    q, gamma, c = witness.q, witness.gamma, witness.c
    N = lemma3_N(q, gamma, c)
    if N < 1:
        raise ValueError("N must be >= 1 (q**(gamma-1) < 16 c)")
    series = CosineSeries.single(q, t2_amplitude(q, gamma, s))
    lhs = 16 * N * q * witness.gap_upper
    tight = compare(PowerProduct.power(q, -gamma, N * c), Fraction(1, 16 * q)) == 0
    return Lemma3Params(series, N, lemma3_threshold(c, s), witness, s, lhs, tight)


# -- choosing the next rational ------------------------------------------------

def _inv_mod(a: int, m: int) -> int:
    return int(gmpy2.invert(a % m, m))


def next_odd_rational(lo: Fraction, hi: Fraction, p: int, q: int, q_min: int,
                      brute_limit: int = 200_000) -> tuple[int, int, str]:
    """Smallest-denominator ``p'/q'`` with ``q'`` odd, ``q' >= q_min``, ``lo < p'/q' < hi``.

    ``p/q`` (odd ``q``) must lie in the interval. Any ``p'/q' != p/q`` is at
    distance at least ``1/(q q')``, and the family ``p' q - p q' = +-1``
    attains it, so the optimum lies in that family unless a brute-force scan
    over small denominators is cheap enough to settle it directly.
    """
    a = Fraction(p, q)
    if not lo < a < hi:
        raise ConstructionError("centre is not inside the closeness interval")
    best = None
    for eps, gap in ((1, hi - a), (-1, a - lo)):
        need = max(q_min, int(1 / (q * gap)) + 1)
        # p' q - p q' = eps  <=>  q' = -eps * p^{-1} (mod q)
        r = (-eps * _inv_mod(p, q)) % q if q > 1 else 0
        qq = need + ((r - need) % q)
        if qq % 2 == 0:
            qq += q
        pp = (eps + p * qq) // q
        assert pp * q - p * qq == eps
        if best is None or qq < best[1]:
            best = (pp, qq)
    method = "neighbour family"
    if best[1] <= brute_limit:
        start = q_min + (1 - q_min % 2)
        for qq in range(start, best[1] + 1, 2):
            pp = lo.numerator * qq // lo.denominator + 1
            if Fraction(pp, qq) < hi and math.gcd(pp, qq) == 1:
                best = (pp, qq)
                method = "exhaustive scan"
                break
    return best[0], best[1], method


# -- Theorem 1 -------------------------------------------------------------------

def perturbation_radius(delta: Fraction, a: Fraction, q: int, N: int) -> Fraction:
    """Angle change that moves ``sum_{n<=N} a cos(2 pi q (x + W_n alpha))/N**s`` by at most ``delta/2``.

    ``|W_n| <= N`` gives ``|dS| <= 2 pi a q N**2 |d alpha|``; with
    ``N**s >= isqrt(N)`` (``s > 1/2``) and ``pi <= PI_HI`` the radius below is
    a rational lower bound of ``(delta/2) N**s / (2 pi a q N**2)``.
    """
    return (delta / 2) * math.isqrt(N) / (2 * PI_HI * a * q * N * N)


def _faithful_q_low(Ns: list[int], s: Fraction, tau: Fraction) -> int:
    """Smallest ``q`` with ``2**-q N_i**(1-s) < tau 4**-(k-i)`` for every ``i``."""
    k = len(Ns)
    q = 1
    for i, Ni in enumerate(Ns, 1):
        rhs = tau / 4 ** (k - i)
        guess = max(1, int((1 - s) * math.log2(Ni) - math.log2(rhs)) - 2)
        while not PowerProduct.power(Ni, 1 - s, Fraction(1, 2**guess)) < rhs:
            guess += 1
        q = max(q, guess)
    return q


def _toy_amplitude(target: Fraction, Ns: list[int], s: Fraction, tau: Fraction) -> tuple[Fraction, bool]:
    """Largest ``a = target / 4**j`` with ``a N_i**(1-s) < tau 4**-(k-i)`` for all ``i``."""
    k = len(Ns)
    a = target
    adapted = False
    while not all(PowerProduct.power(Ni, 1 - s, a) < tau / 4 ** (k - i) for i, Ni in enumerate(Ns, 1)):
        a /= 4
        adapted = True
    return a, adapted


def theorem1_build(s=Fraction(3, 5), depth: int = 1, mode: str = "toy", amplitudes=None,
                   tau=Fraction(1, 4), n_min=None, brute_limit: int = 200_000):
    """Inductive build with rational angles; returns ``(angle, series, ledger)``.

    Toy mode replaces the ``2**-q_k`` amplitudes by ``amplitudes[k-1]``
    (default ``4**-k``), lowered by powers of 4 where the tail condition
    requires it. Faithful mode is only computable for ``depth = 1``.
    """
    s, tau = as_rational(s), as_rational(tau)
    if not HALF < s < 1:
        raise ValueError("s must lie in (1/2, 1)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if mode not in ("toy", "faithful"):
        raise ValueError("mode must be 'toy' or 'faithful'")
    if amplitudes is None:
        amplitudes = [Fraction(1, 4**k) for k in range(1, depth + 1)]
    amplitudes = [as_rational(a) for a in amplitudes]
    n_min = list(n_min or [])

    p, q = 1, 3
    a = Fraction(1, 2**q) if mode == "faithful" else amplitudes[0]
    levels: list[LevelRecord] = []
    balls = []  # (level, label, centre, radius), all open
    adapted_log = {}
    for k in range(1, depth + 1):
        if mode == "faithful" and k >= 2:
            bits = (q + 2) / (1 - s)
            raise Infeasible(
                f"faithful level {k}: the threshold 2^(-q_{k}-1) N_{k}^(1-s) > 2 with q_{k}={q} "
                f"needs N_{k} > 2^{float(bits):.0f}, and the tail condition at the next level needs "
                f"2^(q_{k + 1}) with q_{k + 1} > 12 q_{k} N_{k}; not representable",
                "threshold")
        lines = []
        chain = FiniteChain(q, p)
        cand = {"threshold": lemma1_threshold_N(a, s)}
        if levels:
            cand["increasing"] = levels[-1].N + 1
        for i, prev in enumerate(levels, 1):
            d = Fraction(1, 4**i)
            cand[f"lemma2[{i}]"] = lemma2_find_N(CosineSeries.single(prev.q, prev.amplitude), chain, s, d / 2, d / 6)
        if k <= len(n_min) and n_min[k - 1]:
            cand["requested"] = int(n_min[k - 1])
        N = max(cand.values())

        lines.append(Inequality("threshold", k, PowerProduct.power(N, 1 - s, a / 2), ">", 2))
        if levels:
            lines.append(Inequality("N_increasing", k, N, ">", levels[-1].N))
        for i, prev in enumerate(levels, 1):
            d = Fraction(1, 4**i)
            b = lemma2_bound_exact(CosineSeries.single(prev.q, prev.amplitude), chain, N, s, d / 2)
            lines.append(Inequality("lemma2", k, b, "<", d / 6, i=i))

        centre = Fraction(p, q)
        balls.append((k, "lemma1", centre, lemma1_delta(q, N)))
        for i, prev in enumerate(levels, 1):
            balls.append((k, f"lemma2[{i}]", centre, perturbation_radius(Fraction(1, 4**i), prev.amplitude, prev.q, N)))
        lo = max(c - r for _, _, c, r in balls)
        hi = min(c + r for _, _, c, r in balls)

        Ns = [lv.N for lv in levels] + [N]
        if k < depth:
            if mode == "faithful":
                a_next, q_low = None, _faithful_q_low(Ns, s, tau)
            else:
                a_next, adapted = _toy_amplitude(amplitudes[k], Ns, s, tau)
                adapted_log[k + 1] = adapted
                q_low = 1
        else:
            a_next, q_low = None, 1
        p2, q2, method = next_odd_rational(lo, hi, p, q, max(q + 1, q_low), brute_limit)
        if mode == "faithful" and k < depth:
            a_next = Fraction(1, 2**q2)
        nxt = Fraction(p2, q2)

        lines.append(Inequality("q_increasing", k, q2, ">", q))
        lines.append(Inequality("q_odd", k, q2 % 2, "==", 1))
        for lv_k, label, c, r in balls:
            lines.append(Inequality("closeness", k, abs(nxt - c), "<", r, note=f"{label}@{lv_k}"))
        if a_next is not None:
            for i, Ni in enumerate(Ns, 1):
                lines.append(Inequality("tail_dominance", k, PowerProduct.power(Ni, 1 - s, a_next), "<",
                                        tau / 4 ** (k - i), i=i))
        info = {"N_candidates": {key: str(v) for key, v in cand.items()},
                "next_alpha": fraction_str(nxt), "next_method": method,
                "interval": [fraction_str(lo), fraction_str(hi)]}
        if k in adapted_log:
            info["amplitude_adapted"] = adapted_log[k]
        levels.append(LevelRecord(k, p, q, a, N, lines, info=info))
        p, q = p2, q2
        if a_next is not None:
            a = a_next

    final = Fraction(p, q)
    ledger = ConstructionLedger(1, mode, s, {"tau": fraction_str(tau), "depth": depth,
                                             "amplitudes_requested": [fraction_str(x) for x in amplitudes[:depth]]},
                                levels, final_alpha=final)
    for lv in levels:
        tail = sum((m.amplitude for m in levels if m.k > lv.k), Fraction(0))
        if tail:
            ledger.inequalities.append(Inequality("tail_sum", lv.k, PowerProduct.power(lv.N, 1 - s, tail), "<", HALF))
        for lv_k, label, c, r in balls:
            if lv_k == lv.k:
                ledger.inequalities.append(Inequality("final_closeness", lv.k, abs(final - c), "<", r, note=label))
    if not ledger.all_green:
        bad = [x for x in ledger.all_inequalities() if not x.holds]
        raise Infeasible(f"builder produced a failing line: {bad[0].to_json()}", bad[0].name)
    return Angle.rational(final), ledger.series, ledger


# -- Theorems 2 and 3 ----------------------------------------------------------

def t2_regularity(gamma) -> int:
    """Largest integer ``r < gamma/2 - 3/2``."""
    x = as_rational(gamma) / 2 - Fraction(3, 2)
    r = math.ceil(x) - 1
    return r


def t2_s_max(gamma, r: int) -> Fraction:
    """``s`` must stay below this for ``r < (gamma-1)(1-s) - 1``."""
    return 1 - Fraction(r + 1) / (as_rational(gamma) - 1)


def admissible_s(gamma, s=None) -> tuple[Fraction, int, bool]:
    """Return ``(s, r, adjusted)``: ``s`` itself when admissible, else the midpoint of ``(1/2, s_max)``."""
    gamma = as_rational(gamma)
    r = t2_regularity(gamma)
    if r < 0:
        raise Infeasible(f"gamma={gamma} leaves no regularity r >= 0 (need gamma > 3)", "regularity")
    smax = t2_s_max(gamma, r)
    if s is not None:
        s = as_rational(s)
        if HALF < s < smax:
            return s, r, False
    return (HALF + smax) / 2, r, True


def t2_event_threshold(c, s) -> PowerProduct:
    """``sqrt(2) / (4 (16 c)**(1-s))``."""
    c, s = as_rational(c), as_rational(s)
    return PowerProduct(Fraction(1, 4), ((Fraction(2), HALF), (16 * c, -(1 - s))))


def _u_lower(w: ApproxWitness) -> Fraction:
    """Lower bound on ``min(||q a||, ||q a + 1/2||)`` from the witness gap."""
    return min(w.q * w.gap_lower, HALF - w.q * w.gap_upper)


def chebyshev_bound(a, w: ApproxWitness, N: int, s: Fraction, delta) -> PowerProduct:
    """``P(|S_N| / N**s > delta) <= a**2 / (8 u**2 delta**2 N**(2s-1))`` for ``phi = a cos(2 pi q x)``.

    ``E S_N**2 = (a**2/2) sum_{i,l} lam**|i-l|`` with ``lam = cos(2 pi q alpha)``,
    at most ``a**2 N / (1 - |lam|)``; and ``1 - |lam| >= 8 u**2``.
    """
    u = _u_lower(w)
    a2 = a * a if isinstance(a, PowerProduct) else PowerProduct.of(Fraction(a) ** 2)
    d2 = delta * delta if isinstance(delta, PowerProduct) else PowerProduct.of(Fraction(delta) ** 2)
    return a2 / (PowerProduct.of(8 * u * u) * d2 * PowerProduct.power(N, 2 * s - 1))


def theorem2_build(angle: Angle, gamma=6, c=1, s=None, depth: int = 1, tau=Fraction(1, 4),
                   schedule=None, max_index: int = 400):
    """Select witnesses from ``angle``'s convergents and build the Theorem 2 observable.

    With ``schedule`` given (a map ``k -> gamma_k``) the exponent varies along
    the convergents and ``c = 1``: the Liouville variant, whose observable is
    ``C^infinity``. Returns ``(series, ledger)``.
    """
    tau, c = as_rational(tau), as_rational(c)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    variant = "t3" if schedule is not None else "t2"
    if variant == "t2":
        gamma = as_rational(gamma)
        s, r, adjusted = admissible_s(gamma, s)
        eps = (gamma - 1) * (1 - s) - 1 - r
    else:
        c = Fraction(1)
        s = Fraction(3, 5) if s is None else as_rational(s)
        if not HALF < s < 1:
            raise ValueError("s must lie in (1/2, 1)")
        r, adjusted, eps = None, False, None
    thr = t2_event_threshold(c, s)

    def gamma_at(j):
        return as_rational(schedule(j)) if schedule is not None else gamma

    levels: list[LevelRecord] = []
    witnesses: list[ApproxWitness] = []
    j = 0
    rejected = []
    if angle.tail is not None:
        # past the explicit quotients only the periodic tail remains: type (c, 2) at best
        max_index = min(max_index, len(angle.quotients) + 1)
    while len(levels) < depth:
        j += 1
        if j > max_index:
            raise Infeasible(f"no admissible witness for level {len(levels) + 1} among the first "
                             f"{max_index} convergents; rejections: {rejected[:6]}", "witness")
        try:
            p, q = angle.convergent(j)
            angle.convergent(j + 1)
        except (IndexError, InsufficientDigits):
            raise Infeasible(f"angle has no further certified convergents (level {len(levels) + 1})", "witness")
        if levels and q <= levels[-1].q:
            continue
        g = gamma_at(j)
        if g < 2:
            continue
        w = make_witness(angle, p, q, g, c)
        if not w.certified:
            rejected.append((j, "gap"))
            continue
        N = lemma3_N(q, g, c)
        if N < 1:
            rejected.append((j, "N<1"))
            continue
        if not 16 * N * q * w.gap_upper < 1:
            rejected.append((j, "containment"))
            continue
        amp = t2_amplitude(q, g, s)
        k = len(levels) + 1
        lines = [
            Inequality("witness", k, w.gap_upper, "<=", PowerProduct.power(q, -g, c)),
            Inequality("containment", k, 16 * N * q * w.gap_upper, "<", 1),
        ]
        ok = True
        for i, prev in enumerate(levels, 1):
            lines.append(Inequality("amplitude_tail", k, PowerProduct.power(prev.N, 1 - s) * amp, "<",
                                    thr * (tau / 4 ** (k - 1 - i)), i=i))
        for i, (prev, pw) in enumerate(zip(levels, witnesses), 1):
            b = chebyshev_bound(prev.amplitude, pw, N, s, thr / 4**i)
            lines.append(Inequality("variance_tail", k, b, "<", Fraction(1, 8 * 4**i), i=i))
        if levels:
            lines.append(Inequality("N_increasing", k, N, ">", levels[-1].N))
        if not all(x.holds for x in lines):
            rejected.append((j, [x.name for x in lines if not x.holds][0]))
            continue
        info = {"convergent_index": j, "gamma": fraction_str(g), "gap_upper": fraction_str(w.gap_upper),
                "gap_lower": fraction_str(w.gap_lower)}
        levels.append(LevelRecord(k, p, q, amp, N, lines, info=info))
        witnesses.append(w)
        assert ok

    params = {"gamma": fraction_str(gamma) if variant == "t2" else "schedule", "c": fraction_str(c),
              "tau": fraction_str(tau), "depth": depth, "variant": variant,
              "s_adjusted": adjusted, "threshold": thr.to_json()}
    if variant == "t2":
        params["r"] = r
        params["epsilon"] = fraction_str(eps)
    ledger = ConstructionLedger(2 if variant == "t2" else 3, "faithful", s, params, levels, angle=angle)
    if variant == "t2":
        ledger.inequalities.append(Inequality("regularity", 0, Fraction(r), "<", (gamma - 1) * (1 - s) - 1))
    for lv in levels:
        tail = [m.amplitude for m in levels if m.k > lv.k]
        if tail:
            up = sum((pp_bracket(PowerProduct.of(x))[1] for x in tail), Fraction(0))
            ledger.inequalities.append(Inequality("tail_sum", lv.k, PowerProduct.power(lv.N, 1 - s, up), "<", thr / 2))
    return ledger.series, ledger


def smoothness_certificate(ledger: ConstructionLedger, r_max: int = 8) -> list[dict]:
    """Per ``r``: exponent of ``q_k`` in ``a_k (2 pi q_k)**r`` at each level.

    A term decays like ``q_k**-(1+eps)`` once the exponent drops below ``-1``;
    for the Liouville variant it eventually does for every ``r``.
    """
    s = ledger.s
    out = []
    for r in range(r_max + 1):
        exps = []
        for lv in ledger.levels:
            g = Fraction(lv.info["gamma"]) if "gamma" in lv.info else None
            e = -(g - 1) * (1 - s) + r if g is not None else None
            exps.append(None if e is None else fraction_str(e))
        out.append({"r": r, "exponents": exps})
    return out


def liouville_observable(angle: Angle, schedule, levels: int, s=Fraction(3, 5),
                         first: int = 1) -> CosineSeries:
    """``sum_k q_k**(-(e_k-1)(1-s)) cos(2 pi q_k x)`` over convergents ``first..levels``."""
    s = as_rational(s)
    terms = []
    for k in range(first, levels + 1):
        _, q = angle.convergent(k)
        e = max(as_rational(schedule(k)), Fraction(2))
        if any(q == t[0] for t in terms):
            continue
        terms.append((q, t2_amplitude(q, e, s)))
    return CosineSeries(tuple(terms))


# -- verification ---------------------------------------------------------------

@dataclass
class VerifyReport:
    lines: list  # (name, level, i, note, ok, detail)

    @property
    def ok(self) -> bool:
        return all(line[4] for line in self.lines)

    @property
    def failures(self) -> list:
        return [line for line in self.lines if not line[4]]

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": len(self.lines),
                "lines": [{"name": n, "level": k, "i": i, "note": note, "ok": ok, "detail": d}
                          for n, k, i, note, ok, d in self.lines]}


def _rho_up(q: int) -> Fraction:
    if q == 1:
        return Fraction(0)
    if q == 3:
        return HALF
    return cos_upper(1, q)


def _expected_theorem1(l: ConstructionLedger) -> dict:
    s = l.s
    tau = Fraction(l.params.get("tau", "1/4"))
    lv = l.levels
    exp = {}
    balls = []
    for idx, L in enumerate(lv):
        k = L.k
        exp[("threshold", k, None, "")] = (PowerProduct.power(L.N, 1 - s, L.amplitude / 2), ">", Fraction(2))
        if idx:
            exp[("N_increasing", k, None, "")] = (L.N, ">", lv[idx - 1].N)
        for i, P in enumerate(lv[:idx], 1):
            d = Fraction(1, 4**i) / 2
            K = PowerProduct.of(P.amplitude**2 * (HALF + Fraction(2 * L.q) / (1 - _rho_up(L.q))))
            exp[("lemma2", k, i, "")] = (K / (PowerProduct.of(d * d) * PowerProduct.power(L.N, 2 * s - 1)), "<",
                                         Fraction(1, 4**i) / 6)
        c = L.alpha
        balls.append((k, "lemma1", c, Fraction(1, 12 * L.q * L.N)))
        for i, P in enumerate(lv[:idx], 1):
            r = (Fraction(1, 4**i) / 2) * math.isqrt(L.N) / (2 * PI_HI * P.amplitude * P.q * L.N * L.N)
            balls.append((k, f"lemma2[{i}]", c, r))
        nxt = lv[idx + 1].alpha if idx + 1 < len(lv) else l.final_alpha
        exp[("q_increasing", k, None, "")] = (nxt.denominator, ">", L.q)
        exp[("q_odd", k, None, "")] = (nxt.denominator % 2, "==", 1)
        for bk, label, bc, br in balls:
            exp[("closeness", k, None, f"{label}@{bk}")] = (abs(nxt - bc), "<", br)
        if idx + 1 < len(lv):
            a_next = lv[idx + 1].amplitude
            for i, P in enumerate(lv[: idx + 1], 1):
                exp[("tail_dominance", k, i, "")] = (PowerProduct.power(P.N, 1 - s, a_next), "<", tau / 4 ** (k - i))
    for L in lv:
        tail = sum((m.amplitude for m in lv if m.k > L.k), Fraction(0))
        if tail:
            exp[("tail_sum", L.k, None, "")] = (PowerProduct.power(L.N, 1 - s, tail), "<", HALF)
        for bk, label, bc, br in balls:
            if bk == L.k:
                exp[("final_closeness", L.k, None, label)] = (abs(l.final_alpha - bc), "<", br)
    if lv and lv[0].alpha != Fraction(1, 3):
        exp[("start", 1, None, "")] = (lv[0].alpha, "==", Fraction(1, 3))
    return exp


def _expected_theorem2(l: ConstructionLedger) -> dict:
    s = l.s
    c = Fraction(l.params.get("c", "1"))
    tau = Fraction(l.params.get("tau", "1/4"))
    thr = PowerProduct(Fraction(1, 4), ((Fraction(2), HALF), (16 * c, -(1 - s))))
    angle = l.angle
    exp = {}
    ws = []
    for idx, L in enumerate(l.levels):
        k = L.k
        g = Fraction(L.info["gamma"]) if "gamma" in L.info else Fraction(l.params["gamma"])
        lo_gap, hi_gap = angle.gap_bounds(L.p, L.q)
        ws.append((lo_gap, hi_gap))
        exp[("witness", k, None, "")] = (hi_gap, "<=", PowerProduct.power(L.q, -g, c))
        # N = floor(q^(g-1)/(16c)): N <= q^(g-1)/(16c) < N + 1
        e = g - 1
        X = Fraction(L.q) ** e.numerator
        floor_ok = (16 * c * L.N) ** e.denominator <= X < (16 * c * (L.N + 1)) ** e.denominator
        exp[("N_floor", k, None, "")] = (int(floor_ok), "==", 1)
        exp[("containment", k, None, "")] = (16 * L.N * L.q * hi_gap, "<", 1)
        amp_expected = PowerProduct.power(L.q, -(g - 1) * (1 - s))
        exp[("amplitude", k, None, "")] = (PowerProduct.of(L.amplitude), "==", amp_expected)
        for i, P in enumerate(l.levels[:idx], 1):
            exp[("amplitude_tail", k, i, "")] = (PowerProduct.power(P.N, 1 - s) * L.amplitude, "<", thr * (tau / 4 ** (k - 1 - i)))
            glo, ghi = ws[i - 1]
            u = min(P.q * glo, HALF - P.q * ghi)
            a2 = PowerProduct.of(P.amplitude) * PowerProduct.of(P.amplitude)
            delta = thr / 4**i
            b = a2 / (PowerProduct.of(8 * u * u) * delta * delta * PowerProduct.power(L.N, 2 * s - 1))
            exp[("variance_tail", k, i, "")] = (b, "<", Fraction(1, 8 * 4**i))
        if idx:
            exp[("N_increasing", k, None, "")] = (L.N, ">", l.levels[idx - 1].N)
    if l.theorem == 2:
        gamma = Fraction(l.params["gamma"])
        r = int(l.params["r"])
        exp[("regularity", 0, None, "")] = (Fraction(r), "<", (gamma - 1) * (1 - s) - 1)
    for L in l.levels:
        tail = [m.amplitude for m in l.levels if m.k > L.k]
        if tail:
            up = sum((pp_bracket(PowerProduct.of(x))[1] for x in tail), Fraction(0))
            exp[("tail_sum", L.k, None, "")] = (PowerProduct.power(L.N, 1 - s, up), "<", thr / 2)
    return exp


def _same(a, b) -> bool:
    try:
        return compare(a, b) == 0
    except (ValueError, ZeroDivisionError):
        return False


def _short(v) -> str:
    try:
        return f"{float(v):.6g}"
    except OverflowError:
        return "huge"


def verify_ledger(l: ConstructionLedger) -> VerifyReport:
    """Recompute every inequality from the level data and compare with the stored lines."""
    lines = []
    try:
        exp = _expected_theorem1(l) if l.theorem == 1 else _expected_theorem2(l)
    except Exception as e:  # malformed ledger data is itself a failure
        return VerifyReport([("ledger", 0, None, "", False, f"cannot recompute: {e}")])
    if not HALF < l.s < 1:
        lines.append(("s_range", 0, None, "", False, f"s={l.s} outside (1/2, 1)"))
    stored = {x.key: x for x in l.all_inequalities()}
    for key, (lhs, rel, rhs) in exp.items():
        name, k, i, note = key
        holds = _REL[rel](compare(lhs, rhs))
        ok, detail = holds, "recomputed"
        st = stored.get(key)
        if st is not None and (not _same(st.lhs, lhs) or not _same(st.rhs, rhs) or st.rel != rel):
            ok, detail = False, "stored operands differ from recomputation"
        if st is None and name not in ("N_floor", "amplitude", "start"):
            ok, detail = False, "line missing from ledger"
        if not holds:
            detail = f"fails: {_short(lhs)} {rel} {_short(rhs)} is false"
        lines.append((name, k, i, note, ok, detail))
    for key, st in stored.items():
        if key not in exp:
            lines.append((st.name, st.level, st.i, st.note, st.holds, "stored only"))
    for idx in range(1, len(l.levels)):
        if not l.levels[idx].q > l.levels[idx - 1].q:
            lines.append(("q_monotone", l.levels[idx].k, None, "", False, "q_k not increasing"))
    return VerifyReport(lines)


# -- Monte Carlo evidence ----------------------------------------------------------

def gather_evidence(l: ConstructionLedger, trials: int = 100_000, seed: int = 0, threads: int = 1,
                    budget: int = 2 * 10**9, levels=None) -> list[dict]:
    """Attach seeded walk-module estimates of each level's tail event to the ledger.

    Theorem 1: ``P(S_{N_k}/N_k**s >= 1)`` against ``1/12``. Theorems 2/3:
    ``P(S_{N_k}/N_k**s > sqrt(2)/(4 (16c)**(1-s)))`` against ``1/16``.
    Levels whose ``N_k * trials`` exceeds ``budget`` are marked infeasible.
    """
    from .walk import WalkConfig, mc_tail

    series = l.series
    angle = l.limit_angle
    out = []
    for lv in l.levels:
        if levels is not None and lv.k not in levels:
            continue
        if l.theorem == 1:
            t, target, inclusive, label = 1.0, Fraction(1, 12), True, "P(S/N^s >= 1)"
        else:
            thr = PowerProduct.from_json(l.params["threshold"])
            t, target, inclusive, label = float(thr), Fraction(1, 16), False, "P(S/N^s > t)"
        rec = {"level": lv.k, "event": label, "threshold": t, "target": fraction_str(target),
               "N": str(lv.N), "trials": trials, "seed": seed}
        if lv.N * trials > budget:
            rec["status"] = "infeasible"
            rec["reason"] = (f"N_k * trials is about 2^{(lv.N * trials).bit_length() - 1}, "
                             f"above the step budget {budget}")
        else:
            cfg = WalkConfig(angle, lv.N, trials, l.s, seed=seed, threads=threads)
            est = mc_tail(cfg, series, t, inclusive=inclusive)
            rec.update({"estimate": est.estimate, "interval": [est.lo, est.hi], "successes": est.successes,
                        "status": "supported" if est.lo >= float(target) else "not supported"})
        lv.evidence = [e for e in lv.evidence if e.get("event") != label] + [rec]
        out.append(rec)
    return out
