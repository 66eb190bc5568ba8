"""The rotation by ``p/q`` restricted to a grid coset, as a q-state circulant chain.

``P = M / 2`` with ``M`` the integer matrix having ones at ``i -> i +- p``.
All matrix powers are computed in Python integers, so mixing bounds are
checked exactly. Spectral data come from the circulant eigenvectors:
``lambda_k = cos(2 pi k p / q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exact import PowerProduct, as_rational, cos_lower, cos_upper, fraction_str
from .observable import CosineSeries, evaluate
from .spectral import ResonanceError


@dataclass(frozen=True)
class FiniteChain:
    q: int
    p: int = 1

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be positive")
        if self.q % 2 == 0:
            raise ValueError(f"q={self.q} is even: the chain is periodic")
        if self.q > 1 and math.gcd(self.p, self.q) != 1:
            raise ValueError(f"gcd({self.p}, {self.q}) > 1: the chain is reducible")

    def int_matrix(self) -> list[list[int]]:
        q, p = self.q, self.p
        M = [[0] * q for _ in range(q)]
        for i in range(q):
            M[i][(i + p) % q] += 1
            M[i][(i - p) % q] += 1
        return M

    def matrix(self) -> list[list[Fraction]]:
        return [[Fraction(v, 2) for v in row] for row in self.int_matrix()]

    def power(self, n: int) -> list[list[int]]:
        """``M**n``; the transition matrix power is this divided by ``2**n``."""
        return _int_matpow(self.int_matrix(), n)


def _int_matmul(A, B):
    n = len(A)
    return [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _int_matpow(M, n: int):
    q = len(M)
    R = [[int(i == j) for j in range(q)] for i in range(q)]
    base = M
    while n:
        if n & 1:
            R = _int_matmul(R, base)
        base = _int_matmul(base, base)
        n >>= 1
    return R


def chain_spectrum(c: FiniteChain) -> list[float]:
    """Eigenvalues ``cos(2 pi k p / q)`` for ``k = 0..q-1``."""
    out = []
    for k in range(c.q):
        r = Fraction(k * c.p, c.q) % 1
        if r in (Fraction(1, 3), Fraction(2, 3)):
            out.append(-0.5)
        elif r == 0:
            out.append(1.0)
        else:
            out.append(math.cos(2 * math.pi * float(r)))
    return out


def spectral_gap_radius(c: FiniteChain) -> float:
    """``max_{k != 0} |lambda_k|``; equals ``cos(pi/q)`` for odd ``q``."""
    lam = chain_spectrum(c)[1:]
    return max((abs(v) for v in lam), default=0.0)


@dataclass(frozen=True)
class MixingBound:
    A: int
    rho: float
    rho_lower: Fraction
    rho_upper: Fraction
    q: int

    def to_json(self) -> dict:
        return {"A": self.A, "rho": self.rho, "rho_lower": fraction_str(self.rho_lower),
                "rho_upper": fraction_str(self.rho_upper), "q": self.q}


def rho_bounds(q: int) -> tuple[Fraction, Fraction]:
    """Rational bracket on ``cos(pi/q)`` (exact for q = 1, 3)."""
    if q == 1:
        return Fraction(0), Fraction(0)
    if q == 3:
        return Fraction(1, 2), Fraction(1, 2)
    return cos_lower(1, q), cos_upper(1, q)


def max_deviation(c: FiniteChain, n: int, Mn=None) -> Fraction:
    """``max_ij |(P**n)_ij - 1/q|`` exactly."""
    Mn = c.power(n) if Mn is None else Mn
    den = 2**n
    worst = max(abs(c.q * v - den) for row in Mn for v in row)
    return Fraction(worst, c.q * den)


def verify_mixing(c: FiniteChain, horizon: int = 64) -> list[tuple[int, Fraction, bool]]:
    """Exact check of ``max deviation <= rho**n`` for ``1 <= n <= horizon``.

    Uses the lower bracket of ``rho``, so a pass is rigorous.
    """
    lo, _ = rho_bounds(c.q)
    M = c.int_matrix()
    Mn = [row[:] for row in M]
    out = []
    for n in range(1, horizon + 1):
        if n > 1:
            Mn = _int_matmul(Mn, M)
        dev = max_deviation(c, n, Mn)
        out.append((n, dev, dev <= lo**n))
    return out


def mixing_bound(c: FiniteChain, horizon: int = 64, verify: bool = True) -> MixingBound:
    """``(A, rho) = (1, cos(pi/q))``.

    For a symmetric circulant, ``(P^n)_ij - 1/q = (1/q) sum_{k != 0} lambda_k^n e(k(i-j)/q)``,
    whose modulus is at most ``(q-1)/q * rho**n <= rho**n``.
    """
    lo, hi = rho_bounds(c.q)
    rho = 0.0 if c.q == 1 else math.cos(math.pi / c.q)
    if verify:
        bad = [n for n, _, ok in verify_mixing(c, horizon) if not ok]
        if bad:
            raise AssertionError(f"mixing bound fails at n={bad[0]} for q={c.q}")
    return MixingBound(1, rho, lo, hi, c.q)


def _check_nonresonant(s: CosineSeries, c: FiniteChain):
    for q, a in s.terms:
        if float(a) != 0 and q % c.q == 0:
            raise ResonanceError(q, f"frequency {q} is a multiple of q={c.q}: stationary mean is nonzero")


def stationary_mean(s: CosineSeries, c: FiniteChain, x) -> float:
    """``(1/q) sum_i phi(x + i p / q)``."""
    x = as_rational(x)
    return math.fsum(evaluate(s, x + Fraction(i * c.p, c.q)) for i in range(c.q)) / c.q


def _sq(a):
    if isinstance(a, PowerProduct):
        return a * a
    return as_rational(a) ** 2


def lemma2_constant(s: CosineSeries, c: FiniteChain) -> PowerProduct:
    """``K`` with ``P(|S_n|/n**s > delta) <= K / (delta**2 n**(2s-1))``.

    ``K = int phi**2 + 2 A q ||phi||_inf**2 / (1 - rho)``, using the upper
    bracket of ``rho`` so the bound stays valid. For a single term
    ``int phi**2 = a**2/2`` and ``||phi||_inf = |a|``.
    """
    _check_nonresonant(s, c)
    if not s.terms:
        return None
    _, rho_up = rho_bounds(c.q)
    A = 1
    amps = [abs(a) if not isinstance(a, PowerProduct) else a for _, a in s.terms]
    if len(amps) == 1:
        a2 = _sq(amps[0])
        return PowerProduct.of(a2) * (Fraction(1, 2) + Fraction(2 * A * c.q) / (1 - rho_up))
    # several terms: exact rational amplitudes only
    l2 = sum(_sq(a) for a in amps) / 2
    sup = sum(as_rational(a) for a in amps) + s.tail_bound
    return PowerProduct.of(l2 + 2 * A * c.q * sup**2 / (1 - rho_up))


def lemma2_bound_exact(s: CosineSeries, c: FiniteChain, n: int, s_exp, delta) -> PowerProduct | None:
    K = lemma2_constant(s, c)
    if K is None:
        return None
    s_exp, delta = as_rational(s_exp), as_rational(delta)
    if s_exp <= Fraction(1, 2):
        raise ValueError("need s > 1/2")
    return K / (PowerProduct.of(delta**2) * PowerProduct.power(n, 2 * s_exp - 1))


def lemma2_bound(s: CosineSeries, c: FiniteChain, n: int, s_exp, delta) -> float:
    """Upper bound on ``P(|S_n| / n**s > delta)`` for a non-resonant observable."""
    b = lemma2_bound_exact(s, c, n, s_exp, delta)
    return 0.0 if b is None else float(b)


def lemma2_find_N(s: CosineSeries, c: FiniteChain, s_exp, delta, epsilon) -> int:
    """Smallest ``n >= 1`` with ``lemma2_bound < epsilon``, decided exactly."""
    K = lemma2_constant(s, c)
    if K is None:
        return 1
    s_exp, delta, epsilon = as_rational(s_exp), as_rational(delta), as_rational(epsilon)
    if s_exp <= Fraction(1, 2):
        raise ValueError("need s > 1/2")
    e = 2 * s_exp - 1
    # n**e > X  <=>  n > X**(1/e)
    X = K / PowerProduct.of(delta**2 * epsilon)
    return smallest_power_above(X, e)


def smallest_power_above(X: PowerProduct, e: Fraction) -> int:
    """Smallest integer ``n >= 1`` with ``n**e > X`` (``e > 0``)."""
    X = PowerProduct.of(X)
    e = as_rational(e)
    if not X.factors:
        # n**(u/v) > X  <=>  n**u > X**v, settled with an exact integer root
        from .exact import smallest_int_above
        return smallest_int_above(X.coeff ** e.denominator, e.numerator)

    def ok(n):
        return PowerProduct.power(n, e) > X

    if ok(1):
        return 1
    guess = X.log() / float(e)
    hi = max(2, int(math.exp(min(guess, 700.0))) + 2) if guess < 700 else 1 << (int(guess / math.log(2)) + 2)
    while not ok(hi):
        hi *= 2
    lo = 1  # ok(lo) is False
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
