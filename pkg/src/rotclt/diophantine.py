"""Continued fractions, convergents, approximation witnesses and Liouville angles.

An :class:`Angle` is never a float. It is a regular continued fraction: a
known prefix of partial quotients plus either nothing (a rational, the
expansion terminates), a periodic tail (for example the golden ratio
conjugate ``[0; 1, 1, 1, ...]``), or ``None`` when only finitely many
quotients are certified (angles read from a decimal/mpf value).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import mpmath

from .exact import PowerProduct, as_rational, ceil_root

DEFAULT_PRECISION = 4096


class InsufficientDigits(ValueError):
    """More partial quotients were requested than the angle certifies."""


class ExactHit(ValueError):
    """``p/q`` equals the (rational) angle exactly."""


class PrecisionBudgetExceeded(ValueError):
    """A construction needs integers larger than the configured budget."""


def _cf_of_fraction(x: Fraction) -> list[int]:
    out = []
    num, den = x.numerator, x.denominator
    while den:
        a, r = divmod(num, den)
        out.append(a)
        num, den = den, r
    return out


@dataclass(frozen=True)
class Angle:
    quotients: tuple[int, ...]
    tail: tuple[int, ...] | None = ()
    precision: int = DEFAULT_PRECISION
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        q = tuple(int(a) for a in self.quotients)
        if not q:
            raise ValueError("an angle needs at least the integer part a_0")
        if any(a < 1 for a in q[1:]):
            raise ValueError("partial quotients after a_0 must be positive")
        tail = self.tail if self.tail is None else tuple(int(a) for a in self.tail)
        if tail and any(a < 1 for a in tail):
            raise ValueError("tail quotients must be positive")
        if tail == () and len(q) >= 2 and q[-1] == 1:
            # canonical form of a rational: last quotient > 1
            q = q[:-2] + (q[-2] + 1,)
        object.__setattr__(self, "quotients", q)
        object.__setattr__(self, "tail", tail)

    # -- constructors ------------------------------------------------------

    @classmethod
    def rational(cls, x, q: int | None = None) -> "Angle":
        x = Fraction(x, q) if q is not None else as_rational(x)
        return cls(tuple(_cf_of_fraction(x)), ())

    @classmethod
    def golden_conjugate(cls) -> "Angle":
        """``(sqrt(5) - 1)/2 = [0; 1, 1, 1, ...]``."""
        return cls((0,), (1,))

    @classmethod
    def from_real(cls, x, bits: int = 256) -> "Angle":
        """Certified prefix of the expansion of a real given to ``bits`` bits."""
        with mpmath.workprec(bits + 32):
            x = mpmath.mpf(x)
            man, exp = x.man_exp
        val = Fraction(man) * Fraction(2) ** exp
        eps = Fraction(1, 2**bits)
        lo, hi = _cf_of_fraction(val - eps), _cf_of_fraction(val + eps)
        common = []
        for a, b in zip(lo, hi):
            if a != b:
                break
            common.append(a)
        if len(common) > 1:
            # the last shared quotient may still differ for interior points
            common.pop()
        return cls(tuple(common), None, precision=bits)

    # -- structure ---------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.tail == ()

    @property
    def kind(self) -> str:
        if self.tail == ():
            return "exact-rational"
        return "constructed" if self.tail else "truncated"

    def quotient(self, k: int) -> int:
        n = len(self.quotients)
        if k < n:
            return self.quotients[k]
        if self.tail is None:
            raise InsufficientDigits(f"only {n} partial quotients are certified")
        if not self.tail:
            raise IndexError(f"rational angle has only {n} partial quotients")
        return self.tail[(k - n) % len(self.tail)]

    def iter_quotients(self) -> Iterator[int]:
        k = 0
        while True:
            try:
                yield self.quotient(k)
            except IndexError:
                return
            k += 1

    def convergent(self, k: int) -> tuple[int, int]:
        cache = self._cache.setdefault("conv", [])
        while len(cache) <= k:
            j = len(cache)
            a = self.quotient(j)
            if j == 0:
                cache.append((a, 1))
                continue
            p1, q1 = cache[j - 1]
            p2, q2 = cache[j - 2] if j >= 2 else (1, 0)
            cache.append((a * p1 + p2, a * q1 + q2))
        return cache[k]

    def n_known(self) -> int | None:
        """Number of quotients available, or None if unbounded."""
        if self.tail:
            return None
        return len(self.quotients)

    def value(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("irrational angle has no exact rational value")
        return Fraction(*self.convergent(len(self.quotients) - 1))

    def approx(self, bits: int | None = None) -> Fraction:
        """A rational within ``2**-bits`` of the angle (the angle itself if rational)."""
        if self.is_rational:
            return self.value()
        bits = self.precision if bits is None else bits
        key = ("approx", bits)
        if key in self._cache:
            return self._cache[key]
        target = 1 << bits
        k = 0
        while True:
            p, q = self.convergent(k)
            q_next = self.convergent(k + 1)[1]
            if q * q_next >= target:
                self._cache[key] = Fraction(p, q)
                return self._cache[key]
            k += 1

    def mpf(self, bits: int = 128):
        f = self.approx(max(bits + 8, 64))
        with mpmath.workprec(bits):
            return mpmath.mpf(f.numerator) / f.denominator

    def __float__(self):
        return float(self.approx(80))

    def gap_bounds(self, p: int, q: int) -> tuple[Fraction, Fraction]:
        """Exact rational bracket ``lo <= |alpha - p/q| <= hi``.

        For a rational angle both ends equal the exact gap. Otherwise a deep
        convergent ``P/Q`` with error below ``1/(Q Q')`` is used.
        """
        x = Fraction(p, q)
        if self.is_rational:
            g = abs(self.value() - x)
            return g, g
        k = 0
        while True:
            P, Q = self.convergent(k)
            Qn = self.convergent(k + 1)[1]
            err = Fraction(1, Q * Qn)
            if P * q == p * Q:
                # p/q is itself convergent k: the classical two-sided bound is sharp
                return Fraction(1, Q * (Qn + Q)), err
            d = abs(Fraction(P, Q) - x)
            if Q > q and err * 2**64 < d:
                return d - err, d + err
            k += 1

    def index_of(self, p: int, q: int) -> int | None:
        """Index k with ``(p_k, q_k) == (p, q)``, if ``p/q`` is a convergent."""
        k = 0
        while True:
            try:
                P, Q = self.convergent(k)
            except IndexError:
                return None
            if Q > q:
                return None
            if (P, Q) == (p, q):
                return k
            k += 1

    # -- serialization -----------------------------------------------------

    def to_json(self, n_convergents: int | None = None) -> dict:
        n = len(self.quotients) if n_convergents is None else n_convergents
        return {
            "quotients": [str(a) for a in self.quotients],
            "tail": None if self.tail is None else [str(a) for a in self.tail],
            "convergents": [[str(p), str(q)] for p, q in (self.convergent(k) for k in range(n))],
            "precision": self.precision,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Angle":
        tail = d.get("tail", ())
        a = cls(tuple(int(x) for x in d["quotients"]),
                None if tail is None else tuple(int(x) for x in tail),
                precision=int(d.get("precision", DEFAULT_PRECISION)))
        for k, (p, q) in enumerate(d.get("convergents", [])):
            if a.convergent(k) != (int(p), int(q)):
                raise ValueError(f"convergent {k} inconsistent with quotients")
        return a


def continued_fraction(a: Angle, K: int | None = None) -> list[int]:
    """First ``K`` partial quotients (all of them for a rational when ``K`` is None)."""
    if K is None:
        if a.n_known() is None:
            raise ValueError("infinite expansion: give K")
        if a.tail is None:
            raise InsufficientDigits("truncated angle: give K")
        K = a.n_known()
    out = []
    for k in range(K):
        try:
            out.append(a.quotient(k))
        except InsufficientDigits:
            raise
        except IndexError:
            break
    return out


def convergents(quotients: Sequence[int]) -> list[tuple[int, int]]:
    out = []
    p2, q2, p1, q1 = 0, 1, 1, 0
    for a in quotients:
        p, q = a * p1 + p2, a * q1 + q2
        out.append((p, q))
        p2, q2, p1, q1 = p1, q1, p, q
    return out


def witness_exponent(a: Angle, p: int, q: int) -> float:
    """Effective exponent ``-log|alpha - p/q| / log q``."""
    if q == 0:
        raise ValueError("q must be nonzero")
    if q < 0:
        p, q = -p, -q
    if q == 1:
        raise ValueError("exponent undefined for q = 1 (log q = 0)")
    if a.is_rational and a.value() == Fraction(p, q):
        raise ExactHit(f"{p}/{q} equals the angle")
    # the approximant is within 2**-precision of alpha, far below any gap seen here
    gap = abs(a.approx() - Fraction(p, q))
    with mpmath.workprec(192):
        g = mpmath.mpf(gap.numerator) / gap.denominator
        return float(-mpmath.log(g) / mpmath.log(q))


@dataclass(frozen=True)
class ApproxWitness:
    """A rational ``p/q`` with a certified bracket on ``|alpha - p/q|``."""

    p: int
    q: int
    gamma: Fraction
    c: Fraction
    gap_lower: Fraction
    gap_upper: Fraction

    @property
    def bound(self) -> PowerProduct:
        return PowerProduct.power(self.q, -self.gamma, self.c)

    @property
    def certified(self) -> bool:
        return PowerProduct.of(self.gap_upper) <= self.bound


def make_witness(a: Angle, p: int, q: int, gamma, c=1) -> ApproxWitness:
    lo, hi = a.gap_bounds(p, q)
    return ApproxWitness(p, q, as_rational(gamma), as_rational(c), lo, hi)


def find_witnesses(a: Angle, gamma, c=1, max_index: int = 64) -> list[ApproxWitness]:
    """Convergents of ``a`` certified to satisfy ``|alpha - p/q| <= c/q**gamma``."""
    out = []
    for k in range(1, max_index):
        try:
            p, q = a.convergent(k)
            a.convergent(k + 1)
        except (IndexError, InsufficientDigits):
            break
        if q < 2:
            continue
        w = make_witness(a, p, q, gamma, c)
        if w.certified:
            out.append(w)
    return out


def effective_exponent(schedule: Callable[[int], object], k: int) -> Fraction:
    # every convergent already beats exponent 2, so smaller targets are clipped
    return max(as_rational(schedule(k)), Fraction(2))


def build_liouville(schedule: Callable[[int], object], levels: int, prefix: Sequence[int] = (0,),
                    tail: Sequence[int] = (1,), precision: int = DEFAULT_PRECISION,
                    max_bits: int = 1 << 22) -> Angle:
    """Angle whose convergent ``k`` (``1 <= k <= levels``) beats ``1/q_k**e_k``.

    Partial quotients not fixed by ``prefix`` are chosen minimal:
    ``a_{k+1} = ceil(q_k**(e_k - 2))`` gives ``q_{k+1} >= q_k**(e_k - 1)`` and so
    ``|alpha - p_k/q_k| < 1/(q_k q_{k+1}) <= 1/q_k**e_k``. The quotients after
    the last level continue periodically with ``tail``.
    """
    if levels < 1:
        raise ValueError("need at least one level")
    prev = None
    for k in range(1, levels + 1):
        e = as_rational(schedule(k))
        if prev is not None and e < prev:
            raise ValueError("schedule must be nondecreasing")
        prev = e
    quotients = list(prefix)
    if len(quotients) < 2:
        quotients += [1] * (2 - len(quotients))
    conv = convergents(quotients)
    for k in range(1, levels + 1):
        e = effective_exponent(schedule, k)
        p_k, q_k = conv[k]
        need = max(1, _ceil_pow(q_k, e - 2))
        if k + 1 < len(quotients):
            if quotients[k + 1] < need:
                raise ValueError(f"prefix quotient a_{k + 1}={quotients[k + 1]} violates level {k}")
        else:
            if need.bit_length() > max_bits:
                raise PrecisionBudgetExceeded(f"level {k} needs a {need.bit_length()}-bit quotient")
            quotients.append(need)
        conv = convergents(quotients)
    angle = Angle(tuple(quotients), tuple(tail), precision=precision)
    for k in range(1, levels + 1):
        _, q_k = angle.convergent(k)
        q_n = angle.convergent(k + 1)[1]
        e = effective_exponent(schedule, k)
        # |alpha - p_k/q_k| < 1/(q_k q_{k+1}) <= 1/q_k**e
        assert PowerProduct.of(q_k * q_n) >= PowerProduct.power(q_k, e)
    return angle


def _ceil_pow(q: int, e: Fraction) -> int:
    """Smallest integer ``>= q**e`` for rational ``e >= 0``."""
    if e <= 0:
        return 1
    return ceil_root(Fraction(q) ** e.numerator, e.denominator)


def liouville_levels(angle: Angle, schedule: Callable[[int], object], levels: int) -> list[dict]:
    """Per-level exact check of the schedule inequality, for reports."""
    rows = []
    for k in range(1, levels + 1):
        p, q = angle.convergent(k)
        qn = angle.convergent(k + 1)[1]
        e = effective_exponent(schedule, k)
        rows.append({"k": k, "p": p, "q": q, "q_next": qn, "exponent": e,
                     "holds": PowerProduct.of(q * qn) >= PowerProduct.power(q, e)})
    return rows


def golden_value(bits: int = 128):
    with mpmath.workprec(bits):
        return (mpmath.sqrt(5) - 1) / 2


def irreducible(p: int, q: int) -> bool:
    return q >= 1 and math.gcd(p, q) == 1
