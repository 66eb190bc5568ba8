"""Exact rational helpers shared by the construction and verification paths.

Everything here works on :class:`fractions.Fraction` and Python integers.
Quantities of the form ``c * b1**e1 * b2**e2 ...`` with rational exponents
(``N**(1-s)``, ``sqrt(2)``, ``q**(-(gamma-1)*(1-s))``) are carried as
:class:`PowerProduct` values so that inequalities between them can be
decided without any floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Rational

import gmpy2

# pi is bracketed by these two rationals; used wherever a rigorous bound is needed
PI_LO = Fraction(314159265358979, 10**14)
PI_HI = Fraction(314159265358980, 10**14)


def as_rational(x) -> Fraction:
    """Convert ``x`` to a Fraction.

    Floats go through their shortest repr, so ``0.6`` becomes ``3/5`` rather
    than the binary neighbour. Strings may be ``"p/q"`` or decimals.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, (str, Decimal)):
        return Fraction(str(x).strip())
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational")


def frac_part(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def centered(x: Fraction) -> Fraction:
    """Representative of ``x mod 1`` in ``[-1/2, 1/2)``."""
    r = frac_part(x)
    return r - 1 if r >= Fraction(1, 2) else r


def fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def ceil_root(x: Fraction, k: int) -> int:
    """Smallest integer ``r >= 0`` with ``r**k >= x``."""
    x = Fraction(x)
    if k < 1:
        raise ValueError("root order must be positive")
    if x <= 0:
        return 0
    r = int(gmpy2.iroot(gmpy2.mpz(x.numerator // x.denominator), k)[0])
    while Fraction(r) ** k < x:
        r += 1
    while r > 0 and Fraction(r - 1) ** k >= x:
        r -= 1
    return r


def smallest_int_above(x: Fraction, k: int) -> int:
    """Smallest integer ``n >= 1`` with ``n**k > x`` (strict)."""
    r = max(ceil_root(x, k), 1)
    if Fraction(r) ** k <= x:
        r += 1
    return r


def _cos_series(theta_num: int, theta_den: int, terms: int, upper: bool) -> Fraction:
    lo = PI_LO * theta_num / theta_den
    hi = PI_HI * theta_num / theta_den
    total = Fraction(0)
    fact = 1
    for k in range(terms):
        if k:
            fact *= (2 * k - 1) * (2 * k)
        sign = -1 if k % 2 else 1
        # pick the end of the pi bracket that pushes the bound the safe way
        t = (hi if (sign > 0) == upper else lo) ** (2 * k)
        total += sign * t / fact
    return total


def cos_upper(theta_num: int, theta_den: int) -> Fraction:
    """Rational upper bound for ``cos(pi * theta_num / theta_den)``, ``0 < theta <= pi/2``.

    Alternating Taylor sum ending on a positive term (``theta**16``); on
    ``(0, pi/2]`` the terms decrease, so the truncation overshoots.
    """
    return _cos_series(theta_num, theta_den, 9, True)


def cos_lower(theta_num: int, theta_den: int) -> Fraction:
    """Rational lower bound for ``cos(pi * theta_num / theta_den)``, ``0 < theta <= pi/2``."""
    return _cos_series(theta_num, theta_den, 10, False)


@dataclass(frozen=True)
class PowerProduct:
    """A positive real ``coeff * prod(base**exp)`` with rational bases and exponents."""

    coeff: Fraction = Fraction(1)
    factors: tuple[tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self):
        coeff = Fraction(self.coeff)
        merged: dict[Fraction, Fraction] = {}
        for base, exp in self.factors:
            base, exp = as_rational(base), as_rational(exp)
            if base <= 0:
                raise ValueError("PowerProduct bases must be positive")
            if exp.denominator == 1:
                coeff *= base ** exp.numerator
                continue
            if base == 1:
                continue
            merged[base] = merged.get(base, Fraction(0)) + exp
        if coeff <= 0:
            raise ValueError("PowerProduct must be positive")
        factors = tuple(sorted((b, e) for b, e in merged.items() if e != 0))
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, x) -> "PowerProduct":
        if isinstance(x, PowerProduct):
            return x
        return cls(as_rational(x))

    @classmethod
    def power(cls, base, exp, coeff=1) -> "PowerProduct":
        return cls(as_rational(coeff), ((as_rational(base), as_rational(exp)),))

    def __mul__(self, other) -> "PowerProduct":
        other = PowerProduct.of(other)
        return PowerProduct(self.coeff * other.coeff, self.factors + other.factors)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "PowerProduct":
        return self * PowerProduct.of(other).inverse()

    def __rtruediv__(self, other) -> "PowerProduct":
        return PowerProduct.of(other) * self.inverse()

    def __pow__(self, k) -> "PowerProduct":
        k = as_rational(k)
        if k.denominator != 1:
            # coeff is folded in as a factor so a rational exponent stays exact
            return PowerProduct(1, ((self.coeff, k),) + tuple((b, e * k) for b, e in self.factors))
        return PowerProduct(self.coeff ** k.numerator, tuple((b, e * k) for b, e in self.factors))

    def inverse(self) -> "PowerProduct":
        return PowerProduct(1 / self.coeff, tuple((b, -e) for b, e in self.factors))

    def _cmp_one(self) -> int:
        """Sign of ``self - 1``, decided exactly."""
        if not self.factors:
            return (self.coeff > 1) - (self.coeff < 1)
        # raise to the lcm of the exponent denominators; all exponents become integers
        lcm = 1
        for _, e in self.factors:
            lcm = lcm * e.denominator // math.gcd(lcm, e.denominator)
        # a cheap log-domain screen before building big integers
        terms = [_log_fraction(self.coeff)] + [float(e) * _log_fraction(b) for b, e in self.factors]
        lg = math.fsum(terms)
        if abs(lg) > 1e-9 * sum(abs(t) for t in terms) + 1e-9:
            return 1 if lg > 0 else -1
        num, den = self.coeff.numerator ** lcm, self.coeff.denominator ** lcm
        for b, e in self.factors:
            k = int(e * lcm)
            if k >= 0:
                num *= b.numerator ** k
                den *= b.denominator ** k
            else:
                num *= b.denominator ** (-k)
                den *= b.numerator ** (-k)
        return (num > den) - (num < den)

    def compare(self, other) -> int:
        return (self / PowerProduct.of(other))._cmp_one()

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def __eq__(self, other):
        if not isinstance(other, (PowerProduct, int, Fraction)):
            return NotImplemented
        return self.compare(other) == 0

    def __hash__(self):
        return hash((self.coeff, self.factors))

    def log(self) -> float:
        total = _log_fraction(self.coeff)
        for b, e in self.factors:
            total += float(e) * _log_fraction(b)
        return total

    def __float__(self) -> float:
        lg = self.log()
        if lg > 709.0:
            return math.inf
        if lg < -745.0:
            return 0.0
        if not self.factors:
            return float(self.coeff)
        return math.exp(lg)

    def as_fraction(self) -> Fraction:
        if self.factors:
            raise ValueError(f"{self} is not known to be rational")
        return self.coeff

    def to_json(self):
        return {
            "coeff": fraction_str(self.coeff),
            "factors": [[fraction_str(b), fraction_str(e)] for b, e in self.factors],
        }

    @classmethod
    def from_json(cls, d) -> "PowerProduct":
        if isinstance(d, (str, int)):
            return cls(as_rational(d))
        return cls(Fraction(d["coeff"]), tuple((Fraction(b), Fraction(e)) for b, e in d["factors"]))

    def __repr__(self):
        parts = [fraction_str(self.coeff)] if self.coeff != 1 or not self.factors else []
        parts += [f"{fraction_str(b)}^({fraction_str(e)})" for b, e in self.factors]
        return "PowerProduct(" + " * ".join(parts) + ")"


def _log_fraction(x: Fraction) -> float:
    x = Fraction(x)
    return _log_int(x.numerator) - _log_int(x.denominator)


def _log_int(n: int) -> float:
    if n.bit_length() < 1000:
        return math.log(n)
    shift = n.bit_length() - 64
    return math.log(n >> shift) + shift * math.log(2)


def root_bracket(x: Fraction, e: Fraction, bits: int = 96) -> tuple[Fraction, Fraction]:
    """Rationals ``lo <= x**e <= hi`` with relative width about ``2**-bits``."""
    x, e = Fraction(x), Fraction(e)
    if x <= 0:
        raise ValueError("base must be positive")
    u, v = e.numerator, e.denominator
    y = x**u
    # extra bits for small values so the width stays relative
    mag = float(e) * _log_fraction(x) / math.log(2)
    scale = 1 << (bits + max(0, math.ceil(-mag) + 2))
    # v-th root of y * scale**v, then divide by scale
    t = y * scale**v
    lo = int(gmpy2.iroot(gmpy2.mpz(t.numerator // t.denominator), v)[0])
    hi = ceil_root(t, v)
    return Fraction(lo, scale), Fraction(hi, scale)


def pp_bracket(p: PowerProduct, bits: int = 96) -> tuple[Fraction, Fraction]:
    """Rational lower and upper bounds of a PowerProduct."""
    lo = hi = p.coeff
    for b, e in p.factors:
        l, h = root_bracket(b, e, bits)
        lo, hi = lo * l, hi * h
    return lo, hi
