"""Points of the unit circle R/Z, distances, and the resonant good sets G_q^eta.

A :class:`CirclePoint` holds an exact ``Fraction`` whenever the input was
rational (ints, Fractions, and finite floats, which are dyadic rationals), and
an ``mpmath.mpf`` otherwise. Reduction mod 1 is therefore exact on the
construction and verification paths; only the final trig call rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath
import numpy as np

from .exact import as_rational, centered, frac_part

# mantissa bits used when a position is not rational
EXT_PREC = 96

_HALF = Fraction(1, 2)


@dataclass(frozen=True, order=True)
class CirclePoint:
    value: object  # Fraction or mpmath.mpf, always in [0, 1)

    def __post_init__(self):
        if not 0 <= self.value < 1:
            raise ValueError(f"circle point {self.value!r} outside [0, 1)")

    @property
    def exact(self) -> bool:
        return isinstance(self.value, Fraction)

    def __float__(self):
        return float(self.value)


def reduce(x) -> CirclePoint:
    """``x mod 1`` as a circle point; exact for rational input."""
    if isinstance(x, CirclePoint):
        return x
    if isinstance(x, mpmath.mpf):
        if not mpmath.isfinite(x):
            raise ValueError(f"non-finite position {x!r}")
        with mpmath.workprec(max(EXT_PREC, mpmath.mp.prec)):
            r = x - mpmath.floor(x)
        return CirclePoint(r)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite position {x!r}")
        # a float is a dyadic rational; keep it exactly
        return CirclePoint(frac_part(Fraction(x)))
    if isinstance(x, (int, Rational, str)):
        return CirclePoint(frac_part(as_rational(x)))
    raise TypeError(f"cannot place {type(x).__name__} on the circle")


def _point(x) -> CirclePoint:
    return x if isinstance(x, CirclePoint) else reduce(x)


def circle_dist(x, y):
    """Arc distance in ``[0, 1/2]``."""
    x, y = _point(x), _point(y)
    d = abs(x.value - y.value)
    return min(d, 1 - d)


def grid_dist(x, q: int):
    """Distance from ``x`` to the grid ``{0, 1/q, ..., (q-1)/q}``."""
    if q < 1:
        raise ValueError("grid order must be >= 1")
    x = _point(x)
    if x.exact:
        return abs(centered(q * x.value)) / q
    with mpmath.workprec(max(EXT_PREC, mpmath.mp.prec)):
        y = q * x.value
        r = y - mpmath.floor(y)
        return min(r, 1 - r) / q


@dataclass(frozen=True)
class GoodSet:
    """Points within ``eta/q`` of the order-``q`` grid."""

    q: int
    eta: Fraction

    def __post_init__(self):
        eta = as_rational(self.eta)
        if self.q < 1:
            raise ValueError("good set order must be >= 1")
        if not 0 < eta < _HALF:
            raise ValueError("eta must lie in (0, 1/2)")
        object.__setattr__(self, "eta", eta)

    @property
    def measure(self) -> Fraction:
        return 2 * self.eta

    def __contains__(self, x) -> bool:
        return in_good_set(x, self)


def in_good_set(x, g: GoodSet) -> bool:
    # strict inequality: the boundary is excluded
    return grid_dist(x, g.q) < g.eta / g.q


def good_set_fraction(g: GoodSet, M: int, offset: Fraction = Fraction(0)) -> Fraction:
    """Exact fraction of the ``M`` points ``(i + offset)/M`` lying in ``g``.

    Works entirely in integers: with ``x = (i + o)/M`` and ``o = u/v``, the
    point is inside iff ``min(r, D - r) < eta * D`` where
    ``r = q*(v*i + u) mod D`` and ``D = v*M``.
    """
    offset = as_rational(offset)
    u, v = offset.numerator, offset.denominator
    D = v * M
    i = np.arange(M, dtype=np.int64)
    if q_fits(g.q, D):
        r = (g.q * (v * i + u)) % D
        d = np.minimum(r, D - r)
        inside = d * g.eta.denominator < g.eta.numerator * D
        return Fraction(int(np.count_nonzero(inside)), M)
    count = 0
    for k in range(M):
        r = (g.q * (v * k + u)) % D
        if min(r, D - r) * g.eta.denominator < g.eta.numerator * D:
            count += 1
    return Fraction(count, M)


def q_fits(q: int, D: int) -> bool:
    return q * D < 2**62 and D < 2**31


def cos2pi(r: Fraction):
    """``cos(2*pi*r)`` for rational ``r``; exact where the value is rational."""
    r = centered(as_rational(r))
    a = abs(r)
    exact = {Fraction(0): Fraction(1), Fraction(1, 4): Fraction(0), Fraction(1, 2): Fraction(-1),
             Fraction(1, 6): _HALF, Fraction(1, 3): -_HALF}
    if a in exact:
        return exact[a]
    return math.cos(2 * math.pi * float(r))


def frac_mul_u64(words: np.ndarray, q: int) -> np.ndarray:
    """``frac(q * x)`` as float64 for ``x = word / 2**64``.

    uint64 multiplication wraps mod 2**64, which is exactly the reduction
    mod 1 of ``q * x``; only the final conversion rounds.
    """
    qm = np.uint64(q % 2**64)
    with np.errstate(over="ignore"):
        prod = words * qm
    # top 53 bits carry the significand; the conversion below is exact
    return (prod >> np.uint64(11)).astype(np.float64) * 2.0**-53
