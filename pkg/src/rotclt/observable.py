"""Mean-zero cosine series ``phi(x) = sum_j a_j cos(2 pi q_j x)``.

Amplitudes are kept exact where possible: a ``Fraction`` for rational
amplitudes, a :class:`~rotclt.exact.PowerProduct` for values such as
``q**(-9/4)``, and a plain float only when a transcendental factor (a cosine)
has been applied. Signs are carried by the amplitude itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import mpmath
import numpy as np

from .circle import CirclePoint, cos2pi, reduce
from .exact import PowerProduct, as_rational, fraction_str

Amplitude = object  # Fraction | PowerProduct | float


def amp_float(a) -> float:
    return float(a)


def _norm_amp(a):
    if isinstance(a, PowerProduct):
        return a.coeff if not a.factors else a
    if isinstance(a, float):
        return a
    return as_rational(a)


def _amp_abs_float(a) -> float:
    return abs(float(a))


@dataclass(frozen=True)
class CosineSeries:
    terms: tuple = ()
    tail_bound: Fraction = Fraction(0)

    def __post_init__(self):
        terms = []
        for q, a in self.terms:
            q = int(q)
            if q < 1:
                raise ValueError("frequencies must be positive (the series has mean zero)")
            terms.append((q, _norm_amp(a)))
        terms.sort(key=lambda t: t[0])
        freqs = [q for q, _ in terms]
        if len(set(freqs)) != len(freqs):
            raise ValueError("frequencies must be distinct")
        tb = as_rational(self.tail_bound)
        if tb < 0:
            raise ValueError("tail bound must be nonnegative")
        object.__setattr__(self, "terms", tuple(terms))
        object.__setattr__(self, "tail_bound", tb)

    @classmethod
    def single(cls, q: int, a=1) -> "CosineSeries":
        return cls(((q, a),))

    @classmethod
    def empty(cls) -> "CosineSeries":
        return cls(())

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def frequencies(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.terms)

    @property
    def max_frequency(self) -> int:
        return max(self.frequencies, default=0)

    def amplitude(self, q: int):
        for qq, a in self.terms:
            if qq == q:
                return a
        return Fraction(0)

    def sup_bound(self) -> float:
        return math.fsum(_amp_abs_float(a) for _, a in self.terms) + float(self.tail_bound)

    def is_zero(self) -> bool:
        return all(float(a) == 0 for _, a in self.terms)

    def __add__(self, other: "CosineSeries") -> "CosineSeries":
        merged = dict(self.terms)
        for q, a in other.terms:
            if q in merged:
                b = merged[q]
                if isinstance(a, Fraction) and isinstance(b, Fraction):
                    merged[q] = a + b
                else:
                    merged[q] = float(a) + float(b)
            else:
                merged[q] = a
        return CosineSeries(tuple(merged.items()), self.tail_bound + other.tail_bound)

    def truncate(self, J: int) -> "CosineSeries":
        """Keep the first ``J`` terms; the dropped mass moves into the tail bound."""
        dropped = self.terms[J:]
        if all(isinstance(a, Fraction) for _, a in dropped):
            extra = sum((abs(a) for _, a in dropped), Fraction(0))
        else:
            # float sum, padded so it stays an upper bound
            extra = as_rational(math.fsum(_amp_abs_float(a) for _, a in dropped)) * (1 + Fraction(1, 2**40))
        return CosineSeries(self.terms[:J], self.tail_bound + extra)

    def __call__(self, x):
        return evaluate(self, x)

    def to_json(self) -> dict:
        return {"terms": [[q, _amp_json(a)] for q, a in self.terms],
                "tail_bound": fraction_str(self.tail_bound)}

    @classmethod
    def from_json(cls, d: dict) -> "CosineSeries":
        return cls(tuple((int(q), _amp_from_json(a)) for q, a in d.get("terms", [])),
                   Fraction(d.get("tail_bound", "0")))


def _amp_json(a):
    if isinstance(a, PowerProduct):
        return a.to_json()
    if isinstance(a, float):
        return repr(a)
    return fraction_str(a)


def _amp_from_json(a):
    if isinstance(a, dict):
        return PowerProduct.from_json(a)
    if isinstance(a, (int, float)):
        return as_rational(a)
    return Fraction(a)


def _exact_point(x):
    if isinstance(x, CirclePoint):
        return x
    return reduce(x)


def evaluate(s: CosineSeries, x) -> float:
    """``phi(x)``. Each ``q_j * x`` is reduced mod 1 exactly when ``x`` is rational."""
    pt = _exact_point(x)
    total = []
    for q, a in s.terms:
        if pt.exact:
            c = cos2pi(q * pt.value)
            total.append(float(a) * float(c))
        else:
            with mpmath.workprec(max(96, q.bit_length() + 80)):
                total.append(float(a) * float(mpmath.cos(2 * mpmath.pi * q * pt.value)))
    return math.fsum(total)


def evaluate_exact(s: CosineSeries, x: Fraction):
    """Exact value when every term lands on a rational cosine, else None."""
    x = as_rational(x)
    total = Fraction(0)
    for q, a in s.terms:
        c = cos2pi(q * x)
        if not isinstance(c, Fraction) or not isinstance(a, Fraction):
            return None
        total += a * c
    return total


def grid_phases(q: int, M: int, offset: Fraction = Fraction(0)) -> np.ndarray:
    """``frac(q * (m + offset)/M)`` for ``m < M`` as float64, reduced in integers."""
    offset = as_rational(offset)
    u, v = offset.numerator, offset.denominator
    D = v * M
    m = np.arange(M, dtype=object if q * D >= 2**62 else np.int64)
    r = (q * (v * m + u)) % D
    return np.asarray(r, dtype=np.float64) / D if D < 2**53 else np.array([float(Fraction(int(t), D)) for t in r])


def evaluate_grid(s: CosineSeries, M: int, offset: Fraction = Fraction(0)) -> np.ndarray:
    """``phi`` on the grid ``(m + offset)/M``, exact range reduction per term."""
    out = np.zeros(M)
    for q, a in s.terms:
        out += float(a) * np.cos(2 * np.pi * grid_phases(q, M, offset))
    return out


def evaluate_array(s: CosineSeries, x: np.ndarray) -> np.ndarray:
    """Vectorised float evaluation at float positions (no exact reduction)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for q, a in s.terms:
        out += float(a) * np.cos(2 * np.pi * np.mod(q * x, 1.0))
    return out


def fourier_coeff(s: CosineSeries, n: int):
    """Coefficient of ``exp(2 pi i n x)``: ``a_j/2`` at ``|n| = q_j``."""
    a = s.amplitude(abs(n)) if n != 0 else Fraction(0)
    return a / 2


def cr_norm_bound(s: CosineSeries, r: int) -> float:
    """``sum_j |a_j| (2 pi q_j)**r``, an upper bound for ``||phi^(r)||_inf``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    return math.fsum(_amp_abs_float(a) * (2 * math.pi * q) ** r for q, a in s.terms)


def cr_norm_log(s: CosineSeries, r: int) -> list[float]:
    """Per-term logs of ``|a_j| (2 pi q_j)**r``; useful when the terms overflow floats."""
    out = []
    for q, a in s.terms:
        if isinstance(a, PowerProduct):
            la = a.log()
        elif isinstance(a, Fraction):
            la = PowerProduct.of(abs(a)).log() if a else -math.inf
        else:
            la = math.log(abs(a)) if a else -math.inf
        out.append(la + r * math.log(2 * math.pi * q))
    return out


def t1_term(q: int, amplitude=None) -> CosineSeries:
    """Single term with the ``2**-q`` amplitude (or an override)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    a = Fraction(1, 2**q) if amplitude is None else amplitude
    return CosineSeries.single(q, a)


def t2_amplitude(q: int, gamma, s) -> object:
    e = -(as_rational(gamma) - 1) * (1 - as_rational(s))
    pp = PowerProduct.power(q, e)
    return pp.coeff if not pp.factors else pp


def t2_term(q: int, gamma, s, amplitude=None) -> CosineSeries:
    """Single term with amplitude ``q**(-(gamma-1)(1-s))`` (or an override)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    gamma, s = as_rational(gamma), as_rational(s)
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    if not Fraction(1, 2) < s < 1:
        raise ValueError("s must lie in (1/2, 1)")
    a = t2_amplitude(q, gamma, s) if amplitude is None else amplitude
    return CosineSeries.single(q, a)


def from_terms(pairs: Iterable, tail_bound=0) -> CosineSeries:
    return CosineSeries(tuple(pairs), tail_bound)
