"""Fourier-side diagnostics of the transfer operator ``T phi(x) = (phi(x+a) + phi(x-a))/2``.

``T`` is diagonal on ``exp(2 pi i n x)`` with eigenvalue ``cos(2 pi n a)``, so
``I - T`` has eigenvalue ``1 - cos(2 pi n a)``. Everything below is a finite
sum over the frequencies of a :class:`CosineSeries`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .circle import cos2pi
from .diophantine import Angle
from .exact import PowerProduct, as_rational, centered, fraction_str
from .observable import CosineSeries


class ResonanceError(ValueError):
    """``1 - cos(2 pi n a) = 0`` at a frequency carried by the observable."""

    def __init__(self, frequency: int, msg: str | None = None):
        self.frequency = frequency
        super().__init__(msg or f"resonant frequency {frequency}: Poisson equation unsolvable")


def as_angle(a) -> Angle:
    if isinstance(a, Angle):
        return a
    return Angle.rational(a)


def phase(n: int, a) -> Fraction:
    """``n * a`` reduced to ``[-1/2, 1/2)``; exact for rational angles."""
    a = as_angle(a)
    return centered(n * a.approx())


def eigenvalue(n: int, a) -> float:
    """``1 - cos(2 pi n a)``, computed as ``2 sin(pi r)**2`` from the reduced phase."""
    r = phase(n, a)
    c = cos2pi(r)
    if isinstance(c, Fraction):
        return float(1 - c)
    # the half-angle form keeps full relative accuracy for small r
    return 2.0 * math.sin(math.pi * float(r)) ** 2


def is_resonant(n: int, a) -> bool:
    a = as_angle(a)
    return a.is_rational and phase(n, a) == 0


def transfer_apply(s: CosineSeries, a) -> CosineSeries:
    """``T s``: each term picks up the factor ``cos(2 pi q_j a)``."""
    a = as_angle(a)
    terms = []
    for q, amp in s.terms:
        c = cos2pi(phase(q, a))
        if isinstance(c, Fraction) and isinstance(amp, Fraction):
            terms.append((q, amp * c))
        elif isinstance(c, Fraction) and isinstance(amp, PowerProduct) and c > 0:
            terms.append((q, amp * c))
        else:
            terms.append((q, float(amp) * float(c)))
    return CosineSeries(tuple(terms), s.tail_bound)


@dataclass(frozen=True)
class PoissonSolution:
    """Fourier coefficients of ``psi`` with ``(I - T) psi = phi`` up to the cutoff."""

    psi: dict
    cutoff: int
    residual_bound: Fraction = Fraction(0)

    def as_series(self) -> CosineSeries:
        return CosineSeries(tuple((n, 2 * v) for n, v in self.psi.items() if n > 0))


def _coef_sq(amp) -> float:
    # |phi_hat(n)|^2 with phi_hat = a/2
    return (float(amp) / 2.0) ** 2


def poisson_solve(s: CosineSeries, a, N: int) -> PoissonSolution:
    a = as_angle(a)
    psi = {}
    residual = s.tail_bound
    for q, amp in s.terms:
        if q > N:
            residual += abs(Fraction(float(amp))) if not isinstance(amp, Fraction) else abs(amp)
            continue
        if float(amp) == 0:
            continue
        if is_resonant(q, a):
            raise ResonanceError(q)
        lam = eigenvalue(q, a)
        v = float(amp) / 2.0 / lam
        psi[q] = v
        psi[-q] = v
    return PoissonSolution(dict(sorted(psi.items())), N, residual)


def _rows(s: CosineSeries, a, N: int):
    a = as_angle(a)
    rows = []
    for q, amp in s.terms:
        if q > N:
            break
        c2 = _coef_sq(amp)
        if is_resonant(q, a):
            if c2 == 0:
                continue
            raise ResonanceError(q)
        lam = eigenvalue(q, a)
        # both n = +q and n = -q contribute
        rows.append((q, lam, 2 * c2 / lam, 2 * c2 / lam**2, 2 * c2 * (2 - lam) / lam))
    return rows


def kv_partial(s: CosineSeries, a, N: int) -> float:
    """``sum_{0<|n|<=N} |phi_hat(n)|^2 / (1 - cos 2 pi n a)``."""
    return math.fsum(r[2] for r in _rows(s, a, N))


def poisson_partial(s: CosineSeries, a, N: int) -> float:
    """``sum_{0<|n|<=N} |phi_hat(n)|^2 / (1 - cos 2 pi n a)^2``."""
    return math.fsum(r[3] for r in _rows(s, a, N))


def sigma2_partial(s: CosineSeries, a, N: int) -> float:
    """``sum_{0<|n|<=N} (1 + cos)/(1 - cos) |phi_hat(n)|^2``."""
    return math.fsum(r[4] for r in _rows(s, a, N))


def sigma2(s: CosineSeries, a) -> float:
    return sigma2_partial(s, a, s.max_frequency)


def kv_scan(s: CosineSeries, a, cutoffs) -> list[tuple[int, float]]:
    """Partial sums at each cutoff (e.g. along convergent denominators)."""
    rows = _rows(s, a, max(cutoffs, default=0))
    out = []
    for N in cutoffs:
        out.append((N, math.fsum(r[2] for r in rows if r[0] <= N)))
    return out


@dataclass
class SpectralReport:
    angle: Angle
    series: CosineSeries
    cutoff: int
    kv_partial: float
    poisson_partial: float
    sigma2_partial: float
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "eigenvalue", "kv_term", "sigma2_term"])
        for n, lam, kv, _, sg in self.rows:
            w.writerow([n, repr(lam), repr(kv), repr(sg)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "angle": self.angle.to_json(),
            "series": self.series.to_json(),
            "cutoff": self.cutoff,
            "kv_partial": self.kv_partial,
            "poisson_partial": self.poisson_partial,
            "sigma2_partial": self.sigma2_partial,
            "rows": [{"n": n, "eigenvalue": lam, "kv_term": kv, "poisson_term": po, "sigma2_term": sg}
                     for n, lam, kv, po, sg in self.rows],
        }


def spectral_report(s: CosineSeries, a, N: int) -> SpectralReport:
    a = as_angle(a)
    rows = _rows(s, a, N)
    return SpectralReport(a, s, N,
                          math.fsum(r[2] for r in rows),
                          math.fsum(r[3] for r in rows),
                          math.fsum(r[4] for r in rows),
                          rows)


@dataclass(frozen=True)
class Prop1Result:
    holds: bool
    exponent: object  # 2r - 2(gamma - 1), or inf
    margin: object  # r - (gamma - 1/2)
    constant: Fraction  # summand <= C**2 * constant * |n|**(-exponent)

    def __bool__(self):
        return self.holds


def prop1_criterion(r, gamma, c) -> Prop1Result:
    """Whether ``C^r`` observables satisfy the Kipnis-Varadhan sum at type ``(c, gamma)``.

    With ``1 - cos(t) >= 2 t**2 / pi**2`` on ``|t| <= pi`` one gets
    ``1 - cos(2 pi n a) >= 8 ||n a||**2 >= 8 c**2 / |n|**(2(gamma-1))``; with
    ``|phi_hat(n)| <= C |n|**-r`` the summand is at most
    ``C**2 / (8 c**2) * |n|**(-2r + 2(gamma-1))``.
    """
    gamma, c = as_rational(gamma), as_rational(c)
    if gamma < 2:
        raise ValueError("gamma must be >= 2")
    if c <= 0:
        raise ValueError("c must be positive")
    const = 1 / (8 * c * c)
    if r == math.inf or r == "inf":
        return Prop1Result(True, math.inf, math.inf, const)
    r = as_rational(r)
    exponent = 2 * r - 2 * (gamma - 1)
    margin = r - (gamma - Fraction(1, 2))
    return Prop1Result(margin > 0, exponent, margin, const)


def prop1_json(res: Prop1Result) -> dict:
    def enc(v):
        return "inf" if v == math.inf else fraction_str(v)
    return {"holds": res.holds, "exponent": enc(res.exponent), "margin": enc(res.margin),
            "constant": fraction_str(res.constant)}
