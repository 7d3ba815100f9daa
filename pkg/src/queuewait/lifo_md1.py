"""Exact M/D/1-LIFO waiting-time density, plus closed-form FIFO and LIFO moments.

Between consecutive multiples of the service time ``a`` the LIFO density is a
polynomial times ``exp(-lam x)``::

    f(x) = lam^{k+1} x^{k-1} (x - k a) exp(-lam x) / k!,   k a < x < (k+1) a

with an atom ``1 - rho`` at zero. The right limit at ``k a`` is ``lam`` for
``k = 0`` and ``0`` for every later jump point; jump points return the right
limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError
from .params import (Discipline, MomentSummary, QueueParams, ServiceLaw,
                     ServiceMoments, require_law)

# Segment-mass truncation: stop once the bounded tail is below this.
TAIL_TOL = 1e-13
MAX_SEGMENTS = 200_000
QUAD_TOL = 1e-12


def _segment_value(k: int, lam: float, a: float, x: float) -> float:
    if k == 0:
        return lam * math.exp(-lam * x)
    d = x - k * a
    if d <= 0.0:
        return 0.0
    return math.exp((k + 1) * math.log(lam) + (k - 1) * math.log(x) + math.log(d)
                    - lam * x - math.lgamma(k + 1))


def _segment_ratio_bound(rho: float) -> float:
    # Segment masses eventually decay like the Borel pmf, ratio rho*e^{1-rho}.
    return rho * math.exp(1.0 - rho)


@dataclass(frozen=True)
class Segment:
    k: int
    lam: float
    a: float

    @property
    def interval(self) -> tuple[float, float]:
        return (self.k * self.a, (self.k + 1) * self.a)

    def __call__(self, x: float) -> float:
        return _segment_value(self.k, self.lam, self.a, x)


@dataclass(frozen=True)
class PiecewiseAnalyticDensity:
    """Atom at zero plus one closed-form :class:`Segment` per cell of width ``a``."""

    atom_mass: float
    lam: float
    a: float

    def segment(self, k: int) -> Segment:
        return Segment(k, self.lam, self.a)

    def pdf(self, x: float) -> float:
        if x <= 0:
            raise DomainError("continuous part is defined for x > 0; query atom_mass for x = 0")
        k = int(math.floor(x / self.a))
        # floor can land one cell low when x is a rounded multiple of a
        if x >= (k + 1) * self.a:
            k += 1
        return _segment_value(k, self.lam, self.a, x)

    def segment_masses(self) -> np.ndarray:
        return _segment_masses(self.lam, self.a)

    def cdf(self, x: float) -> float:
        if x < 0:
            raise DomainError(f"cdf needs x >= 0, got {x!r}")
        masses = self.segment_masses()
        k = int(math.floor(x / self.a))
        if k >= len(masses):
            return min(1.0, self.atom_mass + float(masses.sum()))
        partial = 0.0
        lo = k * self.a
        if x > lo:
            partial, _ = integrate.quad(self.segment(k), lo, x, epsabs=QUAD_TOL, epsrel=QUAD_TOL)
        return self.atom_mass + float(masses[:k].sum()) + partial

    def bin_averages(self, edges) -> np.ndarray:
        """Mean density of the continuous part over each ``[edges[i], edges[i+1])``."""
        edges = np.asarray(edges, dtype=float)
        out = np.empty(len(edges) - 1)
        for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
            out[i] = self._integrate(lo, hi) / (hi - lo)
        return out

    def _integrate(self, lo: float, hi: float, weight=None) -> float:
        total = 0.0
        k = int(math.floor(lo / self.a))
        while k * self.a < hi:
            seg = self.segment(k)
            s_lo, s_hi = max(lo, k * self.a), min(hi, (k + 1) * self.a)
            if s_hi > s_lo:
                fn = seg if weight is None else (lambda x, seg=seg: weight(x) * seg(x))
                val, err = integrate.quad(fn, s_lo, s_hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
                total += val
            k += 1
        return total


@lru_cache(maxsize=64)
def _segment_masses(lam: float, a: float) -> np.ndarray:
    rho = lam * a
    ratio = _segment_ratio_bound(rho)
    masses = []
    for k in range(MAX_SEGMENTS):
        val, err = integrate.quad(Segment(k, lam, a), k * a, (k + 1) * a,
                                  epsabs=0.0, epsrel=QUAD_TOL, limit=200)
        if err > max(QUAD_TOL, 1e-10 * abs(val)):
            raise QuadratureError(f"segment {k} integral error estimate {err:.3g}")
        masses.append(val)
        # Past the mode the masses fall off at least as fast as ratio^k.
        if k > 10 and masses[-1] < masses[-2] and val / (1.0 - ratio) < TAIL_TOL:
            break
    arr = np.asarray(masses)
    arr.setflags(write=False)
    return arr


def lifo_distribution(p: QueueParams) -> PiecewiseAnalyticDensity:
    require_law(p, ServiceLaw.DETERMINISTIC, "M/D/1-LIFO density")
    return PiecewiseAnalyticDensity(atom_mass=1.0 - p.rho, lam=p.lam, a=p.a)


def lifo_density(p: QueueParams, x: float) -> float:
    """Continuous part of the M/D/1-LIFO waiting-time density at ``x > 0``."""
    return lifo_distribution(p).pdf(x)


def lifo_cdf(p: QueueParams, x: float) -> float:
    """P(W <= x) for M/D/1-LIFO: atom plus the integrated segments up to ``x``."""
    return lifo_distribution(p).cdf(x)


def lifo_moments(p: QueueParams, m: ServiceMoments) -> MomentSummary:
    lam, rho = p.lam, p.rho
    mean = lam * m.xi / (2.0 * (1.0 - rho))
    var = (lam * m.eta / (3.0 * (1.0 - rho) ** 2)
           + lam**2 * m.xi**2 * (1.0 + rho) / (4.0 * (1.0 - rho) ** 3))
    return MomentSummary(Discipline.LIFO, p.law, mean, var, m.xi, m.eta)


def fifo_moments(p: QueueParams, m: ServiceMoments) -> MomentSummary:
    lam, rho = p.lam, p.rho
    mean = lam * m.xi / (2.0 * (1.0 - rho))
    var = lam * m.eta / (3.0 * (1.0 - rho)) + lam**2 * m.xi**2 / (4.0 * (1.0 - rho) ** 2)
    return MomentSummary(Discipline.FIFO, p.law, mean, var, m.xi, m.eta)
