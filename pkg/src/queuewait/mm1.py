"""M/M/1 waiting-time densities under FIFO, LIFO and SIRO.

All three have an atom ``1 - rho`` at zero. The continuous parts:

* FIFO: ``lam (1 - rho) exp(-(mu - lam) x)``
* LIFO: ``rho`` times the busy-period density,
  ``sqrt(lam/mu) exp(-(lam+mu) x) I1(2 sqrt(lam mu) x) / x``
* SIRO: a mixture of exponentials over an angle ``tau in (0, pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError
from .params import QueueParams, ServiceLaw, require_law
from .special import bessel_i1e

TAU_TOL = 1e-10


def psi(rho: float, tau: float) -> float:
    """Phase ``arg(exp(i tau) - sqrt(rho))`` taken in ``[0, pi]``.

    Same value as the two-branch arctan form: ``arctan(sin/(cos - sqrt(rho)))``
    up to ``arccos(sqrt(rho))`` and ``pi`` plus it beyond; ``atan2`` keeps it
    continuous across the switch.
    """
    if not 0.0 < rho < 1.0:
        raise DomainError(f"load must lie in (0, 1), got {rho!r}")
    if not 0.0 <= tau <= math.pi:
        raise DomainError(f"tau must lie in [0, pi], got {tau!r}")
    if tau == math.pi:
        return math.pi
    return math.atan2(math.sin(tau), math.cos(tau) - math.sqrt(rho))


def psi_branches(rho: float, tau: float) -> float:
    """The explicit two-branch arctan form of :func:`psi` (used as a cross-check)."""
    sr = math.sqrt(rho)
    cut = math.acos(sr)
    c = math.cos(tau) - sr
    if c == 0.0:
        return math.pi / 2
    base = math.atan(math.sin(tau) / c)
    return base if tau <= cut else math.pi + base


def _decay_rate(p: QueueParams, tau: float) -> float:
    # lam (1 - 2 cos(tau)/sqrt(rho) + 1/rho) > 0 for rho < 1
    return p.lam * (1.0 - 2.0 * math.cos(tau) / math.sqrt(p.rho) + 1.0 / p.rho)


def _siro_weight(p: QueueParams, tau: float) -> float:
    """Coefficient of ``exp(-b x)`` in the tau-integrand, ``b = _decay_rate``."""
    if tau <= 0.0 or tau >= math.pi:
        return 0.0
    ps = psi(p.rho, tau)
    cot = math.cos(tau) / math.sin(tau)
    if cot > 0:
        # exp(pi cot) overflows near tau = 0; divide it out first
        fac = math.exp((2.0 * ps - tau - math.pi) * cot) / (1.0 + math.exp(-math.pi * cot))
    else:
        fac = math.exp((2.0 * ps - tau) * cot) / (math.exp(math.pi * cot) + 1.0)
    return 2.0 * (p.mu - p.lam) * fac * math.sin(tau) * p.lam / _decay_rate(p, tau)


def _tau_integral(p: QueueParams, g: Callable[[float], float]) -> float:
    cut = math.acos(math.sqrt(p.rho))
    total = 0.0
    for lo, hi in ((0.0, cut), (cut, math.pi)):
        val, err = integrate.quad(g, lo, hi, epsabs=1e-15, epsrel=TAU_TOL, limit=400)
        if err > max(1e-13, 10 * TAU_TOL * abs(val)):
            raise QuadratureError(f"tau integral error estimate {err:.3g}")
        total += val
    return total


def mm1_siro_density(p: QueueParams, x: float) -> float:
    """Continuous part of the M/M/1-SIRO waiting-time density at ``x > 0``."""
    require_law(p, ServiceLaw.EXPONENTIAL, "M/M/1-SIRO density")
    if x <= 0:
        raise DomainError(f"continuous part is defined for x > 0, got {x!r}")

    def g(tau):
        return _siro_weight(p, tau) * math.exp(-_decay_rate(p, tau) * x)

    return _tau_integral(p, g)


def mm1_siro_raw_moment(p: QueueParams, order: int) -> float:
    """E[W^order] restricted to the continuous part; order 0 gives its mass.

    Integrates over x analytically (each tau contributes an exponential),
    leaving a single tau quadrature.
    """
    require_law(p, ServiceLaw.EXPONENTIAL, "M/M/1-SIRO moments")
    k = int(order)
    fact = math.factorial(k)

    def g(tau):
        b = _decay_rate(p, tau)
        return _siro_weight(p, tau) * fact / b ** (k + 1)

    return _tau_integral(p, g)


def mm1_siro_bin_mass(p: QueueParams, lo: float, hi: float) -> float:
    require_law(p, ServiceLaw.EXPONENTIAL, "M/M/1-SIRO density")

    def g(tau):
        b = _decay_rate(p, tau)
        return _siro_weight(p, tau) * (math.exp(-b * lo) - math.exp(-b * hi)) / b

    return _tau_integral(p, g)


def mm1_lifo_density(p: QueueParams, x: float) -> float:
    """Continuous part of the M/M/1-LIFO waiting-time density at ``x > 0``."""
    require_law(p, ServiceLaw.EXPONENTIAL, "M/M/1-LIFO density")
    if x <= 0:
        raise DomainError(f"continuous part is defined for x > 0, got {x!r}")
    lam, mu = p.lam, p.mu
    z = 2.0 * math.sqrt(lam * mu) * x
    # exp(-(lam+mu)x) I1(z) = exp(-(sqrt(mu)-sqrt(lam))^2 x) * i1e(z)
    gap = (math.sqrt(mu) - math.sqrt(lam)) ** 2
    if z < 1e-6:
        # I1(z)/x -> sqrt(lam mu); keep the next series term
        ratio = math.sqrt(lam * mu) * (1.0 + z * z / 8.0)
        return math.sqrt(lam / mu) * math.exp(-(lam + mu) * x) * ratio
    return math.sqrt(lam / mu) * math.exp(-gap * x) * bessel_i1e(z) / x


def mm1_fifo_density(p: QueueParams, x: float) -> float:
    require_law(p, ServiceLaw.EXPONENTIAL, "M/M/1-FIFO density")
    if x <= 0:
        raise DomainError(f"continuous part is defined for x > 0, got {x!r}")
    return p.lam * (1.0 - p.rho) * math.exp(-(p.mu - p.lam) * x)


@dataclass(frozen=True)
class QuadratureDensity:
    """Atom plus a continuous density known only pointwise; bins by quadrature."""

    atom_mass: float
    pdf: Callable[[float], float]
    bin_mass: Callable[[float, float], float] | None = None

    def bin_averages(self, edges) -> np.ndarray:
        edges = np.asarray(edges, dtype=float)
        out = np.empty(len(edges) - 1)
        for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
            if self.bin_mass is not None:
                m = self.bin_mass(lo, hi)
            else:
                m, _ = integrate.quad(self.pdf, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
            out[i] = m / (hi - lo)
        return out


def mm1_distribution(p: QueueParams, discipline) -> QuadratureDensity:
    from .params import Discipline
    d = Discipline.coerce(discipline)
    atom = 1.0 - p.rho
    if d is Discipline.FIFO:
        gap = p.mu - p.lam
        return QuadratureDensity(
            atom, lambda x: mm1_fifo_density(p, x),
            lambda lo, hi: p.lam * (1.0 - p.rho) * (math.exp(-gap * lo) - math.exp(-gap * hi)) / gap)
    if d is Discipline.LIFO:
        return QuadratureDensity(atom, lambda x: mm1_lifo_density(p, x))
    return QuadratureDensity(atom, lambda x: mm1_siro_density(p, x),
                             lambda lo, hi: mm1_siro_bin_mass(p, lo, hi))


@dataclass(frozen=True)
class OrderingRow:
    x: float
    fifo: float
    siro: float
    lifo: float
    region: str  # "short", "long" or "middle"
    ordered: bool | None  # LIFO > SIRO > FIFO; None inside the crossover region


def ordering_check(p: QueueParams, x_grid, short: float = 0.05, long: float = 5.0) -> list[OrderingRow]:
    """Tabulate the three M/M/1 densities and flag LIFO > SIRO > FIFO in both tails.

    Points between ``short`` and ``long`` are reported without a verdict.
    """
    require_law(p, ServiceLaw.EXPONENTIAL, "M/M/1 ordering check")
    rows = []
    for x in x_grid:
        x = float(x)
        f = mm1_fifo_density(p, x)
        s = mm1_siro_density(p, x)
        l = mm1_lifo_density(p, x)
        if x < short:
            region = "short"
        elif x > long:
            region = "long"
        else:
            region = "middle"
        ordered = (l > s > f) if region != "middle" else None
        rows.append(OrderingRow(x, f, s, l, region, ordered))
    return rows
