"""Laplace transforms of waiting-time distributions and the SIRO cross-check.

The SIRO transform is a nested integral over ``z in (Theta(s), 1)``. Writing
``u = z - Theta`` and ``c = 1 - rho*Theta``, the inner integrand
``1/(y - exp(-a s - rho (1-y)))`` has a simple pole at ``u = 0`` with residue
``1/c``. Splitting that pole off analytically gives

    Psi = (u / (1 - Theta))^(1/c) * exp(-R(u))

with ``R`` the integral of a smooth remainder. After rescaling
``u = (1 - Theta) t`` the outer integrand is a smooth function times
``t^(1/c - 1)`` on ``[0, 1]``; QUADPACK's algebraic-weight rule (QAWS) handles
that factor and a fixed Gauss-Legendre rule computes ``R``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._workers import max_workers
from .errors import DomainError, QuadratureError
from .params import QueueParams, ServiceLaw, require_law
from .siro_md1 import StepDensity
from .special import lambert_w0

SIRO_TOL = 1e-8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


@dataclass(frozen=True)
class TransformPoint:
    s: float
    value: float


def _busy_pair(p: QueueParams, s: float) -> tuple[float, float]:
    """(Theta(s), 1 - Theta(s)), each to full relative precision."""
    rho, a = p.rho, p.a
    t = -lambert_w0(-rho * math.exp(-rho - a * s)) / rho
    # Newton on v = -expm1(-a s - rho v), v = 1 - Theta; exact as s -> 0
    v = 1.0 - t
    for _ in range(8):
        e = math.exp(-a * s - rho * v)
        g = v + math.expm1(-a * s - rho * v)
        dv = g / (1.0 - rho * e)
        v -= dv
        if abs(dv) <= 1e-16 * abs(v):
            break
    return (t if t < 0.5 else 1.0 - v), v


def _busy_complement(p: QueueParams, s: float) -> float:
    return _busy_pair(p, s)[1]


def theta(p: QueueParams, s: float) -> float:
    """Busy-period transform E[exp(-s X)] for M/D/1."""
    require_law(p, ServiceLaw.DETERMINISTIC, "busy-period transform")
    if s < 0:
        raise DomainError(f"transform variable must be >= 0, got {s!r}")
    if s == 0:
        return 1.0
    return _busy_pair(p, s)[0]


def lifo_transform(p: QueueParams, s: float) -> float:
    require_law(p, ServiceLaw.DETERMINISTIC, "M/D/1-LIFO transform")
    if s <= 0:
        raise DomainError(f"transform variable must be > 0, got {s!r}")
    busy = p.lam * _busy_complement(p, s)
    return 1.0 - p.rho + busy / (s + busy)


def _expm1_minus_x_over_x2(x: np.ndarray) -> np.ndarray:
    # (e^x - 1 - x) / x^2, finite at x = 0
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-2
    xs = x[small]
    out[small] = 0.5 + xs * (1 / 6 + xs * (1 / 24 + xs * (1 / 120 + xs * (1 / 720 + xs / 5040))))
    xl = x[~small]
    out[~small] = (np.expm1(xl) - xl) / (xl * xl)
    return out


def _expm1_over_x(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x != 0
    out[nz] = np.expm1(x[nz]) / x[nz]
    return out


class _SiroIntegrand:
    """Outer SIRO integrand with the algebraic endpoint factor removed."""

    def __init__(self, p: QueueParams, s: float):
        self.rho = p.rho
        self.a = p.a
        self.s = s
        self.th, self.span = _busy_pair(p, s)
        self.c = 1.0 - self.rho * self.th

    def denominator(self, u):
        # y - exp(-a s - rho (1-y)) at y = Theta + u, using exp(...) = Theta e^{rho u}
        return u - self.th * np.expm1(self.rho * u)

    def remainder(self, u):
        # 1/D(u) - 1/(c u) = Theta (e^{rho u} - 1 - rho u) / (c u D(u)), smooth at u = 0
        ru = self.rho * np.asarray(u, dtype=float)
        return (self.th * self.rho**2 * _expm1_minus_x_over_x2(ru)
                / (self.c * (1.0 - self.th * self.rho * _expm1_over_x(ru))))

    def log_psi_correction(self, u: float) -> float:
        # R(u) = integral of the remainder from u to 1 - Theta
        half = 0.5 * (self.span - u)
        nodes = u + half * (_GL_NODES + 1.0)
        return half * float(np.dot(_GL_WEIGHTS, self.remainder(nodes)))

    def phi_second(self, w: float) -> float:
        # (1-z)/(z - exp(-rho (1-z))) with w = 1 - z, rewritten so the
        # removable singularity at w = 0 needs no special case
        h = float(_expm1_minus_x_over_x2(np.array([-self.rho * w]))[0])
        return -1.0 / ((1.0 - self.rho) + self.rho**2 * w * h)

    def __call__(self, u: float) -> float:
        w = self.span - u
        A = w - self.a * self.s / (1.0 - self.rho)
        # u / D(u), finite at u = 0
        u_over_d = 1.0 / (1.0 - self.th * self.rho * float(_expm1_over_x(np.array([self.rho * u]))[0]))
        smooth = A * u_over_d - self.phi_second(w) * u
        return smooth * math.exp(-self.log_psi_correction(u))

    def scaled(self, t: float) -> float:
        # integrand in t = u / (1 - Theta); the span powers cancel exactly
        return self(self.span * t)

    def psi(self, z: float) -> float:
        u = z - self.th
        if u <= 0:
            return 0.0
        return (u / self.span) ** (1.0 / self.c) * math.exp(-self.log_psi_correction(u))

    def phi(self, z: float) -> float:
        A = 1.0 - z - self.a * self.s / (1.0 - self.rho)
        return A / float(self.denominator(z - self.th)) - self.phi_second(1.0 - z)


def siro_transform(p: QueueParams, s: float, tol: float = SIRO_TOL) -> float:
    """Laplace transform of the M/D/1-SIRO waiting time at real ``s > 0``."""
    require_law(p, ServiceLaw.DETERMINISTIC, "M/D/1-SIRO transform")
    if s <= 0:
        raise DomainError(f"transform variable must be > 0, got {s!r}")
    f = _SiroIntegrand(p, s)
    if f.span <= 0.0:
        return 1.0
    prefactor = p.lam * (1.0 - p.rho) / s
    # the 1/s prefactor amplifies the outer error near s = 0
    val, err = integrate.quad(f.scaled, 0.0, 1.0, weight="alg", wvar=(1.0 / f.c - 1.0, 0.0),
                              epsabs=min(1e-13, 1e-3 * tol / prefactor), epsrel=1e-12, limit=200)
    if not math.isfinite(val) or abs(prefactor) * err > tol:
        raise QuadratureError(f"SIRO transform at s={s}: error estimate {prefactor * err:.3g}")
    return 1.0 + prefactor * val


def siro_integrand(p: QueueParams, s: float, z: float) -> float:
    """Phi(s, z) * Psi(s, z), the raw outer integrand (diagnostics and tests)."""
    f = _SiroIntegrand(p, s)
    return f.phi(z) * f.psi(z)


def step_transform(d: StepDensity, s: float) -> float:
    """Closed-form Laplace transform of the continuous (step) part of ``d``."""
    if s <= 0:
        raise DomainError(f"transform variable must be > 0, got {s!r}")
    j = np.arange(len(d.cells))
    # cells * (e^{-j a s} - e^{-(j+1) a s}) / s, written with expm1 for small a s
    terms = np.asarray(d.cells) * np.exp(-j * d.a * s) * (-np.expm1(-d.a * s)) / s
    return float(terms.sum())


@dataclass(frozen=True)
class VerifyReport:
    s: list = field(default_factory=list)
    g: list = field(default_factory=list)
    f_alt: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return max(self.errors) if self.errors else 0.0


def verify_g_equals_falt(p: QueueParams, cells, s_grid) -> VerifyReport:
    """Compare the step-density transform against the SIRO transform's non-atom part.

    ``cells`` is either a :class:`StepDensity` or a cell count ``J`` (computed
    with the default Burke truncations).
    """
    require_law(p, ServiceLaw.DETERMINISTIC, "G(s) vs F_alt(s) check")
    if isinstance(cells, StepDensity):
        d = cells
    else:
        from .siro_md1 import siro_cell_densities
        d = siro_cell_densities(p, int(cells))
    s_grid = [float(s) for s in s_grid]
    if not s_grid:
        return VerifyReport()

    def one(s):
        return step_transform(d, s), siro_transform(p, s) - (1.0 - p.rho)

    with ThreadPoolExecutor(max_workers=min(max_workers(), len(s_grid))) as ex:
        pairs = list(ex.map(one, s_grid))
    g = [x for x, _ in pairs]
    fa = [y for _, y in pairs]
    return VerifyReport(s=s_grid, g=g, f_alt=fa, errors=[abs(x - y) for x, y in pairs])
