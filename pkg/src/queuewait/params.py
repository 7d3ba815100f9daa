"""Queue parameters and service-time moments."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import DomainError

# Loads this close to 1 make the geometric series downstream useless.
RHO_MAX = 1.0 - 1e-12


class ServiceLaw(enum.Enum):
    DETERMINISTIC = "det"
    EXPONENTIAL = "exp"

    @classmethod
    def coerce(cls, value) -> "ServiceLaw":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "det": cls.DETERMINISTIC,
            "d": cls.DETERMINISTIC,
            "deterministic": cls.DETERMINISTIC,
            "exp": cls.EXPONENTIAL,
            "m": cls.EXPONENTIAL,
            "exponential": cls.EXPONENTIAL,
        }
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown service law {value!r}") from None


class Discipline(enum.Enum):
    FIFO = "fifo"
    LIFO = "lifo"
    SIRO = "siro"

    @classmethod
    def coerce(cls, value) -> "Discipline":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DomainError(f"unknown discipline {value!r}") from None


@dataclass(frozen=True)
class QueueParams:
    """Single-server queue with Poisson arrivals.

    ``lam`` is the arrival rate and ``mu`` the service rate; ``rho`` and the
    mean service time ``a`` are derived once at construction.
    """

    lam: float
    mu: float
    law: ServiceLaw = ServiceLaw.DETERMINISTIC
    rho: float = field(init=False)
    a: float = field(init=False)

    def __post_init__(self):
        lam, mu = float(self.lam), float(self.mu)
        if not (math.isfinite(lam) and math.isfinite(mu)) or lam <= 0 or mu <= 0:
            raise DomainError(f"rates must be positive and finite, got lam={lam}, mu={mu}")
        rho = lam / mu
        if rho >= RHO_MAX:
            raise DomainError(f"load rho={rho:.6g} >= 1: no equilibrium")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "law", ServiceLaw.coerce(self.law))
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "a", 1.0 / mu)

    @property
    def deterministic(self) -> bool:
        return self.law is ServiceLaw.DETERMINISTIC


@dataclass(frozen=True)
class ServiceMoments:
    xi: float   # E[S^2]
    eta: float  # E[S^3]


@dataclass(frozen=True)
class MomentSummary:
    discipline: Discipline
    law: ServiceLaw
    mean: float
    variance: float
    xi: float
    eta: float


def make_params(lam: float, mu: float, law="det") -> QueueParams:
    """Validated :class:`QueueParams`; raises DomainError when rho >= 1."""
    return QueueParams(lam, mu, ServiceLaw.coerce(law))


def service_moments(p: QueueParams) -> ServiceMoments:
    if p.law is ServiceLaw.DETERMINISTIC:
        return ServiceMoments(xi=p.a**2, eta=p.a**3)
    return ServiceMoments(xi=2.0 / p.mu**2, eta=6.0 / p.mu**3)


def require_law(p: QueueParams, law: ServiceLaw, what: str) -> None:
    if p.law is not law:
        raise DomainError(f"{what} requires {law.name.lower()} service, got {p.law.name.lower()}")
