"""Special functions: principal Lambert W, Borel pmf, modified Bessel I1."""

from __future__ import annotations

import math

from .errors import DomainError

_INV_E = math.exp(-1.0)
_EPS = 2.220446049250313e-16


def _branch_point_series(p: float) -> float:
    # W0 near -1/e in powers of p = sqrt(2(e*x + 1)).
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0
        + p * (769.0 / 17280.0 + p * (-221.0 / 8505.0))))))


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for real ``x >= -1/e``.

    Halley iteration from a region-dependent starting guess. Arguments a few
    ulps below ``-1/e`` (rounding of ``-exp(-1)`` itself) are clamped to the
    branch point; anything further left raises :class:`DomainError`.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("lambert_w0 of NaN")
    if x < -_INV_E:
        if x < -_INV_E * (1.0 + 4 * _EPS):
            raise DomainError(f"lambert_w0 undefined below -1/e, got {x!r}")
        return -1.0
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf

    q = math.e * x + 1.0
    if x < -0.25:
        p = math.sqrt(max(2.0 * q, 0.0))
        w = _branch_point_series(p)
        if p < 1e-3:
            # Series error is O(p^7) here; Halley is ill-conditioned at w=-1.
            return w
    elif x > math.e:
        lx = math.log(x)
        w = lx - math.log(lx)
    else:
        w = x / (1.0 + x)

    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        dw = f / denom
        w -= dw
        if abs(dw) <= 4 * _EPS * (1.0 + abs(w)):
            break
    return w


def log_borel_pmf(k: int, rho: float) -> float:
    if k < 1 or int(k) != k:
        raise DomainError(f"Borel index must be a positive integer, got {k!r}")
    if not 0.0 < rho < 1.0:
        raise DomainError(f"Borel load must lie in (0, 1), got {rho!r}")
    return -k * rho + (k - 1) * math.log(k * rho) - math.lgamma(k + 1)


def borel_pmf(k: int, rho: float) -> float:
    """P(busy period serves exactly ``k`` customers) = e^{-k rho}(k rho)^{k-1}/k!."""
    return math.exp(log_borel_pmf(k, rho))


def borel_terms(rho: float, tol: float = 1e-16, min_terms: int = 50, max_terms: int = 1_000_000):
    """Borel probabilities for k = 1, 2, ... until a term drops below ``tol``.

    At least ``min_terms`` terms are returned so the geometric tail is
    already established before stopping.
    """
    out = []
    for k in range(1, max_terms + 1):
        t = borel_pmf(k, rho)
        out.append(t)
        if k >= min_terms and t < tol:
            break
    return out


# I1 power series is used up to this argument, the asymptotic form beyond.
_I1_SWITCH = 30.0


def _i1_series(x: float) -> float:
    half = 0.5 * x
    term = half
    total = term
    q = half * half
    m = 0
    while True:
        m += 1
        term *= q / (m * (m + 1))
        total += term
        if term <= total * 1e-17:
            return total


def _i1e_asymptotic(x: float) -> float:
    # e^{-x} I1(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k / x^k, nu = 1.
    total = 1.0
    term = 1.0
    for k in range(1, 60):
        term *= -(4.0 - (2 * k - 1) ** 2) / (8.0 * k * x)
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total / math.sqrt(2.0 * math.pi * x)


def bessel_i1(x: float) -> float:
    """Modified Bessel function of the first kind, order one, for ``x >= 0``."""
    x = float(x)
    if x < 0:
        raise DomainError(f"bessel_i1 implemented for x >= 0, got {x!r}")
    if x <= _I1_SWITCH:
        return _i1_series(x)
    if x > 700.0:
        # exp(x) alone would overflow; combine in log space.
        return math.exp(x + math.log(_i1e_asymptotic(x)))
    return math.exp(x) * _i1e_asymptotic(x)


def bessel_i1e(x: float) -> float:
    """Exponentially scaled ``exp(-x) * I1(x)``; finite for every ``x >= 0``."""
    x = float(x)
    if x < 0:
        raise DomainError(f"bessel_i1e implemented for x >= 0, got {x!r}")
    if x <= _I1_SWITCH:
        return math.exp(-x) * _i1_series(x)
    return _i1e_asymptotic(x)
