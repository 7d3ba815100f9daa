"""M/D/1-SIRO waiting times from Burke's recursions.

Everything below ``siro_cell_densities`` works in Burke units: service time 1,
arrival rate ``lambda_b = rho``. Cell densities are rescaled to the caller's
time units at the end (density scales by ``mu``, cell width becomes ``a``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import stats

from .errors import DomainError, PrecisionError, ShapeError
from .params import (Discipline, MomentSummary, QueueParams, ServiceLaw,
                     ServiceMoments, require_law)

DEFAULT_N = 80
DEFAULT_M = 60
POISSON_TAIL_TOL = 1e-14
M_CONVERGENCE_TOL = 1e-6


def _check_lambda(lambda_b: float) -> float:
    lambda_b = float(lambda_b)
    if not 0.0 < lambda_b < 1.0:
        raise DomainError(f"Burke arrival rate must lie in (0, 1), got {lambda_b!r}")
    return lambda_b


def _p_vector_double(lam: float, N: int) -> np.ndarray:
    el = math.exp(lam)
    # pw[j] = lam^j / j!
    pw = [1.0]
    for j in range(1, N + 1):
        pw.append(pw[-1] * lam / j)
    P = [1.0 - lam]
    P.append(P[0] * el - P[0])
    for n in range(2, N + 1):
        # Kahan-compensated accumulation of the subtracted terms
        acc = (P[0] + P[1]) * pw[n - 1]
        comp = 0.0
        for j in range(2, n):
            y = P[j] * pw[n - j] - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
        P.append(P[n - 1] * el - acc)
    return np.asarray(P)


def _p_vector_mp(lam: float, N: int, dps: int) -> np.ndarray:
    with mpmath.workdps(dps):
        lm = mpmath.mpf(lam)
        el = mpmath.exp(lm)
        pw = [mpmath.mpf(1)]
        for j in range(1, N + 1):
            pw.append(pw[-1] * lm / j)
        P = [1 - lm]
        P.append(P[0] * el - P[0])
        for n in range(2, N + 1):
            acc = (P[0] + P[1]) * pw[n - 1]
            for j in range(2, n):
                acc += P[j] * pw[n - j]
            P.append(P[n - 1] * el - acc)
        return np.array([float(v) for v in P])


def burke_p_vector(lambda_b: float, N: int, precision: str = "auto") -> np.ndarray:
    """Stationary queue-length probabilities P_0..P_N of the M/D/1 queue (service time 1).

    ``precision`` is ``"double"``, ``"extended"`` or ``"auto"``. Double
    precision keeps an absolute error near 1e-16 but relative accuracy is
    lost deep in the tail. ``auto`` starts in double precision and falls back
    to multiprecision when the result goes visibly negative; ``double``
    raises :class:`PrecisionError` instead.
    """
    lam = _check_lambda(lambda_b)
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N!r}")
    if precision not in ("auto", "double", "extended"):
        raise DomainError(f"unknown precision mode {precision!r}")

    if precision != "extended":
        P = _p_vector_double(lam, N)
        if P.min() >= -1e-6:
            return P
        if precision == "double":
            raise PrecisionError(
                f"P_n recursion went negative ({P.min():.3g}); use precision='extended'")
    # Enough digits that the final subtraction still leaves ~20 significant ones.
    dps = 30 + int(math.ceil(N * (lam - math.log(lam)) / math.log(10.0)))
    return _p_vector_mp(lam, N, dps)


def _poisson_weights(lam: float, m: int) -> np.ndarray:
    return stats.poisson.pmf(np.arange(m + 1), lam)


def burke_q_table(lambda_b: float, I_max: int, N: int, m: int) -> np.ndarray:
    """Table ``Q[i, n]`` for ``0 <= i <= I_max`` and ``0 <= n <= N``.

    Column ``n = 0`` is identically zero. Reads of ``Q[i-1, n+k-1]`` past
    ``N`` are taken as zero.
    """
    lam = _check_lambda(lambda_b)
    if I_max < 0 or N < 1 or m < 0:
        raise DomainError(f"invalid bounds I_max={I_max}, N={N}, m={m}")
    w = _poisson_weights(lam, m)
    # T[n, r] = w[r - n + 1] for 0 <= r - n + 1 <= m and 1 <= r <= N.
    n_idx = np.arange(N + 1)[:, None]
    r_idx = np.arange(N + 1)[None, :]
    k = r_idx - n_idx + 1
    T = np.where((k >= 0) & (k <= m) & (r_idx >= 1), w[np.clip(k, 0, m)], 0.0)
    scale = np.zeros(N + 1)
    scale[1:] = 1.0 - 1.0 / np.arange(1, N + 1)

    Q = np.zeros((I_max + 1, N + 1))
    Q[0, 1:] = 1.0 / np.arange(1, N + 1)
    for i in range(1, I_max + 1):
        Q[i] = scale * (T @ Q[i - 1])
    return Q


@dataclass(frozen=True)
class BurkeState:
    lambda_b: float
    p: np.ndarray
    q: np.ndarray
    m: int
    N: int

    @classmethod
    def build(cls, lambda_b: float, I_max: int, N: int = DEFAULT_N, m: int = DEFAULT_M):
        p = burke_p_vector(lambda_b, N)
        q = burke_q_table(lambda_b, I_max, N, m)
        p.setflags(write=False)
        q.setflags(write=False)
        return cls(float(lambda_b), p, q, m, N)

    @property
    def i_max(self) -> int:
        return self.q.shape[0] - 1

    def interval_masses(self) -> np.ndarray:
        """H(i+1) - H(i) for i = 0..I_max."""
        # sum_{n>=1} P_{n-1} Q_i(n)
        return self.lambda_b * (self.q[:, 1:] @ self.p[: self.N])

    def cdf(self, t: float) -> float:
        if t < 0:
            raise DomainError(f"waiting time must be >= 0, got {t!r}")
        whole = int(math.floor(t))
        if whole > self.i_max:
            raise DomainError(f"t={t} beyond tabulated range I_max={self.i_max}")
        inc = self.interval_masses()
        frac = t - whole
        upper = inc[whole] * frac if frac > 0 else 0.0
        return (1.0 - self.lambda_b) + float(inc[:whole].sum()) + upper


def siro_cdf(lambda_b: float, t: float, m: int = DEFAULT_M, N: int = DEFAULT_N) -> float:
    """Burke's H(t, m): P(wait <= t) in units of one service time."""
    if t < 0:
        raise DomainError(f"waiting time must be >= 0, got {t!r}")
    return BurkeState.build(lambda_b, int(math.floor(t)), N, m).cdf(t)


@dataclass(frozen=True)
class StepDensity:
    """Atom at zero plus constant densities ``cells[j]`` on ``[j a, (j+1) a)``."""

    atom_mass: float
    a: float
    cells: np.ndarray

    @property
    def edges(self) -> np.ndarray:
        return self.a * np.arange(len(self.cells) + 1)

    def pdf(self, x: float) -> float:
        if x <= 0:
            raise DomainError("continuous part is defined for x > 0")
        j = int(math.floor(x / self.a))
        return float(self.cells[j]) if j < len(self.cells) else 0.0

    def mass(self) -> float:
        return self.atom_mass + self.a * float(np.sum(self.cells))

    def moments(self) -> tuple[float, float]:
        """Mean and variance of the (truncated) step distribution."""
        lo, hi = self.edges[:-1], self.edges[1:]
        m1 = float(np.sum(self.cells * (hi**2 - lo**2) / 2.0))
        m2 = float(np.sum(self.cells * (hi**3 - lo**3) / 3.0))
        return m1, m2 - m1**2

    def bin_averages(self, edges) -> np.ndarray:
        edges = np.asarray(edges, dtype=float)
        own = self.edges
        n = len(edges) - 1
        if n > len(self.cells) or not np.allclose(edges, own[: n + 1], rtol=0, atol=1e-12 * self.a):
            raise ShapeError("bins must coincide with the leading cells of the step density")
        return np.asarray(self.cells[:n], dtype=float)


def _cells_burke(lambda_b: float, J: int, N: int, m: int) -> np.ndarray:
    return BurkeState.build(lambda_b, J - 1, N, m).interval_masses()


def siro_cell_densities(p: QueueParams, J: int, m: int = DEFAULT_M, N: int = DEFAULT_N,
                        check_convergence: bool = True) -> StepDensity:
    """Piecewise-constant M/D/1-SIRO density on the first ``J`` cells of width ``a``.

    Raises :class:`PrecisionError` if the Poisson truncation ``m`` discards
    noticeable mass, or if raising ``m`` by 10 moves any cell by more than 1e-6.
    """
    require_law(p, ServiceLaw.DETERMINISTIC, "M/D/1-SIRO cell densities")
    if J < 1:
        raise DomainError(f"need at least one cell, got J={J}")
    lam_b = p.rho
    tail = stats.poisson.sf(m, lam_b)
    if tail >= POISSON_TAIL_TOL:
        raise PrecisionError(f"Poisson truncation m={m} leaves tail mass {tail:.3g}")
    cells = _cells_burke(lam_b, J, N, m)
    if check_convergence:
        ref = _cells_burke(lam_b, J, N, m + 10)
        drift = float(np.max(np.abs(ref - cells)))
        if drift > M_CONVERGENCE_TOL:
            raise PrecisionError(f"cells not converged in m: drift {drift:.3g}")
    cells = p.mu * cells
    cells.setflags(write=False)
    return StepDensity(atom_mass=1.0 - p.rho, a=p.a, cells=cells)


def siro_moments(p: QueueParams, m: ServiceMoments) -> MomentSummary:
    lam, rho = p.lam, p.rho
    mean = lam * m.xi / (2.0 * (1.0 - rho))
    var = (2.0 * lam * m.eta / (3.0 * (1.0 - rho) * (2.0 - rho))
           + lam**2 * m.xi**2 * (2.0 + rho) / (4.0 * (1.0 - rho) ** 2 * (2.0 - rho)))
    return MomentSummary(Discipline.SIRO, p.law, mean, var, m.xi, m.eta)
