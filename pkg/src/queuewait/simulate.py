"""Discrete-event simulation of a single-server queue with Poisson arrivals.

The server picks the next customer at each completion: oldest (FIFO), newest
(LIFO) or uniformly at random (SIRO). Standard errors come from batch means
over consecutive arrivals, so autocorrelated waits are handled honestly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError
from .params import Discipline, QueueParams, ServiceLaw

ATOM_EPS = 1e-12
DEFAULT_WARMUP = 10_000
DEFAULT_BATCHES = 50


@dataclass(frozen=True)
class SimConfig:
    params: QueueParams
    discipline: Discipline
    n_customers: int
    warmup: int = DEFAULT_WARMUP
    seed: int = 0
    bin_width: float | None = None  # defaults to the mean service time
    x_max: float = 3.0
    n_batches: int = DEFAULT_BATCHES

    def __post_init__(self):
        object.__setattr__(self, "discipline", Discipline.coerce(self.discipline))
        if self.bin_width is None:
            object.__setattr__(self, "bin_width", self.params.a)
        if not self.n_customers > self.warmup >= 0:
            raise ConfigError(f"need n_customers > warmup >= 0, got {self.n_customers}, {self.warmup}")
        if not (self.bin_width > 0 and math.isfinite(self.bin_width)):
            raise ConfigError(f"bin width must be positive, got {self.bin_width}")
        if not self.x_max > 0:
            raise ConfigError(f"histogram range must be positive, got {self.x_max}")
        if self.n_batches < 2 or self.n_batches > self.n_customers - self.warmup:
            raise ConfigError(f"invalid batch count {self.n_batches}")

    @property
    def edges(self) -> np.ndarray:
        n_bins = int(math.floor(self.x_max / self.bin_width + 1e-9))
        if n_bins < 1:
            raise ConfigError("histogram range shorter than one bin")
        return self.bin_width * np.arange(n_bins + 1)


def _se(batch_values: np.ndarray) -> np.ndarray:
    b = batch_values.shape[0]
    return np.std(batch_values, axis=0, ddof=1) / math.sqrt(b)


@dataclass(frozen=True)
class SimResult:
    """Per-batch sufficient statistics; estimates and errors are derived.

    Results from independent runs with the same bin layout merge by
    concatenating batches (:meth:`merge`).
    """

    edges: np.ndarray
    batch_size: np.ndarray      # customers per batch
    batch_atom: np.ndarray      # fraction of zero waits
    batch_m1: np.ndarray        # mean wait
    batch_m2: np.ndarray        # mean squared wait
    batch_hist: np.ndarray      # (batches, bins) density estimates
    batch_util: np.ndarray      # server busy fraction per time window
    meta: dict = field(default_factory=dict)

    @property
    def n_effective(self) -> int:
        return int(self.batch_size.sum())

    def _weighted(self, v):
        w = self.batch_size / self.batch_size.sum()
        return np.tensordot(w, v, axes=1)

    @property
    def atom_fraction(self) -> float:
        return float(self._weighted(self.batch_atom))

    @property
    def atom_se(self) -> float:
        return float(_se(self.batch_atom))

    @property
    def mean(self) -> float:
        return float(self._weighted(self.batch_m1))

    @property
    def mean_se(self) -> float:
        return float(_se(self.batch_m1))

    @property
    def variance(self) -> float:
        return float(self._weighted(self.batch_m2)) - self.mean**2

    @property
    def variance_se(self) -> float:
        return float(_se(self.batch_m2 - self.batch_m1**2))

    @property
    def density(self) -> np.ndarray:
        return self._weighted(self.batch_hist)

    @property
    def density_se(self) -> np.ndarray:
        return _se(self.batch_hist)

    @property
    def utilization(self) -> float:
        return float(np.mean(self.batch_util))

    @property
    def utilization_se(self) -> float:
        return float(_se(self.batch_util))

    @classmethod
    def merge(cls, results) -> "SimResult":
        results = list(results)
        if not results:
            raise ValueError("nothing to merge")
        edges = results[0].edges
        for r in results[1:]:
            if r.edges.shape != edges.shape or not np.allclose(r.edges, edges):
                raise ShapeError("cannot merge results with different bins")
        cat = lambda name: np.concatenate([getattr(r, name) for r in results])  # noqa: E731
        return cls(edges, cat("batch_size"), cat("batch_atom"), cat("batch_m1"), cat("batch_m2"),
                   cat("batch_hist"), cat("batch_util"),
                   {"merged": [r.meta for r in results]})

    def to_dict(self) -> dict:
        return {
            "n_effective": self.n_effective,
            "atom_fraction": self.atom_fraction,
            "atom_se": self.atom_se,
            "mean": self.mean,
            "mean_se": self.mean_se,
            "variance": self.variance,
            "variance_se": self.variance_se,
            "utilization": self.utilization,
            "utilization_se": self.utilization_se,
            "histogram": {
                "edges": self.edges.tolist(),
                "density": self.density.tolist(),
                "se": self.density_se.tolist(),
            },
        }


def _simulate_waits(arrivals: list, services: list, discipline: Discipline, picks: np.ndarray):
    """Return (waits, starts) of every customer, indexed by arrival order."""
    total = len(arrivals)
    waits = [0.0] * total
    starts = [0.0] * total
    pool = []
    append, pop = pool.append, pool.pop
    i = 0
    served = 0
    free_at = 0.0
    pick_i = 0
    lifo = discipline is Discipline.LIFO
    siro = discipline is Discipline.SIRO
    fifo_head = 0  # FIFO: pool is arrival-ordered, consume from the front

    while served < total:
        while i < total and arrivals[i] <= free_at:
            append(i)
            i += 1
        if fifo_head < len(pool):
            if lifo:
                j = pop()
            elif siro:
                n_wait = len(pool)
                k = int(picks[pick_i] * n_wait)
                pick_i += 1
                j = pool[k]
                pool[k] = pool[-1]
                pop()
            else:
                j = pool[fifo_head]
                fifo_head += 1
                if fifo_head > 4096 and fifo_head * 2 > len(pool):
                    del pool[:fifo_head]
                    fifo_head = 0
            start = free_at
        else:
            if fifo_head:
                del pool[:fifo_head]
                fifo_head = 0
            j = i
            i += 1
            start = arrivals[j]
        waits[j] = start - arrivals[j]
        starts[j] = start
        free_at = start + services[j]
        served += 1
    return np.asarray(waits), np.asarray(starts)


def run_sim(cfg: SimConfig) -> SimResult:
    """Simulate ``cfg.n_customers`` arrivals and summarise waits after the warmup.

    A buffer of extra arrivals keeps the queue loaded past the last recorded
    customer, so no recorded wait is shortened by the end of input.
    """
    p = cfg.params
    edges = cfg.edges
    n = cfg.n_customers
    extra = max(1000, n // 50)
    total = n + extra

    arr_ss, svc_ss, pick_ss = np.random.SeedSequence(cfg.seed).spawn(3)
    arrivals = np.cumsum(np.random.Generator(np.random.PCG64(arr_ss)).exponential(1.0 / p.lam, total))
    if p.law is ServiceLaw.DETERMINISTIC:
        services = np.full(total, p.a)
    else:
        services = np.random.Generator(np.random.PCG64(svc_ss)).exponential(p.a, total)
    picks = np.random.Generator(np.random.PCG64(pick_ss)).random(total)

    waits, starts = _simulate_waits(arrivals.tolist(), services.tolist(), cfg.discipline, picks)

    rec = waits[cfg.warmup:n]
    B = cfg.n_batches
    bounds = np.linspace(0, len(rec), B + 1).astype(int)
    width = np.diff(edges)
    sizes, atom, m1, m2, hist, util = [], [], [], [], [], []

    # utilization over time windows aligned with the arrival batches
    t_bounds = arrivals[cfg.warmup:n][np.minimum(bounds, len(rec) - 1)]
    t_bounds[-1] = arrivals[n - 1]
    all_start, all_end = starts, starts + services

    for b in range(B):
        w = rec[bounds[b]:bounds[b + 1]]
        sizes.append(len(w))
        zero = w < ATOM_EPS
        atom.append(zero.mean())
        m1.append(w.mean())
        m2.append(np.mean(w * w))
        counts, _ = np.histogram(w[~zero], bins=edges)
        hist.append(counts / (len(w) * width))
        lo, hi = t_bounds[b], t_bounds[b + 1]
        busy = np.clip(np.minimum(all_end, hi) - np.maximum(all_start, lo), 0.0, None).sum()
        util.append(busy / (hi - lo))

    meta = {
        "lambda": p.lam, "mu": p.mu, "law": p.law.value,
        "discipline": cfg.discipline.value, "n_customers": n, "warmup": cfg.warmup,
        "seed": cfg.seed, "bin_width": cfg.bin_width, "x_max": cfg.x_max, "n_batches": B,
    }
    return SimResult(edges, np.asarray(sizes), np.asarray(atom), np.asarray(m1), np.asarray(m2),
                     np.asarray(hist), np.asarray(util), meta)


@dataclass(frozen=True)
class DeviationReport:
    z: np.ndarray
    analytic: np.ndarray
    simulated: np.ndarray
    se: np.ndarray

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z))) if self.z.size else 0.0


def z_scores(sim: np.ndarray, target: np.ndarray, se: np.ndarray) -> np.ndarray:
    sim, target, se = (np.asarray(v, dtype=float) for v in (sim, target, se))
    diff = sim - target
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff == 0, 0.0, np.inf))
    return z


def compare_to_analytic(r: SimResult, analytic) -> DeviationReport:
    """Per-bin z-scores of the simulated histogram against an analytic density.

    ``analytic`` is anything with ``bin_averages(edges)`` (the density classes
    in this package) or an array of per-bin densities.
    """
    if hasattr(analytic, "bin_averages"):
        target = np.asarray(analytic.bin_averages(r.edges), dtype=float)
    else:
        target = np.asarray(analytic, dtype=float)
    if target.shape != r.density.shape:
        raise ShapeError(f"analytic bins {target.shape} vs simulated {r.density.shape}")
    return DeviationReport(z_scores(r.density, target, r.density_se), target, r.density, r.density_se)
