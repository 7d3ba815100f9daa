"""Equilibrium waiting times of M/D/1 and M/M/1 queues under FIFO, LIFO and SIRO."""

from .errors import (ConfigError, DomainError, PrecisionError, QuadratureError,
                     QueueWaitError, ShapeError)
from .lifo_md1 import (PiecewiseAnalyticDensity, fifo_moments, lifo_cdf, lifo_density,
                       lifo_distribution, lifo_moments)
from .mm1 import (mm1_distribution, mm1_fifo_density, mm1_lifo_density, mm1_siro_density,
                  mm1_siro_raw_moment, ordering_check, psi)
from .params import (Discipline, MomentSummary, QueueParams, ServiceLaw, ServiceMoments,
                     make_params, service_moments)
from .siro_md1 import (BurkeState, StepDensity, burke_p_vector, burke_q_table, siro_cdf,
                       siro_cell_densities, siro_moments)
from .simulate import SimConfig, SimResult, compare_to_analytic, run_sim
from .special import bessel_i1, bessel_i1e, borel_pmf, lambert_w0
from .transforms import (lifo_transform, siro_transform, step_transform, theta,
                         verify_g_equals_falt)

__version__ = "0.1.0"

__all__ = [
    "BurkeState", "ConfigError", "Discipline", "DomainError", "MomentSummary",
    "PiecewiseAnalyticDensity", "PrecisionError", "QuadratureError", "QueueParams",
    "QueueWaitError", "ServiceLaw", "ServiceMoments", "ShapeError", "SimConfig", "SimResult",
    "StepDensity", "bessel_i1", "bessel_i1e", "borel_pmf", "burke_p_vector", "burke_q_table",
    "compare_to_analytic", "fifo_moments", "lambert_w0", "lifo_cdf", "lifo_density",
    "lifo_distribution", "lifo_moments", "lifo_transform", "make_params", "mm1_distribution",
    "mm1_fifo_density", "mm1_lifo_density", "mm1_siro_density", "mm1_siro_raw_moment",
    "ordering_check", "psi", "run_sim", "service_moments", "siro_cdf", "siro_cell_densities",
    "siro_moments", "siro_transform", "step_transform", "theta", "verify_g_equals_falt",
]
