"""Probability density quantiles: shape summaries, comparisons and fitting.

The pdQ of a distribution with density ``f`` and quantile function ``Q`` is
the density ``f(Q(u)) / kappa`` on ``(0, 1)``; it is free of location and
scale, so it isolates the shape of ``f``.
"""

__version__ = "0.1.0"

from .divergence import METRICS, hellinger, kl, sym_kl
from .dists import (
    FAMILIES,
    ContinuousModel,
    LatticeDistribution,
    lattice_pdq,
    make_lattice,
    make_model,
    pdq,
    tukey_kappa,
    tukey_kappa_approx,
)
from .estimate import (
    BandwidthRule,
    EmpiricalSample,
    empirical_pdq_discrete,
    empirical_pdq_smooth,
    kernel_quantile_density,
)
from .exceptions import PdqError
from .fit import FitResult, hpdq_fit, locscale_regression, mle_fit_gamma, mle_fit_weibull, ppcc_fit
from .grid import GridDensity
from .shape import (
    PdqMoments,
    SymmetricProjection,
    TailReport,
    classify_tail,
    closest_symmetric,
    closest_symmetric_hellinger,
    closest_symmetric_kl_a,
    closest_symmetric_kl_b,
    closest_symmetric_sym_kl,
    pdq_moments,
)
from .simulation import SimulationReport, run_simulation

__all__ = [
    "BandwidthRule",
    "ContinuousModel",
    "EmpiricalSample",
    "FAMILIES",
    "FitResult",
    "GridDensity",
    "LatticeDistribution",
    "METRICS",
    "PdqError",
    "PdqMoments",
    "SimulationReport",
    "SymmetricProjection",
    "TailReport",
    "classify_tail",
    "closest_symmetric",
    "closest_symmetric_hellinger",
    "closest_symmetric_kl_a",
    "closest_symmetric_kl_b",
    "closest_symmetric_sym_kl",
    "empirical_pdq_discrete",
    "empirical_pdq_smooth",
    "hellinger",
    "hpdq_fit",
    "kernel_quantile_density",
    "kl",
    "lattice_pdq",
    "locscale_regression",
    "make_lattice",
    "make_model",
    "mle_fit_gamma",
    "mle_fit_weibull",
    "pdq",
    "pdq_moments",
    "ppcc_fit",
    "run_simulation",
    "sym_kl",
    "tukey_kappa",
    "tukey_kappa_approx",
]
