"""Fitting one-parameter shape families to data.

Three estimators of the shape parameter are offered:

* ``hpdq``: minimize the Hellinger distance between the kernel empirical pdQ
  and the model pdQ over a two-stage grid;
* ``ppcc``: maximize the correlation between the sorted data and the model
  quantiles at plotting positions ``(i - 0.5)/n``;
* ``mle``: two-parameter maximum likelihood with location fixed at zero
  (Weibull and gamma only).

Location and scale for the first two come from regressing the sorted data
on the fitted model's quantiles.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .divergence import hellinger
from .dists import make_model, pdq
from .estimate import SMOOTH_M, EmpiricalSample, empirical_pdq_smooth
from .exceptions import (
    DegenerateRegressor,
    EmptyFeasibleGrid,
    NonConvergence,
    NonPositiveData,
    PdqError,
)
from .grid import GridDensity

__all__ = [
    "FitResult",
    "DEFAULT_GRIDS",
    "shape_grid",
    "model_pdq",
    "plotting_positions",
    "hpdq_fit",
    "ppcc_fit",
    "mle_fit_weibull",
    "mle_fit_gamma",
    "mle_fit",
    "locscale_regression",
    "fit",
]

log = logging.getLogger(__name__)

# coarse (lo, hi, step) and fine step per family
DEFAULT_GRIDS = {
    "tukey": ((-10.0, 10.0, 0.2), 0.01),
    "gamma": ((2.0, 60.0, 0.5), 0.05),
    "weibull": ((0.6, 10.0, 0.1), 0.01),
}

MLE_MAX_ITER = 200


@dataclass(frozen=True)
class FitResult:
    """Outcome of fitting a shape family.

    ``distance_h`` is the Hellinger distance between the empirical pdQ and
    the pdQ of the fitted shape.  For ``mle`` the location is fixed at 0 and
    ``scale`` is the likelihood estimate; ``regression`` always holds the
    (location, scale) obtained by regressing the sorted data on the fitted
    quantiles.
    """

    family: str
    method: str
    shape: float
    location: float
    scale: float
    distance_h: float
    objective_trace: tuple = ()
    regression: tuple | None = None

    def as_dict(self) -> dict:
        out = {
            "family": self.family,
            "method": self.method,
            "shape": self.shape,
            "location": self.location,
            "scale": self.scale,
            "distance_h": self.distance_h,
        }
        if self.regression is not None:
            out["regression_location"], out["regression_scale"] = self.regression
        return out


def shape_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid ``lo, lo + step, ..., hi`` rounded to kill drift."""
    k = int(math.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(k + 1), 10)


def _family_key(family: str) -> str:
    return str(family).strip().lower()


@functools.lru_cache(maxsize=8192)
def _cached_model_pdq(family: str, shape: float, m: int) -> GridDensity:
    return pdq(make_model(family, (shape,)), m)


def model_pdq(family: str, shape: float, m: int = SMOOTH_M) -> GridDensity:
    """Grid pdQ of a one-parameter family member (memoized)."""
    return _cached_model_pdq(_family_key(family), float(shape), int(m))


def plotting_positions(n: int) -> np.ndarray:
    return (np.arange(1, n + 1) - 0.5) / n


def _grids(family, coarse, fine_step):
    default = DEFAULT_GRIDS.get(_family_key(family))
    if coarse is None or fine_step is None:
        if default is None:
            raise ValueError(f"no default shape grid for family {family!r}")
        coarse = default[0] if coarse is None else coarse
        fine_step = default[1] if fine_step is None else fine_step
    lo, hi, step = coarse
    if not (hi > lo and step > 0 and fine_step > 0):
        raise ValueError("shape grid needs lo < hi and positive steps")
    return (float(lo), float(hi), float(step)), float(fine_step)


def _grid_search(objective, family, coarse, fine_step, maximize=False):
    """Two-stage search; returns (best shape, best value, trace)."""
    (lo, hi, step), fine_step = _grids(family, coarse, fine_step)
    trace = []
    seen = {}

    def scan(grid):
        for shape in grid:
            shape = float(shape)
            if shape in seen:
                continue
            try:
                val = float(objective(shape))
            except (PdqError, ValueError, ArithmeticError) as exc:
                log.debug("skipping shape %g: %s", shape, exc)
                val = math.nan
            if not np.isfinite(val):
                log.debug("skipping shape %g: objective %r", shape, val)
                continue
            seen[shape] = val
            trace.append((shape, val))

    def best():
        if not seen:
            raise EmptyFeasibleGrid(f"no feasible shape for {family} on [{lo}, {hi}]")
        keys = sorted(seen)
        vals = np.array([seen[k] for k in keys])
        i = int(np.argmax(vals) if maximize else np.argmin(vals))
        return keys[i]

    scan(shape_grid(lo, hi, step))
    centre = best()
    flo, fhi = max(lo, centre - step), min(hi, centre + step)
    scan(shape_grid(flo, fhi, fine_step))
    shape = best()
    return shape, seen[shape], tuple(trace)


def locscale_regression(s: EmpiricalSample, model) -> tuple[float, float]:
    """Least-squares intercept and slope of the sorted data on model quantiles.

    Examples
    --------
    >>> m = make_model("logistic")
    >>> u = plotting_positions(50)
    >>> loc, scale = locscale_regression(EmpiricalSample(3 + 2 * m.ppf(u)), m)
    >>> round(loc, 10), round(scale, 10)
    (3.0, 2.0)
    """
    q = np.asarray(model.ppf(plotting_positions(s.n)), dtype=float)
    if not np.all(np.isfinite(q)):
        raise DegenerateRegressor("model quantiles are not finite")
    qc = q - q.mean()
    sxx = float(np.dot(qc, qc))
    if not sxx > 1e-300 * max(1.0, float(np.dot(q, q))):
        raise DegenerateRegressor("model quantiles are constant")
    x = s.values
    scale = float(np.dot(qc, x - x.mean()) / sxx)
    return float(x.mean() - scale * q.mean()), scale


def _empirical(s, empirical, m, rule):
    if empirical is None:
        return empirical_pdq_smooth(s, rule, m)
    return empirical


def hpdq_fit(s: EmpiricalSample, family: str, coarse=None, fine_step=None, *,
             m: int = SMOOTH_M, rule=None, empirical: GridDensity | None = None) -> FitResult:
    """Minimum-Hellinger fit of a shape family to the kernel empirical pdQ.

    Parameters
    ----------
    s : EmpiricalSample
    family : str
        A one-parameter family such as ``"tukey"``, ``"gamma"`` or ``"weibull"``.
    coarse : (lo, hi, step), optional
        First-stage grid; the family default when omitted.
    fine_step : float, optional
        Step of the second stage, run one coarse step either side of the
        first-stage minimum.
    m, rule :
        Grid size and bandwidth rule of the empirical pdQ.
    empirical : GridDensity, optional
        Use this pdQ instead of estimating one from ``s``.
    """
    g = _empirical(s, empirical, m, rule)
    shape, h, trace = _grid_search(lambda a: hellinger(g, model_pdq(family, a, g.m)),
                                   family, coarse, fine_step)
    loc, scale = locscale_regression(s, make_model(family, (shape,)))
    return FitResult(_family_key(family), "hpdq", shape, loc, scale, h, trace, (loc, scale))


def _ppcc(x, family, shape, u):
    q = np.asarray(make_model(family, (shape,)).ppf(u), dtype=float)
    if not np.all(np.isfinite(q)) or np.ptp(q) == 0:
        return math.nan
    return float(np.corrcoef(x, q)[0, 1])


def ppcc_fit(s: EmpiricalSample, family: str, coarse=None, fine_step=None, *,
             m: int = SMOOTH_M, rule=None, empirical: GridDensity | None = None) -> FitResult:
    """Probability-plot correlation fit; the trace holds correlations."""
    if np.ptp(s.values) == 0:
        raise DegenerateRegressor("constant data have no probability-plot correlation")
    u = plotting_positions(s.n)
    shape, _, trace = _grid_search(lambda a: _ppcc(s.values, family, a, u),
                                   family, coarse, fine_step, maximize=True)
    loc, scale = locscale_regression(s, make_model(family, (shape,)))
    g = _empirical(s, empirical, m, rule)
    h = hellinger(g, model_pdq(family, shape, g.m))
    return FitResult(_family_key(family), "ppcc", shape, loc, scale, h, trace, (loc, scale))


def _positive(s):
    if not s.values[0] > 0:
        raise NonPositiveData("likelihood fits need strictly positive data")
    if np.ptp(s.values) == 0:
        raise NonConvergence("constant data: the shape estimate diverges")
    return s.values


def _weibull_mle(x):
    logx = np.log(x)
    mean_log = logx.mean()
    # rescaling x leaves the profile equation unchanged and avoids overflow
    y = logx - logx.max()

    def score(beta):
        w = np.exp(beta * y)
        sw = w.sum()
        a = np.dot(w, y) / sw
        b = np.dot(w, y * y) / sw
        return 1.0 / beta + (mean_log - logx.max()) - a, -1.0 / beta ** 2 - (b - a * a)

    # score decreases in beta; keep a bracket and fall back to bisection
    lo, hi = 1e-3, 1.0
    while score(hi)[0] > 0:
        hi *= 2
        if hi > 1e6:
            raise NonConvergence("Weibull shape estimate diverges")
    beta = 1.2 / (np.std(logx) * math.sqrt(6) / math.pi + 1e-300)
    beta = min(max(beta, lo), hi)
    for _ in range(MLE_MAX_ITER):
        g, dg = score(beta)
        if g > 0:
            lo = beta
        else:
            hi = beta
        step = beta - g / dg
        new = step if lo < step < hi else 0.5 * (lo + hi)
        if abs(new - beta) <= 1e-12 * beta:
            beta = new
            break
        beta = new
    else:
        raise NonConvergence(f"Weibull likelihood did not converge in {MLE_MAX_ITER} iterations")
    scale = float(np.mean(x ** beta) ** (1.0 / beta))
    return float(beta), scale


def _gamma_mle(x):
    target = math.log(x.mean()) - float(np.mean(np.log(x)))
    if not target > 0:
        raise NonConvergence("constant data: the shape estimate diverges")
    alpha = (3 - target + math.sqrt((target - 3) ** 2 + 24 * target)) / (12 * target)
    for _ in range(MLE_MAX_ITER):
        g = math.log(alpha) - special.digamma(alpha) - target
        dg = 1.0 / alpha - special.polygamma(1, alpha)
        new = alpha - g / dg
        if new <= 0:
            new = 0.5 * alpha
        if abs(new - alpha) <= 1e-12 * alpha:
            alpha = new
            break
        alpha = new
    else:
        raise NonConvergence(f"gamma likelihood did not converge in {MLE_MAX_ITER} iterations")
    return float(alpha), float(x.mean() / alpha)


def _mle_result(s, family, shape, scale, m, rule, empirical):
    g = _empirical(s, empirical, m, rule)
    h = hellinger(g, model_pdq(family, shape, g.m))
    reg = locscale_regression(s, make_model(family, (shape,)))
    return FitResult(family, "mle", shape, 0.0, scale, h, (), reg)


def mle_fit_weibull(s: EmpiricalSample, *, m: int = SMOOTH_M, rule=None,
                    empirical: GridDensity | None = None) -> FitResult:
    """Weibull shape and scale by profile likelihood, location fixed at 0."""
    beta, scale = _weibull_mle(_positive(s))
    return _mle_result(s, "weibull", beta, scale, m, rule, empirical)


def mle_fit_gamma(s: EmpiricalSample, *, m: int = SMOOTH_M, rule=None,
                  empirical: GridDensity | None = None) -> FitResult:
    """Gamma shape and scale by likelihood, location fixed at 0."""
    alpha, scale = _gamma_mle(_positive(s))
    return _mle_result(s, "gamma", alpha, scale, m, rule, empirical)


_MLE = {"weibull": mle_fit_weibull, "gamma": mle_fit_gamma}


def mle_fit(s: EmpiricalSample, family: str, **kwargs) -> FitResult:
    key = _family_key(family)
    if key not in _MLE:
        raise ValueError(f"no likelihood fit for family {family!r}; use weibull or gamma")
    return _MLE[key](s, **kwargs)


METHODS = ("hpdq", "ppcc", "mle")


def fit(s: EmpiricalSample, family: str, method: str = "hpdq", **kwargs) -> FitResult:
    """Dispatch to one of :data:`METHODS`."""
    if method == "hpdq":
        return hpdq_fit(s, family, **kwargs)
    if method == "ppcc":
        return ppcc_fit(s, family, **kwargs)
    if method == "mle":
        kwargs.pop("coarse", None)
        kwargs.pop("fine_step", None)
        return mle_fit(s, family, **kwargs)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
