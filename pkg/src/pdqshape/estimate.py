"""Empirical pdQs from data.

Two estimators are provided.  For samples with many ties (counts, rounded
measurements) the step form puts height ``n n_m / sum(n_m**2)`` on the
stretch ``(c_{m-1}, c_m]`` of cumulative proportions belonging to the m-th
distinct value.  For smooth data the quantile density ``q = Q'`` is estimated
by an Epanechnikov kernel over the order statistics and the pdQ is its
normalized reciprocal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import NonPositiveQuantileDensity
from .grid import GridDensity, edges, midpoints

__all__ = [
    "EmpiricalSample",
    "BandwidthRule",
    "empirical_pdq_discrete",
    "kernel_quantile_density",
    "empirical_pdq_smooth",
    "default_rule",
    "SMOOTH_M",
]

SMOOTH_M = 100
U_MIN, U_MAX = 0.005, 0.995
MIN_N_WARN = 500
WIDEN_FACTOR = 1.5
MAX_WIDEN = 5


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    """Sorted real observations, possibly with ties."""

    values: np.ndarray
    ties_allowed: bool = True

    def __post_init__(self):
        x = np.sort(np.asarray(self.values, dtype=float).ravel())
        if x.size < 1:
            raise ValueError("sample is empty")
        if not np.all(np.isfinite(x)):
            raise ValueError("sample contains non-finite values")
        if not self.ties_allowed and np.any(np.diff(x) == 0):
            raise ValueError("sample has ties but ties_allowed is False")
        x.setflags(write=False)
        object.__setattr__(self, "values", x)

    @classmethod
    def from_values(cls, values) -> EmpiricalSample:
        return cls(values)

    @classmethod
    def from_frequencies(cls, values, counts) -> EmpiricalSample:
        counts = np.asarray(counts)
        if np.any(counts < 0) or np.any(counts != np.round(counts)):
            raise ValueError("counts must be non-negative integers")
        return cls(np.repeat(np.asarray(values, dtype=float), counts.astype(int)))

    @property
    def n(self) -> int:
        return self.values.size

    def distinct(self):
        """Distinct values and their counts."""
        return np.unique(self.values, return_counts=True)

    def affine(self, a: float, b: float) -> EmpiricalSample:
        """The sample ``a + b x``."""
        return EmpiricalSample(a + b * self.values, self.ties_allowed)


def empirical_pdq_discrete(s: EmpiricalSample, m: int = 1000) -> GridDensity:
    """Step-function empirical pdQ, averaged exactly over ``m`` cells.

    Examples
    --------
    >>> g = empirical_pdq_discrete(EmpiricalSample([0.0, 0.0, 1.0]), m=3)
    >>> np.round(g.values, 12).tolist()
    [1.2, 1.2, 0.6]
    """
    _, counts = s.distinct()
    counts = counts.astype(float)
    n = counts.sum()
    c = np.concatenate([[0.0], np.cumsum(counts) / n])
    c[-1] = 1.0
    # step heights n n_m / sum n_m^2 times widths n_m / n
    area = np.concatenate([[0.0], np.cumsum(counts ** 2)]) / np.sum(counts ** 2)
    area[-1] = 1.0
    return GridDensity(np.diff(np.interp(edges(m), c, area)) * m)


# --- kernel quantile density -------------------------------------------------------

def _cauchy_ratio(u):
    # Q(u) = tan(pi (u - 1/2))
    return np.sin(np.pi * u) ** 2 / (2 * np.pi ** 2 * (2 * np.cos(np.pi * u) ** 2 + 1))


def _lognormal_ratio(u):
    # Q(u) = exp(z_u)
    z = special.ndtri(u)
    phi = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    return phi ** 2 / (2 * z * z + 3 * z + 2)


_RATIOS = {"cauchy": _cauchy_ratio, "lognormal": _lognormal_ratio}


@dataclass(frozen=True)
class BandwidthRule:
    """Reference-family bandwidth ``b(u) = (15/n)^(1/5) |q/q''|^(2/5)``.

    ``q/q''`` is the ratio for the reference quantile function.  The result
    is clipped to ``[1/n, 0.25]`` and then to ``min(u, 1 - u)`` so the kernel
    window never leaves the unit interval.
    """

    reference_family: str
    n: int

    def __post_init__(self):
        if self.reference_family not in _RATIOS:
            raise ValueError(f"reference_family must be one of {sorted(_RATIOS)}")
        if self.n < 1:
            raise ValueError("n must be positive")

    def ratio(self, u):
        return _RATIOS[self.reference_family](np.asarray(u, dtype=float))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        b = (15.0 / self.n) ** 0.2 * np.abs(self.ratio(u)) ** 0.4
        b = np.clip(b, 1.0 / self.n, 0.25)
        return np.minimum(b, np.minimum(u, 1 - u))


def default_rule(s: EmpiricalSample) -> BandwidthRule:
    """Lognormal reference for positive data, Cauchy otherwise."""
    return BandwidthRule("lognormal" if s.values[0] > 0 else "cauchy", s.n)


def _epanechnikov(t):
    return np.where(np.abs(t) < 1, 0.75 * (1 - t * t), 0.0)


def _qhat(x, u, b):
    # sum_i X_(i) {k_b(u - (i-1)/n) - k_b(u - i/n)} summed by parts: the
    # boundary terms vanish because b <= min(u, 1 - u)
    n = x.size
    spacings = np.diff(x)
    i = np.arange(1, n) / n
    t = (u[:, None] - i[None, :]) / b[:, None]
    return (_epanechnikov(t) @ spacings) / b


def kernel_quantile_density(s: EmpiricalSample, rule: BandwidthRule, u) -> np.ndarray:
    """Kernel estimate of the quantile density ``q(u)`` at points ``u``.

    Raises
    ------
    NonPositiveQuantileDensity
        If the estimate is not positive at some ``u``.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    q = _qhat(s.values, u, rule(u))
    bad = ~(q > 0)
    if np.any(bad):
        raise NonPositiveQuantileDensity(
            f"quantile density estimate is not positive at u={u[bad][0]:.6g}",
            u=float(u[bad][0]))
    return q


def empirical_pdq_smooth(s: EmpiricalSample, rule: BandwidthRule | None = None,
                         m: int = SMOOTH_M) -> GridDensity:
    """Kernel empirical pdQ ``1 / (kappa_hat q_hat(u))`` on ``m`` cells.

    The cell midpoints are clipped to ``[0.005, 0.995]``.  Where ``q_hat`` is
    not positive the bandwidth is widened by a factor 1.5, at most five
    times, before :class:`NonPositiveQuantileDensity` is raised.
    """
    if rule is None:
        rule = default_rule(s)
    if s.n < MIN_N_WARN:
        warnings.warn(f"kernel pdQ estimates need n >= {MIN_N_WARN} for reliable shape "
                      f"(got n={s.n})", stacklevel=2)
    if s.values[-1] == s.values[0]:
        raise NonPositiveQuantileDensity("sample is constant", u=0.5)
    u = np.clip(midpoints(m), U_MIN, U_MAX)
    b = rule(u)
    q = _qhat(s.values, u, b)
    for _ in range(MAX_WIDEN):
        bad = ~(q > 0)
        if not np.any(bad):
            break
        b = np.where(bad, np.minimum(b * WIDEN_FACTOR, 0.5), b)
        q[bad] = _qhat(s.values, u[bad], b[bad])
    bad = ~(q > 0)
    if np.any(bad):
        raise NonPositiveQuantileDensity(
            f"quantile density estimate is not positive at u={u[bad][0]:.6g} "
            f"after widening the bandwidth {MAX_WIDEN} times", u=float(u[bad][0]))
    return GridDensity.from_unnormalized(1.0 / q)
