"""Continuous and lattice distributions and their probability density quantiles.

The pdQ of a distribution with density ``f`` and quantile function ``Q`` is
``f*(u) = f(Q(u)) / kappa`` on ``(0, 1)`` with ``kappa = int f(x)**2 dx``.
It only depends on the shape of ``f``: every member of a location-scale
family has the same pdQ.

Continuous families live in a small registry and are built with
:func:`make_model`::

    >>> m = make_model("logistic")
    >>> float(m.pdq(0.5))
    1.5
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from .exceptions import NonSquareIntegrable, QuadratureFailure, UnknownFamily
from .grid import GridDensity, cell_averages, edges

__all__ = [
    "ContinuousModel",
    "FunctionModel",
    "LatticeDistribution",
    "FAMILIES",
    "make_model",
    "pdq",
    "tukey_kappa",
    "tukey_kappa_approx",
    "lattice_pdq",
    "lattice_pdq_function",
    "poisson",
    "geometric",
    "negative_binomial",
    "binomial",
    "make_lattice",
    "LATTICE_FAMILIES",
]

DEFAULT_M = 1000
LATTICE_TAIL_MASS = 1e-12

_SQRT_PI = math.sqrt(math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def _phi(z):
    return np.exp(-0.5 * np.square(z) - _LOG_SQRT_2PI)


def _quad(fn, a, b, what):
    val, err, *info = integrate.quad(fn, a, b, limit=400, epsabs=1e-13,
                                     epsrel=1e-11, full_output=1)
    if not np.isfinite(val) or (len(info) > 2 and err > 1e-7 * max(1.0, abs(val))):
        raise QuadratureFailure(f"quadrature for {what} did not converge "
                                f"(value={val!r}, error={err!r})")
    return val


def _bisect(fn, target, lo, hi, iters=200):
    """Vectorized bisection for an increasing ``fn`` on finite brackets."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        done = (mid == lo) | (mid == hi)
        if np.all(done):
            break
        below = fn(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


class ContinuousModel:
    """A location-scale family with a square-integrable density.

    Subclasses implement the standardized (``loc=0, scale=1``) hooks
    ``_pdf``, ``_cdf`` and ``_ppf`` and may override ``_isf``, ``_fq``,
    ``_kappa``, ``_pdq_closed``, ``_score`` and ``_score_prime``.  Public
    methods apply location and scale.
    """

    name = "model"
    shape_names: tuple = ()
    support = (-math.inf, math.inf)
    # decades of 1 - u over which tail limits are probed
    tail_decades = 30

    def __init__(self, *shape_params, loc=0.0, scale=1.0):
        if len(shape_params) != len(self.shape_names):
            raise ValueError(f"{self.name} takes {len(self.shape_names)} shape "
                             f"parameter(s) {self.shape_names}, got {len(shape_params)}")
        self.shape_params = tuple(float(p) for p in shape_params)
        if not all(math.isfinite(p) for p in self.shape_params):
            raise ValueError("shape parameters must be finite")
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.loc = float(loc)
        self.scale = float(scale)
        self._validate()
        k = float(self._kappa())
        if not (math.isfinite(k) and k > 0):
            raise NonSquareIntegrable(f"{self!r}: kappa={k!r} is not finite and positive")
        self._kappa_std = k

    def __repr__(self):
        args = ", ".join(repr(p) for p in self.shape_params)
        extra = ""
        if self.loc != 0.0 or self.scale != 1.0:
            extra = f"{', ' if args else ''}loc={self.loc!r}, scale={self.scale!r}"
        return f"{type(self).__name__}({args}{extra})"

    # --- standardized hooks ----------------------------------------------
    def _validate(self):
        pass

    def _pdf(self, x):
        raise NotImplementedError

    def _cdf(self, x):
        raise NotImplementedError

    def _ppf(self, u):
        return self._invert_cdf(u)

    def _isf(self, s):
        return self._ppf(1.0 - s)

    def _fq(self, u):
        return self._pdf(self._ppf(u))

    def _kappa(self):
        return _quad(lambda u: float(self._fq(np.array([u]))[0]), 0.0, 1.0,
                     f"kappa of {self!r}")

    def _pdq_closed(self, u):
        return None

    _score = None
    _score_prime = None

    def _invert_cdf(self, u):
        u = np.asarray(u, dtype=float)
        a, b = self.support
        lo = np.full(u.shape, a if math.isfinite(a) else -1.0)
        hi = np.full(u.shape, b if math.isfinite(b) else 1.0)
        # expand infinite brackets until they enclose the target
        while not math.isfinite(a):
            grow = (self._cdf(lo) > u) & np.isfinite(lo)
            if not np.any(grow):
                break
            lo = np.where(grow, 2.0 * lo, lo)
        while not math.isfinite(b):
            grow = (self._cdf(hi) < u) & np.isfinite(hi)
            if not np.any(grow):
                break
            hi = np.where(grow, 2.0 * hi, hi)
        x = _bisect(self._cdf, u, lo, hi)
        x = np.where(u <= 0, a, x)
        return np.where(u >= 1, b, x)

    # --- public API --------------------------------------------------------
    @property
    def kappa(self) -> float:
        """``int f(x)**2 dx`` for this (scaled) member."""
        return self._kappa_std / self.scale

    @property
    def has_closed_pdq(self) -> bool:
        return self._pdq_closed(np.array([0.5])) is not None

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        with np.errstate(all="ignore"):
            return self._pdf(z) / self.scale

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        with np.errstate(all="ignore"):
            return self._cdf(z)

    def ppf(self, u):
        """Quantile function ``Q(u)``."""
        with np.errstate(all="ignore"):
            return self.loc + self.scale * self._ppf(np.asarray(u, dtype=float))

    quantile = ppf

    def density_quantile(self, u):
        """``fQ(u) = f(Q(u))``."""
        with np.errstate(all="ignore"):
            return self._fq(np.asarray(u, dtype=float)) / self.scale

    def quantile_density(self, u):
        """``q(u) = Q'(u) = 1 / fQ(u)``."""
        return 1.0 / self.density_quantile(u)

    def pdq(self, u):
        """Pointwise pdQ ``f*(u)``; uses the closed form when there is one."""
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            closed = self._pdq_closed(u)
            if closed is not None:
                return closed
            return self._fq(u) / self._kappa_std

    def pdq_numeric(self, u):
        """``f(Q(u)) / kappa`` from the density and quantile, ignoring closed forms."""
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            return self._pdf(self._ppf(u)) / self._kappa_std

    def pdq_grid(self, m: int = DEFAULT_M) -> GridDensity:
        return pdq(self, m)

    def rvs(self, size, random_state=None):
        rng = np.random.default_rng(random_state)
        return self.ppf(rng.random(size))

    def pdq_tail_derivatives(self, s, side="right"):
        """Values of ``f*``, ``(f*)'`` and ``(f*)''`` near a boundary.

        Evaluated at distance ``s`` from the boundary.  The left side is
        handled by reflection, so rows always describe a right tail: for
        ``side="left"`` the first derivative is ``-(f*)'(s)``.  Returns
        ``None`` if the family has no analytic score function.
        """
        if self._score is None or self._score_prime is None:
            return None
        s = np.asarray(s, dtype=float)
        k = self._kappa_std
        with np.errstate(all="ignore"):
            if side == "right":
                x = self._isf(s)
                sign = 1.0
            elif side == "left":
                x = self._ppf(s)
                sign = -1.0
            else:
                raise ValueError(f"side must be 'left' or 'right', not {side!r}")
            f = self._pdf(x)
            d0 = f / k
            d1 = sign * self._score(x) / k
            d2 = self._score_prime(x) / (f * k)
        return np.vstack([d0, d1, d2])


class Power(ContinuousModel):
    """Power function (Beta(b, 1)) family on (0, 1)."""

    name = "power"
    shape_names = ("b",)
    support = (0.0, 1.0)

    def _validate(self):
        (b,) = self.shape_params
        if b <= 0.5:
            raise NonSquareIntegrable(f"power family requires b > 1/2, got b={b}")

    def _pdf(self, x):
        (b,) = self.shape_params
        x = np.asarray(x, dtype=float)
        # closed at 1 so that boundary probes which round to 1 keep f(1) = b
        inside = (x > 0) & (x <= 1)
        return np.where(inside, b * np.where(inside, x, 0.5) ** (b - 1), 0.0)

    def _cdf(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0) ** self.shape_params[0]

    def _ppf(self, u):
        return np.asarray(u, dtype=float) ** (1.0 / self.shape_params[0])

    def _isf(self, s):
        return np.exp(np.log1p(-np.asarray(s, dtype=float)) / self.shape_params[0])

    def _fq(self, u):
        (b,) = self.shape_params
        return b * np.asarray(u, dtype=float) ** (1 - 1 / b)

    def _kappa(self):
        (b,) = self.shape_params
        return b * b / (2 * b - 1)

    def _pdq_closed(self, u):
        (b,) = self.shape_params
        return (2 - 1 / b) * np.asarray(u, dtype=float) ** (1 - 1 / b)

    def _score(self, x):
        return (self.shape_params[0] - 1) / x

    def _score_prime(self, x):
        return -(self.shape_params[0] - 1) / np.square(x)


class Laplace(ContinuousModel):
    name = "laplace"

    def _pdf(self, x):
        return 0.5 * np.exp(-np.abs(x))

    def _cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0)), 1 - 0.5 * np.exp(-np.maximum(x, 0)))

    def _ppf(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u <= 0.5, np.log(2 * u), -np.log(2 * (1 - u)))

    def _isf(self, s):
        return -self._ppf(s)

    def _fq(self, u):
        u = np.asarray(u, dtype=float)
        return np.minimum(u, 1 - u)

    def _kappa(self):
        return 0.25

    def _pdq_closed(self, u):
        return 4 * self._fq(u)

    def _score(self, x):
        return -np.sign(x)

    def _score_prime(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


class Logistic(ContinuousModel):
    name = "logistic"

    def _pdf(self, x):
        return special.expit(x) * special.expit(-np.asarray(x, dtype=float))

    def _cdf(self, x):
        return special.expit(x)

    def _ppf(self, u):
        return special.logit(u)

    def _isf(self, s):
        return -special.logit(s)

    def _fq(self, u):
        u = np.asarray(u, dtype=float)
        return u * (1 - u)

    def _kappa(self):
        return 1 / 6

    def _pdq_closed(self, u):
        return 6 * self._fq(u)

    def _score(self, x):
        return -np.tanh(0.5 * np.asarray(x, dtype=float))

    def _score_prime(self, x):
        return -2 * self._pdf(x)


class ExtremeValue(ContinuousModel):
    """Largest extreme value (Gumbel) distribution, ``F(x) = exp(-exp(-x))``."""

    name = "extreme_value"

    def _pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-x - np.exp(-x))

    def _cdf(self, x):
        return np.exp(-np.exp(-np.asarray(x, dtype=float)))

    def _ppf(self, u):
        return -np.log(-np.log(u))

    def _isf(self, s):
        return -np.log(-np.log1p(-np.asarray(s, dtype=float)))

    def _fq(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u > 0, -u * np.log(np.where(u > 0, u, 1.0)), 0.0)

    def _kappa(self):
        return 0.25

    def _pdq_closed(self, u):
        return 4 * self._fq(u)

    def _score(self, x):
        return np.exp(-np.asarray(x, dtype=float)) - 1

    def _score_prime(self, x):
        return -np.exp(-np.asarray(x, dtype=float))


class Cauchy(ContinuousModel):
    name = "cauchy"

    def _pdf(self, x):
        return 1 / (math.pi * (1 + np.square(x)))

    def _cdf(self, x):
        return 0.5 + np.arctan(x) / math.pi

    def _ppf(self, u):
        return np.tan(math.pi * (np.asarray(u, dtype=float) - 0.5))

    def _isf(self, s):
        return 1 / np.tan(math.pi * np.asarray(s, dtype=float))

    def _fq(self, u):
        return np.square(np.sin(math.pi * np.asarray(u, dtype=float))) / math.pi

    def _kappa(self):
        return 1 / (2 * math.pi)

    def _pdq_closed(self, u):
        return 2 * np.square(np.sin(math.pi * np.asarray(u, dtype=float)))

    def _score(self, x):
        return -2 * x / (1 + np.square(x))

    def _score_prime(self, x):
        x2 = np.square(x)
        return 2 * (x2 - 1) / np.square(1 + x2)


def tukey_kappa(lam: float) -> float:
    """Normalizing constant of the Tukey(lambda) pdQ by adaptive quadrature.

    ``kappa = int_0^1 {u**(lam-1) + (1-u)**(lam-1)}**-1 du``
    """
    lam = float(lam)
    if lam == 0:
        return 1 / 6
    if lam in (1.0, 2.0):
        return lam / 2

    def integrand(u):
        with np.errstate(all="ignore"):
            return 1.0 / (u ** (lam - 1) + (1 - u) ** (lam - 1))

    # symmetric integrand: twice the left half
    return 2 * _quad(integrand, 0.0, 0.5, f"Tukey kappa at lambda={lam}")


def tukey_kappa_approx(lam: float) -> float:
    """Piecewise closed-form approximation to :func:`tukey_kappa`.

    ``3**lam / 6`` for ``lam <= 1``, ``lam / 2`` on ``[1, 2]`` and
    ``(pi/2)**(lam - 2)`` above 2 (intended for ``lam <= 6``).
    """
    lam = float(lam)
    if lam <= 1:
        return 3.0 ** lam / 6
    if lam <= 2:
        return lam / 2
    return (math.pi / 2) ** (lam - 2)


class Tukey(ContinuousModel):
    """Symmetric Tukey lambda family, defined through its quantile function."""

    name = "tukey"
    shape_names = ("lam",)

    def __init__(self, *shape_params, loc=0.0, scale=1.0):
        lam = float(shape_params[0]) if shape_params else 0.0
        self.support = (-1 / lam, 1 / lam) if lam > 0 else (-math.inf, math.inf)
        super().__init__(*shape_params, loc=loc, scale=scale)

    def _ppf(self, u):
        (lam,) = self.shape_params
        u = np.asarray(u, dtype=float)
        if lam == 0:
            return special.logit(u)
        return (u ** lam - (1 - u) ** lam) / lam

    def _isf(self, s):
        return -self._ppf(s)

    def _cdf(self, x):
        x = np.asarray(x, dtype=float)
        u = _bisect(self._ppf, x, np.zeros(x.shape), np.ones(x.shape))
        a, b = self.support
        return np.where(x <= a, 0.0, np.where(x >= b, 1.0, u))

    def _pdf(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.support
        inside = (x > a) & (x < b)
        return np.where(inside, self._fq(self._cdf(x)), 0.0)

    def _fq(self, u):
        (lam,) = self.shape_params
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            out = 1.0 / (u ** (lam - 1) + (1 - u) ** (lam - 1))
        return np.where((u > 0) & (u < 1), out, 0.0 if lam < 1 else 1.0 / (1.0 + (lam == 1)))

    def _kappa(self):
        return tukey_kappa(self.shape_params[0])

    def _pdq_closed(self, u):
        return self._fq(u) / self._kappa_std

    def rvs(self, size, random_state=None):
        rng = np.random.default_rng(random_state)
        return self.ppf(rng.random(size))

    def pdq_tail_derivatives(self, s, side="right"):
        # symmetric, so both sides read the same
        (lam,) = self.shape_params
        s = np.asarray(s, dtype=float)
        u = 1.0 - s
        k = self._kappa_std
        with np.errstate(all="ignore"):
            if lam < 1:
                # everything scaled by powers of s to stay finite as s -> 0
                r = np.exp((1 - lam) * (np.log(s) - np.log1p(-s)))
                t2 = np.exp((2 - lam) * (np.log(s) - np.log1p(-s)))
                t3 = np.exp((3 - lam) * (np.log(s) - np.log1p(-s)))
                d0 = s ** (1 - lam) / (1 + r)
                d1 = (1 - lam) * s ** (-lam) * (t2 - 1) / (1 + r) ** 2
                d2 = s ** (-lam - 1) * (
                    2 * (1 - lam) ** 2 * (1 - t2) ** 2 / (1 + r) ** 3
                    + (1 - lam) * (lam - 2) * (1 + t3) / (1 + r) ** 2)
            else:
                D = u ** (lam - 1) + s ** (lam - 1)
                d0 = 1 / D
                dm = u ** (lam - 2) - s ** (lam - 2)
                d1 = (1 - lam) * dm / D ** 2
                d2 = (2 * (1 - lam) ** 2 * dm ** 2 / D ** 3
                      + (1 - lam) * (lam - 2) * (u ** (lam - 3) + s ** (lam - 3)) / D ** 2)
        return np.vstack([d0, d1, d2]) / k


class Normal(ContinuousModel):
    name = "normal"

    def _pdf(self, x):
        return _phi(x)

    def _cdf(self, x):
        return special.ndtr(x)

    def _ppf(self, u):
        return special.ndtri(u)

    def _isf(self, s):
        return -special.ndtri(s)

    def _fq(self, u):
        return _phi(special.ndtri(u))

    def _kappa(self):
        return 1 / (2 * _SQRT_PI)

    def _pdq_closed(self, u):
        return 2 * _SQRT_PI * self._fq(u)

    def _score(self, x):
        return -np.asarray(x, dtype=float)

    def _score_prime(self, x):
        return -np.ones_like(np.asarray(x, dtype=float))


class Lognormal(ContinuousModel):
    name = "lognormal"
    support = (0.0, math.inf)

    def _pdf(self, x):
        x = np.asarray(x, dtype=float)
        pos = x > 0
        xs = np.where(pos, x, 1.0)
        return np.where(pos, _phi(np.log(xs)) / xs, 0.0)

    def _cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, special.ndtr(np.log(np.where(x > 0, x, 1.0))), 0.0)

    def _ppf(self, u):
        return np.exp(special.ndtri(u))

    def _isf(self, s):
        return np.exp(-special.ndtri(s))

    def _fq(self, u):
        z = special.ndtri(u)
        return np.exp(-0.5 * z * z - z - _LOG_SQRT_2PI)

    def _kappa(self):
        return math.exp(0.25) / (2 * _SQRT_PI)

    def _pdq_closed(self, u):
        return self._fq(u) / self._kappa()

    def _score(self, x):
        return -(1 + np.log(x)) / x

    def _score_prime(self, x):
        return np.log(x) / np.square(x)


class Pareto1(ContinuousModel):
    """Type I Pareto, ``F(x) = 1 - x**-a`` on ``x > 1``."""

    name = "pareto1"
    shape_names = ("a",)
    support = (1.0, math.inf)

    def _validate(self):
        if self.shape_params[0] <= 0:
            raise ValueError("Pareto shape a must be positive")

    def _pdf(self, x):
        (a,) = self.shape_params
        x = np.asarray(x, dtype=float)
        return np.where(x > 1, a * np.maximum(x, 1.0) ** (-a - 1), 0.0)

    def _cdf(self, x):
        (a,) = self.shape_params
        return 1 - np.maximum(np.asarray(x, dtype=float), 1.0) ** -a

    def _ppf(self, u):
        return (1 - np.asarray(u, dtype=float)) ** (-1 / self.shape_params[0])

    def _isf(self, s):
        return np.asarray(s, dtype=float) ** (-1 / self.shape_params[0])

    def _fq(self, u):
        (a,) = self.shape_params
        return a * (1 - np.asarray(u, dtype=float)) ** (1 + 1 / a)

    def _kappa(self):
        (a,) = self.shape_params
        return a * a / (2 * a + 1)

    def _pdq_closed(self, u):
        (a,) = self.shape_params
        return (2 + 1 / a) * (1 - np.asarray(u, dtype=float)) ** (1 + 1 / a)

    def _score(self, x):
        return -(self.shape_params[0] + 1) / x

    def _score_prime(self, x):
        return (self.shape_params[0] + 1) / np.square(x)


class Exponential(ContinuousModel):
    name = "exponential"
    support = (0.0, math.inf)

    def _pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, np.exp(-np.maximum(x, 0)), 0.0)

    def _cdf(self, x):
        return -np.expm1(-np.maximum(np.asarray(x, dtype=float), 0))

    def _ppf(self, u):
        return -np.log1p(-np.asarray(u, dtype=float))

    def _isf(self, s):
        return -np.log(s)

    def _fq(self, u):
        return 1 - np.asarray(u, dtype=float)

    def _kappa(self):
        return 0.5

    def _pdq_closed(self, u):
        return 2 * (1 - np.asarray(u, dtype=float))

    def _score(self, x):
        return -np.ones_like(np.asarray(x, dtype=float))

    def _score_prime(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


class Weibull(ContinuousModel):
    name = "weibull"
    shape_names = ("beta",)
    support = (0.0, math.inf)

    def _validate(self):
        (b,) = self.shape_params
        if b <= 0.5:
            raise NonSquareIntegrable(f"Weibull requires beta > 1/2, got beta={b}")

    def _pdf(self, x):
        (b,) = self.shape_params
        x = np.asarray(x, dtype=float)
        pos = x > 0
        xs = np.where(pos, x, 1.0)
        return np.where(pos, b * xs ** (b - 1) * np.exp(-xs ** b), 0.0)

    def _cdf(self, x):
        (b,) = self.shape_params
        return -np.expm1(-np.maximum(np.asarray(x, dtype=float), 0) ** b)

    def _ppf(self, u):
        return (-np.log1p(-np.asarray(u, dtype=float))) ** (1 / self.shape_params[0])

    def _isf(self, s):
        return (-np.log(s)) ** (1 / self.shape_params[0])

    def _fq(self, u):
        (b,) = self.shape_params
        u = np.asarray(u, dtype=float)
        t = -np.log1p(-u)
        return b * (1 - u) * t ** (1 - 1 / b)

    def _kappa(self):
        (b,) = self.shape_params
        e = 2 - 1 / b
        return b * math.gamma(e) / 2 ** e

    def _pdq_closed(self, u):
        return self._fq(u) / self._kappa()

    def _score(self, x):
        (b,) = self.shape_params
        return (b - 1) / x - b * x ** (b - 1)

    def _score_prime(self, x):
        (b,) = self.shape_params
        return -(b - 1) / np.square(x) - b * (b - 1) * x ** (b - 2)


class Gamma(ContinuousModel):
    name = "gamma"
    shape_names = ("alpha",)
    support = (0.0, math.inf)

    def _validate(self):
        (a,) = self.shape_params
        if a <= 0.5:
            raise NonSquareIntegrable(f"gamma requires alpha > 1/2, got alpha={a}")

    def _pdf(self, x):
        (a,) = self.shape_params
        x = np.asarray(x, dtype=float)
        pos = x > 0
        xs = np.where(pos, x, 1.0)
        return np.where(pos, np.exp((a - 1) * np.log(xs) - xs - special.gammaln(a)), 0.0)

    def _cdf(self, x):
        return special.gammainc(self.shape_params[0], np.maximum(np.asarray(x, dtype=float), 0))

    def _ppf(self, u):
        return special.gammaincinv(self.shape_params[0], u)

    def _isf(self, s):
        return special.gammainccinv(self.shape_params[0], s)

    def _kappa(self):
        (a,) = self.shape_params
        return math.exp(special.gammaln(2 * a - 1) - (2 * a - 1) * math.log(2)
                        - 2 * special.gammaln(a))

    def _score(self, x):
        return (self.shape_params[0] - 1) / x - 1

    def _score_prime(self, x):
        return -(self.shape_params[0] - 1) / np.square(x)


class ChiSquared(Gamma):
    """Chi-squared with ``nu`` degrees of freedom, i.e. ``2 * Gamma(nu/2)``."""

    name = "chisq"
    shape_names = ("nu",)

    def _validate(self):
        (nu,) = self.shape_params
        if nu <= 1:
            raise NonSquareIntegrable(f"chi-squared requires nu > 1, got nu={nu}")

    @property
    def _alpha(self):
        return self.shape_params[0] / 2

    def _pdf(self, x):
        a = self._alpha
        x = np.asarray(x, dtype=float) / 2
        pos = x > 0
        xs = np.where(pos, x, 1.0)
        return np.where(pos, 0.5 * np.exp((a - 1) * np.log(xs) - xs - special.gammaln(a)), 0.0)

    def _cdf(self, x):
        return special.gammainc(self._alpha, np.maximum(np.asarray(x, dtype=float), 0) / 2)

    def _ppf(self, u):
        return 2 * special.gammaincinv(self._alpha, u)

    def _isf(self, s):
        return 2 * special.gammainccinv(self._alpha, s)

    def _kappa(self):
        a = self._alpha
        return 0.5 * math.exp(special.gammaln(2 * a - 1) - (2 * a - 1) * math.log(2)
                              - 2 * special.gammaln(a))

    def _score(self, x):
        return (self._alpha - 1) / x - 0.5

    def _score_prime(self, x):
        return -(self._alpha - 1) / np.square(x)


class StudentT(ContinuousModel):
    name = "student_t"
    shape_names = ("nu",)

    def _validate(self):
        if self.shape_params[0] <= 0:
            raise ValueError("Student t requires nu > 0")

    @property
    def _logc(self):
        (nu,) = self.shape_params
        return (special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2)
                - 0.5 * math.log(nu * math.pi))

    def _pdf(self, x):
        (nu,) = self.shape_params
        return np.exp(self._logc - (nu + 1) / 2 * np.log1p(np.square(x) / nu))

    def _cdf(self, x):
        return special.stdtr(self.shape_params[0], x)

    def _ppf(self, u):
        return special.stdtrit(self.shape_params[0], u)

    def _isf(self, s):
        return -special.stdtrit(self.shape_params[0], s)

    def _kappa(self):
        (nu,) = self.shape_params
        return math.exp(2 * self._logc + 0.5 * math.log(nu) + special.betaln(0.5, nu + 0.5))

    def _score(self, x):
        (nu,) = self.shape_params
        return -(nu + 1) * x / (nu + np.square(x))

    def _score_prime(self, x):
        (nu,) = self.shape_params
        x2 = np.square(x)
        return -(nu + 1) * (nu - x2) / np.square(nu + x2)


class NormalMixture(ContinuousModel):
    """``(1 - w) N(0, 1) + w N(mu2, sigma2**2)``."""

    name = "normal_mixture"
    shape_names = ("w", "mu2", "sigma2")

    def _validate(self):
        w, _, s2 = self.shape_params
        if not 0 < w < 1:
            raise ValueError("mixture weight must lie in (0, 1)")
        if s2 <= 0:
            raise ValueError("sigma2 must be positive")

    def _logcomp(self, x):
        w, mu, s = self.shape_params
        x = np.asarray(x, dtype=float)
        z2 = (x - mu) / s
        l1 = math.log1p(-w) - 0.5 * x * x - _LOG_SQRT_2PI
        l2 = math.log(w) - math.log(s) - 0.5 * z2 * z2 - _LOG_SQRT_2PI
        return l1, l2, x, z2

    def _pdf(self, x):
        l1, l2, _, _ = self._logcomp(x)
        return np.exp(np.logaddexp(l1, l2))

    def _cdf(self, x):
        w, mu, s = self.shape_params
        x = np.asarray(x, dtype=float)
        return (1 - w) * special.ndtr(x) + w * special.ndtr((x - mu) / s)

    def _sf(self, x):
        w, mu, s = self.shape_params
        x = np.asarray(x, dtype=float)
        return (1 - w) * special.ndtr(-x) + w * special.ndtr(-(x - mu) / s)

    def _isf(self, s):
        s = np.asarray(s, dtype=float)
        w, mu, sig = self.shape_params
        lo = np.full(s.shape, min(0.0, mu) - 1.0)
        hi = np.full(s.shape, max(0.0, mu) + 1.0)
        for _ in range(2100):
            grow = self._sf(hi) > s
            if not np.any(grow):
                break
            hi = np.where(grow, 2 * hi, hi)
        for _ in range(2100):
            grow = self._sf(lo) < s
            if not np.any(grow):
                break
            lo = np.where(grow, 2 * lo, lo)
        return _bisect(lambda x: -self._sf(x), -s, lo, hi)

    def _kappa(self):
        w, mu, s = self.shape_params
        a = (1 - w) ** 2 / (2 * _SQRT_PI)
        b = w * w / (2 * _SQRT_PI * s)
        v = 1 + s * s
        c = 2 * w * (1 - w) * math.exp(-0.5 * mu * mu / v) / math.sqrt(2 * math.pi * v)
        return a + b + c

    def _score(self, x):
        w, mu, s = self.shape_params
        l1, l2, x, z2 = self._logcomp(x)
        p2 = special.expit(l2 - l1)
        return (1 - p2) * (-x) + p2 * (-z2 / s)

    def _score_prime(self, x):
        w, mu, s = self.shape_params
        l1, l2, x, z2 = self._logcomp(x)
        p2 = special.expit(l2 - l1)
        psi1, psi2 = -x, -z2 / s
        psi = (1 - p2) * psi1 + p2 * psi2
        second = (1 - p2) * (psi1 ** 2 - 1) + p2 * (psi2 ** 2 - 1 / s ** 2)
        return second - psi ** 2


class Beta(ContinuousModel):
    name = "beta"
    shape_names = ("a", "b")
    support = (0.0, 1.0)
    # right-tail quantiles lose precision in 1 - x
    tail_decades = 10

    def _validate(self):
        a, b = self.shape_params
        if a <= 0.5 or b <= 0.5:
            raise NonSquareIntegrable(f"beta requires a, b > 1/2, got a={a}, b={b}")

    def _pdf(self, x):
        a, b = self.shape_params
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        return np.where(inside, np.exp((a - 1) * np.log(xs) + (b - 1) * np.log1p(-xs)
                                       - special.betaln(a, b)), 0.0)

    def _cdf(self, x):
        a, b = self.shape_params
        return special.betainc(a, b, np.clip(np.asarray(x, dtype=float), 0, 1))

    def _ppf(self, u):
        a, b = self.shape_params
        return special.betaincinv(a, b, u)

    def _isf(self, s):
        a, b = self.shape_params
        return 1 - special.betaincinv(b, a, s)

    def _kappa(self):
        a, b = self.shape_params
        return math.exp(special.betaln(2 * a - 1, 2 * b - 1) - 2 * special.betaln(a, b))

    def _score(self, x):
        a, b = self.shape_params
        return (a - 1) / x - (b - 1) / (1 - x)

    def _score_prime(self, x):
        a, b = self.shape_params
        return -(a - 1) / np.square(x) - (b - 1) / np.square(1 - x)


class FunctionModel(ContinuousModel):
    """A model built from user-supplied vectorized ``pdf`` and ``cdf`` callables.

    The quantile is found by bisection on the cdf (left-continuous, so flat
    stretches of ``F`` are skipped) and ``kappa`` by quadrature.
    """

    name = "custom"

    def __init__(self, pdf, cdf, support=(-math.inf, math.inf), name="custom",
                 loc=0.0, scale=1.0):
        self._user_pdf = pdf
        self._user_cdf = cdf
        self.support = tuple(float(v) for v in support)
        self.name = name
        super().__init__(loc=loc, scale=scale)

    def __repr__(self):
        return f"FunctionModel(name={self.name!r})"

    def _pdf(self, x):
        return np.asarray(self._user_pdf(np.asarray(x, dtype=float)), dtype=float)

    def _cdf(self, x):
        return np.asarray(self._user_cdf(np.asarray(x, dtype=float)), dtype=float)

    def _ppf(self, u):
        u = np.asarray(u, dtype=float)
        x = self._invert_cdf(u)
        return x


FAMILIES = {
    cls.name: cls
    for cls in (Power, Laplace, Logistic, ExtremeValue, Cauchy, Tukey, Normal,
                Lognormal, Pareto1, Exponential, Weibull, Gamma, StudentT,
                ChiSquared, NormalMixture, Beta)
}

_ALIASES = {
    "gumbel": "extreme_value",
    "pareto": "pareto1",
    "t": "student_t",
    "chi2": "chisq",
    "mixture": "normal_mixture",
    "double_exponential": "laplace",
}


def make_model(name: str, shape_params=(), loc: float = 0.0, scale: float = 1.0) -> ContinuousModel:
    """Build a catalog model by family name.

    ``uniform`` is accepted as Power(1).  Raises :class:`UnknownFamily` for
    names outside the catalog and :class:`NonSquareIntegrable` when the
    shape makes ``int f**2`` diverge.
    """
    key = str(name).strip().lower().replace("-", "_")
    if key == "uniform":
        if len(tuple(shape_params)):
            raise ValueError("uniform takes no shape parameters")
        return Power(1.0, loc=loc, scale=scale)
    key = _ALIASES.get(key, key)
    try:
        cls = FAMILIES[key]
    except KeyError:
        raise UnknownFamily(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None
    return cls(*np.atleast_1d(np.asarray(shape_params, dtype=float)).tolist(), loc=loc, scale=scale)


def pdq(model: ContinuousModel, m: int = DEFAULT_M) -> GridDensity:
    """Grid pdQ of a continuous model.

    Cell ``j`` holds the average of ``f*`` over ``((j-1)/m, j/m)``, which
    agrees with ``f*(u_j)`` to ``O(m**-2)`` where ``f*`` is smooth and keeps
    the grid mass exact where ``f*`` has an integrable endpoint singularity.
    """
    if m < 2:
        raise ValueError("grid size must be at least 2")
    return GridDensity(cell_averages(model.pdq, m))


# --- lattice distributions ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatticeDistribution:
    """Probabilities ``probs[i]`` on the consecutive integers ``origin + i``."""

    origin: int
    probs: np.ndarray
    name: str = field(default="lattice", compare=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("lattice probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"lattice probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "origin", int(self.origin))

    @classmethod
    def from_weights(cls, weights, origin=0, name="lattice"):
        w = np.asarray(weights, dtype=float)
        return cls(origin, w / w.sum(), name)

    @property
    def cum(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c

    @property
    def support(self) -> np.ndarray:
        return self.origin + np.arange(self.probs.size)

    @property
    def kappa(self) -> float:
        return float(np.sum(np.square(self.probs)))


def _truncated(dist, name, tail=LATTICE_TAIL_MASS):
    lo = int(max(dist.ppf(tail), dist.support()[0]))
    hi = int(dist.isf(tail))
    hi = max(hi, lo)
    k = np.arange(lo, hi + 1)
    return LatticeDistribution.from_weights(dist.pmf(k), origin=lo, name=name)


def poisson(lam: float) -> LatticeDistribution:
    return _truncated(stats.poisson(lam), f"poisson({lam:g})")


def geometric(p: float) -> LatticeDistribution:
    """Geometric on {0, 1, 2, ...} with ``P(k) = p (1-p)**k``."""
    return _truncated(stats.geom(p, loc=-1), f"geometric({p:g})")


def negative_binomial(r: float, p: float) -> LatticeDistribution:
    """Number of failures before the ``r``-th success."""
    return _truncated(stats.nbinom(r, p), f"negative_binomial({r:g}, {p:g})")


def binomial(n: int, p: float) -> LatticeDistribution:
    dist = stats.binom(int(n), p)
    k = np.arange(int(n) + 1)
    return LatticeDistribution.from_weights(dist.pmf(k), 0, f"binomial({int(n)}, {p:g})")


LATTICE_FAMILIES = {
    "poisson": poisson,
    "geometric": geometric,
    "negative_binomial": negative_binomial,
    "nbinom": negative_binomial,
    "binomial": binomial,
}


def make_lattice(name: str, params=()) -> LatticeDistribution:
    key = str(name).strip().lower()
    try:
        ctor = LATTICE_FAMILIES[key]
    except KeyError:
        raise UnknownFamily(f"unknown lattice family {name!r}") from None
    return ctor(*params)


def _lattice_steps(d: LatticeDistribution):
    """Step edges ``S_i`` and the pdQ cumulative area at each edge."""
    p = d.probs
    kappa = d.kappa
    S = np.concatenate([[0.0], d.cum])
    area = np.concatenate([[0.0], np.cumsum(p * p) / kappa])
    area[-1] = 1.0
    return S, area, p / kappa


def lattice_pdq_function(d: LatticeDistribution):
    """Pointwise step pdQ ``p*(u) = p_i / kappa`` on ``(S_{i-1}, S_i]``."""
    S, _, heights = _lattice_steps(d)

    def p_star(u):
        u = np.asarray(u, dtype=float)
        i = np.clip(np.searchsorted(S, u, side="left") - 1, 0, heights.size - 1)
        return heights[i]

    return p_star


def lattice_pdq(d: LatticeDistribution, m: int = DEFAULT_M) -> GridDensity:
    """Grid pdQ of a lattice distribution (exact cell averages of the step pdQ)."""
    S, area, _ = _lattice_steps(d)
    # cumulative area is piecewise linear between the S_i
    cum = np.interp(edges(m), S, area)
    return GridDensity(np.diff(cum) * m)
