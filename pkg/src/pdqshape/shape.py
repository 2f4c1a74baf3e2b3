"""Shape summaries of pdQs: moments, distance to symmetry and tail weight."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .divergence import hellinger, kl, sym_kl
from .dists import ContinuousModel
from .exceptions import (
    DegenerateProjection,
    FixedPointDivergence,
    InconclusiveLimit,
    NoInteriorMinimum,
)
from .grid import GridDensity

__all__ = [
    "PdqMoments",
    "pdq_moments",
    "SymmetricProjection",
    "closest_symmetric",
    "closest_symmetric_hellinger",
    "closest_symmetric_kl_a",
    "closest_symmetric_kl_b",
    "closest_symmetric_sym_kl",
    "sym_kl_beta",
    "sym_kl_beta_iterative",
    "sym_kl_stationary_c",
    "DEFAULT_C_GRID",
    "Limit",
    "TailReport",
    "classify_limit",
    "classify_tail",
]


# --- moments --------------------------------------------------------------------

@dataclass(frozen=True)
class PdqMoments:
    mu_star: float
    sigma_star: float
    gamma1_star: float
    gamma2_star: float


def pdq_moments(g: GridDensity) -> PdqMoments:
    """Mean, standard deviation, skewness and kurtosis of a pdQ."""
    u = g.u
    w = g.values / g.values.sum()
    mu = float(np.dot(u, w))
    c = u - mu
    m2, m3, m4 = (float(np.dot(c ** k, w)) for k in (2, 3, 4))
    sigma = math.sqrt(m2)
    return PdqMoments(mu, sigma, m3 / sigma ** 3, m4 / sigma ** 4)


# --- closest symmetric densities --------------------------------------------------

CRITERIA = ("hellinger", "kl_sym_to_f", "kl_f_to_sym", "sym_kl")
_CRITERION_ALIASES = {
    "h": "hellinger",
    "kl_a": "kl_sym_to_f",
    "i21": "kl_sym_to_f",
    "kl_b": "kl_f_to_sym",
    "i12": "kl_f_to_sym",
    "j": "sym_kl",
    "kld": "sym_kl",
}

DEFAULT_C_GRID = np.geomspace(0.05, 5.0, 200)


@dataclass(frozen=True)
class SymmetricProjection:
    """The symmetric density closest to a pdQ under one criterion.

    ``value`` is the achieved minimum: the Hellinger distance, ``I(sym : f)``,
    ``I(f : sym)`` or ``J`` depending on ``criterion``.  ``c_opt`` is only set
    for ``sym_kl``.
    """

    criterion: str
    density: GridDensity
    value: float
    c_opt: float | None = None


def closest_symmetric_hellinger(g: GridDensity) -> SymmetricProjection:
    sg = np.sqrt(g.values)
    alpha = 0.5 * (sg + sg[::-1])
    dens = GridDensity.from_unnormalized(alpha ** 2)
    # 2 (1 - H^2)^2 = 1 + int sqrt(f(u) f(1-u)) du; written via 1 - overlap
    # = 0.5 int (sqrt f(u) - sqrt f(1-u))^2 du to avoid cancellation near symmetry
    gap = 0.5 * float(np.mean((sg - sg[::-1]) ** 2))
    h2 = 0.5 * gap / (1.0 + math.sqrt(1.0 - 0.5 * gap))
    return SymmetricProjection("hellinger", dens, math.sqrt(max(h2, 0.0)))


def closest_symmetric_kl_a(g: GridDensity) -> SymmetricProjection:
    """Minimizer of ``I(sym : g)``: the normalized geometric mean of g and its reflection."""
    nu = np.sqrt(g.values * g.values[::-1])
    if not np.mean(nu) > 0:
        raise DegenerateProjection("g and its reflection have disjoint supports")
    dens = GridDensity.from_unnormalized(nu)
    return SymmetricProjection("kl_sym_to_f", dens, kl(dens, g))


def closest_symmetric_kl_b(g: GridDensity) -> SymmetricProjection:
    """Minimizer of ``I(g : sym)``: the reflection average of g."""
    dens = GridDensity(0.5 * (g.values + g.values[::-1]))
    return SymmetricProjection("kl_f_to_sym", dens, kl(g, dens))


def sym_kl_beta(nu, fbar, c):
    """Solve ``beta = c * nu * exp(fbar / beta)`` pointwise.

    With ``t = fbar / beta`` the equation reads ``t exp(t) = fbar / (c nu)``,
    so ``beta = fbar / W(fbar / (c nu))`` with ``W`` the principal Lambert
    function.  Points where ``nu`` vanishes get ``beta = 0``.
    """
    nu = np.asarray(nu, dtype=float)
    fbar = np.asarray(fbar, dtype=float)
    out = np.zeros(np.broadcast(nu, fbar).shape)
    ok = (nu > 0) & (fbar > 0)
    arg = fbar[ok] / (c * nu[ok])
    out[ok] = fbar[ok] / special.lambertw(arg).real
    return out


def sym_kl_beta_iterative(nu, fbar, c, damping=0.5, max_iter=500, tol=1e-13):
    """Damped fixed-point solution of ``beta = c nu exp(fbar / beta)``.

    Starts at ``max(nu, fbar) * c``.  Points where the damped iteration has
    not settled are finished by bisection on ``log beta``, on which the
    residual ``log beta - log(c nu) - fbar / beta`` is increasing.
    """
    nu = np.asarray(nu, dtype=float)
    fbar = np.asarray(fbar, dtype=float)
    out = np.zeros(np.broadcast(nu, fbar).shape)
    ok = (nu > 0) & (fbar > 0)
    n, f = nu[ok], fbar[ok]
    beta = np.maximum(n, f) * c
    with np.errstate(over="ignore"):
        for _ in range(max_iter):
            new = (1 - damping) * beta + damping * c * n * np.exp(np.minimum(f / beta, 700))
            if np.all(np.abs(new - beta) <= tol * new):
                beta = new
                break
            beta = new
    resid = np.log(beta) - np.log(c * n) - f / beta
    bad = ~np.isfinite(resid) | (np.abs(resid) > 1e-10)
    if np.any(bad):
        lo = np.log(np.full(bad.sum(), 1e-300))
        hi = np.log(math.e * np.maximum(c * n[bad], f[bad]) * 1.01)

        def phi(lb):
            return lb - np.log(c * n[bad]) - f[bad] * np.exp(-lb)

        for _ in range(300):
            mid = 0.5 * (lo + hi)
            neg = phi(mid) < 0
            lo = np.where(neg, mid, lo)
            hi = np.where(neg, hi, mid)
        beta[bad] = np.exp(0.5 * (lo + hi))
    out[ok] = beta
    return out


def _sym_kl_parts(g: GridDensity):
    v = g.values
    r = v[::-1]
    return np.sqrt(v * r), 0.5 * (v + r)


def _density_for_c(g, nu, fbar, c, solver=sym_kl_beta):
    beta = solver(nu, fbar, c)
    if not np.all(np.isfinite(beta)):
        bad = np.flatnonzero(~np.isfinite(beta))
        raise FixedPointDivergence(f"no solution at u={g.u[bad[0]]:.6g} for C={c:g}",
                                   u=float(g.u[bad[0]]))
    d = beta.mean()
    if not d > 0:
        raise DegenerateProjection("g and its reflection have disjoint supports")
    return GridDensity(beta / d), d


def sym_kl_stationary_c(g: GridDensity) -> float:
    """The C at which the unnormalized solution already integrates to one.

    This is the Lagrange-multiplier condition for the J minimizer, so it
    coincides with the minimizer found by searching over C.
    """
    nu, fbar = _sym_kl_parts(g)
    if not np.mean(nu) > 0:
        raise DegenerateProjection("g and its reflection have disjoint supports")

    def excess(logc):
        return np.log(sym_kl_beta(nu, fbar, math.exp(logc)).mean())

    return math.exp(optimize.brentq(excess, math.log(1e-8), math.log(1e8), xtol=1e-14))


def _golden(fn, a, b, rel_width=1e-4):
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while abs(b - a) > rel_width * 0.5 * (abs(a) + abs(b)) and abs(b - a) > 1e-14:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return (c, fc) if fc < fd else (d, fd)


def closest_symmetric_sym_kl(g: GridDensity, c_grid=None) -> SymmetricProjection:
    """Minimizer of ``J(g, sym)`` among symmetric densities.

    For each C on ``c_grid`` the pointwise equation for ``beta(u; C)`` is
    solved, normalized and scored by J; the best grid point is refined by a
    golden-section search between its neighbours.
    """
    if g.is_symmetric(1e-12):
        # beta is proportional to g for every C; J vanishes identically
        return SymmetricProjection("sym_kl", g, 0.0, c_opt=math.exp(-1))
    c_grid = DEFAULT_C_GRID if c_grid is None else np.sort(np.asarray(c_grid, dtype=float))
    if c_grid.size < 3 or np.any(c_grid <= 0):
        raise ValueError("c_grid needs at least three positive values")
    nu, fbar = _sym_kl_parts(g)

    def objective(c):
        dens, _ = _density_for_c(g, nu, fbar, c)
        return sym_kl(g, dens)

    values = np.array([objective(c) for c in c_grid])
    if not np.any(np.isfinite(values)):
        raise DegenerateProjection("J is infinite for every C")
    i = int(np.argmin(values))
    if i == 0 or i == c_grid.size - 1:
        raise NoInteriorMinimum(f"J(C) is smallest at the grid end C={c_grid[i]:g}")
    logc, best = _golden(lambda t: objective(math.exp(t)),
                         math.log(c_grid[i - 1]), math.log(c_grid[i + 1]))
    c_opt = math.exp(logc)
    if values[i] < best:
        c_opt, best = float(c_grid[i]), float(values[i])
    dens, _ = _density_for_c(g, nu, fbar, c_opt)
    return SymmetricProjection("sym_kl", dens, sym_kl(g, dens), c_opt=c_opt)


def closest_symmetric(g: GridDensity, criterion: str = "hellinger", **kwargs) -> SymmetricProjection:
    key = _CRITERION_ALIASES.get(criterion.lower(), criterion.lower())
    if key == "hellinger":
        return closest_symmetric_hellinger(g)
    if key == "kl_sym_to_f":
        return closest_symmetric_kl_a(g)
    if key == "kl_f_to_sym":
        return closest_symmetric_kl_b(g)
    if key == "sym_kl":
        return closest_symmetric_sym_kl(g, **kwargs)
    raise ValueError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")


def projection_divergence(g: GridDensity, proj: SymmetricProjection) -> float:
    """Recompute the divergence a projection claims to achieve."""
    if proj.criterion == "hellinger":
        return hellinger(g, proj.density)
    if proj.criterion == "kl_sym_to_f":
        return kl(proj.density, g)
    if proj.criterion == "kl_f_to_sym":
        return kl(g, proj.density)
    return sym_kl(g, proj.density)


# --- tail weight -------------------------------------------------------------------

ZERO_TOL = 1e-3
FINITE_RTOL = 0.01
SHORT_TOL = 1e-6


@dataclass(frozen=True)
class Limit:
    """Boundary limit of one derivative: ``zero``, ``finite``, ``+inf`` or ``-inf``."""

    kind: str
    value: float

    def __str__(self):
        return f"{self.value:.6g}" if self.kind == "finite" else (
            "0" if self.kind == "zero" else self.kind)


def classify_limit(values, order=None) -> Limit:
    """Read off the limit of a sequence probed at ever smaller ``1 - u``.

    * zero: the magnitude is below 1e-3 and not increasing, or it keeps
      shrinking geometrically (ratio <= 0.95 per step over the last four);
    * finite: the last three values agree to 1 percent;
    * infinite: the magnitude grows monotonically with one sign and either
      by more than 10x over the last three values or without its increments
      contracting.

    Anything else raises :class:`InconclusiveLimit` rather than guessing.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 4:
        raise ValueError("need at least four probe values")
    tail = v[-4:]
    if np.any(np.isnan(tail)):
        raise InconclusiveLimit("NaN near the boundary", order=order, values=v)
    if np.all(np.isinf(tail[-2:])) and np.sign(tail[-1]) == np.sign(tail[-2]):
        return Limit("+inf" if tail[-1] > 0 else "-inf", float(tail[-1]))
    if np.any(np.isinf(tail)):
        raise InconclusiveLimit("overflow near the boundary", order=order, values=v)
    a = np.abs(tail)
    if a[-1] < ZERO_TOL and a[-1] <= a[-2] <= a[-3]:
        return Limit("zero", 0.0)
    if np.all(a[:-1] > 0) and np.all(a[1:] / a[:-1] <= 0.95):
        return Limit("zero", 0.0)
    last3 = tail[-3:]
    if np.max(np.abs(last3 - last3[-1])) <= FINITE_RTOL * abs(last3[-1]):
        return Limit("finite", float(tail[-1]))
    same_sign = np.all(np.sign(tail) == np.sign(tail[-1]))
    if same_sign and np.all(np.diff(a) > 0):
        d = np.diff(a)
        if a[-1] > 10 * a[-3] or np.all(d[1:] / d[:-1] >= 0.9):
            return Limit("+inf" if tail[-1] > 0 else "-inf", float(np.sign(tail[-1]) * math.inf))
    raise InconclusiveLimit(f"no limit pattern in {tail}", order=order, values=v)


@dataclass(frozen=True)
class TailReport:
    """Tail class of one side of a pdQ.

    ``derivative_limits[k]`` is the boundary limit of the k-th derivative of
    the pdQ, oriented so that both sides read like a right tail (left-side
    odd derivatives carry a sign flip).  ``n_star`` is the first order with a
    non-zero limit; it is ``None`` for short tails and when every examined
    order vanishes (then the tail is very long and ``n_star`` exceeds the
    last examined order).
    """

    side: str
    derivative_limits: tuple
    n_star: int | None
    label: str

    @property
    def n_star_display(self) -> str:
        if self.label == "short":
            return "short"
        if self.n_star is None:
            return f">={len(self.derivative_limits)}"
        return str(self.n_star)

    def as_dict(self) -> dict:
        return {
            "side": self.side,
            "label": self.label,
            "n_star": self.n_star if self.n_star is not None else self.n_star_display,
            "derivative_limits": [
                {"order": k, "kind": lim.kind,
                 "value": lim.value if lim.kind == "finite" else str(lim)}
                for k, lim in enumerate(self.derivative_limits)
            ],
        }


_LABELS = {1: "medium", 2: "long"}


def _finite_difference_derivatives(model: ContinuousModel, side: str):
    s = 10.0 ** -np.arange(2, 8)
    h = s / 4
    f = model.pdq
    if side == "right":
        u = 1 - s
        sign = 1.0
    else:
        u = s
        sign = -1.0
    fp, f0, fm = f(u + h), f(u), f(u - h)
    d1 = sign * (fp - fm) / (2 * h)
    d2 = (fp - 2 * f0 + fm) / h ** 2
    return np.vstack([f0, d1, d2])


def classify_tail(model: ContinuousModel, side: str = "right") -> TailReport:
    """Classify one tail of a model's pdQ by its boundary derivatives.

    A positive boundary value makes the tail short.  Otherwise the first
    derivative order with a non-zero limit decides: 1 is medium, 2 long,
    and vanishing first and second derivatives make it very long.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    s = 10.0 ** -np.arange(2, model.tail_decades + 1, dtype=float)
    derivs = model.pdq_tail_derivatives(s, side)
    if derivs is None:
        derivs = _finite_difference_derivatives(model, side)

    limits = [classify_limit(derivs[0], order=0)]
    boundary = limits[0]
    if boundary.kind == "+inf" or (boundary.kind == "finite" and boundary.value > SHORT_TOL):
        return TailReport(side, tuple(limits), None, "short")
    for order in (1, 2):
        lim = classify_limit(derivs[order], order=order)
        limits.append(lim)
        if lim.kind != "zero":
            return TailReport(side, tuple(limits), order, _LABELS[order])
    return TailReport(side, tuple(limits), None, "very_long")
