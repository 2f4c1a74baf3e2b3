"""Hellinger distance and Kullback-Leibler divergences between grid densities.

All integrals are midpoint sums on the shared grid, the same discretization
the fitting objective uses.  A divergence that is infinite because the
second density vanishes where the first does not is returned as ``math.inf``.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import GridDensity

__all__ = ["hellinger", "kl", "sym_kl", "METRICS"]


def _values(g1: GridDensity, g2: GridDensity):
    g1.check_compatible(g2)
    return g1.values, g2.values


def hellinger(g1: GridDensity, g2: GridDensity) -> float:
    """``H = sqrt(1/2 * int (sqrt(g1) - sqrt(g2))**2)``, in ``[0, 1]``."""
    a, b = _values(g1, g2)
    h2 = 0.5 * np.mean(np.square(np.sqrt(a) - np.sqrt(b)))
    return float(math.sqrt(min(max(h2, 0.0), 1.0)))


def kl(g1: GridDensity, g2: GridDensity) -> float:
    """Kullback-Leibler information ``I(g1 : g2) = int g1 log(g1 / g2)``."""
    a, b = _values(g1, g2)
    pos = a > 0
    if np.any(b[pos] <= 0):
        return math.inf
    terms = a[pos] * (np.log(a[pos]) - np.log(b[pos]))
    # clamp tiny negative round-off
    return float(max(terms.sum() / a.size, 0.0))


def sym_kl(g1: GridDensity, g2: GridDensity) -> float:
    """Symmetrized divergence ``J = I(g1 : g2) + I(g2 : g1)``."""
    return kl(g1, g2) + kl(g2, g1)


METRICS = {"hellinger": hellinger, "kl": kl, "sym_kl": sym_kl}
