"""scikit-learn style wrappers around the functional API.

Both estimators take one-dimensional data: an array of shape ``(n,)`` or
``(n, 1)``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .divergence import hellinger
from .dists import make_model
from .estimate import (
    SMOOTH_M,
    BandwidthRule,
    EmpiricalSample,
    empirical_pdq_discrete,
    empirical_pdq_smooth,
)
from .fit import fit, model_pdq

__all__ = ["EmpiricalPdq", "ShapeFitter"]


def _column(X) -> np.ndarray:
    X = check_array(X, ensure_2d=False, dtype=float)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected one column of data, got {X.shape[1]}")
        X = X[:, 0]
    return X


def _sample(X) -> EmpiricalSample:
    return EmpiricalSample(_column(X))


class EmpiricalPdq(TransformerMixin, BaseEstimator):
    """Estimate the pdQ of a sample; ``transform`` evaluates it at ``u``.

    Parameters
    ----------
    kind : {"smooth", "discrete"}
        Kernel estimator for continuous data, step estimator for data with ties.
    rule : {"cauchy", "lognormal"} or None
        Bandwidth reference family for the kernel estimator; by default
        lognormal for positive data and Cauchy otherwise.
    m : int
        Grid size.
    """

    def __init__(self, kind="smooth", rule=None, m=SMOOTH_M):
        self.kind = kind
        self.rule = rule
        self.m = m

    def fit(self, X, y=None):
        s = _sample(X)
        if self.kind == "smooth":
            rule = None if self.rule is None else BandwidthRule(self.rule, s.n)
            self.pdq_ = empirical_pdq_smooth(s, rule, self.m)
        elif self.kind == "discrete":
            self.pdq_ = empirical_pdq_discrete(s, self.m)
        else:
            raise ValueError(f"kind must be 'smooth' or 'discrete', not {self.kind!r}")
        self.n_samples_ = s.n
        return self

    def transform(self, X):
        check_is_fitted(self, "pdq_")
        u = _column(X)
        if np.any((u <= 0) | (u >= 1)):
            raise ValueError("evaluation points must lie in (0, 1)")
        return self.pdq_(u)


class ShapeFitter(BaseEstimator):
    """Fit a one-parameter shape family by ``hpdq``, ``ppcc`` or ``mle``.

    After ``fit``, ``predict(u)`` returns the fitted quantiles
    ``location + scale * Q(u)`` and ``score(X)`` is minus the Hellinger
    distance between the empirical pdQ of ``X`` and the fitted pdQ.
    """

    def __init__(self, family="tukey", method="hpdq", coarse=None, fine_step=None,
                 m=SMOOTH_M):
        self.family = family
        self.method = method
        self.coarse = coarse
        self.fine_step = fine_step
        self.m = m

    def fit(self, X, y=None):
        s = _sample(X)
        kwargs = {"m": self.m}
        if self.method != "mle":
            kwargs.update(coarse=self.coarse, fine_step=self.fine_step)
        res = fit(s, self.family, self.method, **kwargs)
        self.result_ = res
        self.shape_ = res.shape
        self.location_ = res.location
        self.scale_ = res.scale
        self.distance_h_ = res.distance_h
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        model = make_model(self.family, (self.shape_,), self.location_, self.scale_)
        return model.ppf(_column(X))

    def score(self, X, y=None):
        check_is_fitted(self, "result_")
        g = empirical_pdq_smooth(_sample(X), None, self.m)
        return -hellinger(g, model_pdq(self.family, self.shape_, self.m))
