"""Monte Carlo comparison of shape estimators.

Each replication draws its own counter-based random stream (Philox keyed by
the seed and the replication index), so results do not depend on the order
or the number of workers.
"""

from __future__ import annotations

import logging
import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .estimate import EmpiricalSample
from .exceptions import PdqError
from .fit import fit

__all__ = [
    "SimulationSource",
    "MethodSummary",
    "SimulationReport",
    "parse_source",
    "replication_rng",
    "run_simulation",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationSource:
    """A sampler: Tukey(shape), Weibull(shape), or a contaminated Weibull.

    With ``contamination = p`` each draw comes from ``contamination_scale``
    times a standard lognormal with probability ``p``.
    """

    kind: str
    shape: float
    contamination: float = 0.0
    contamination_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("tukey", "weibull"):
            raise ValueError(f"source kind must be tukey or weibull, not {self.kind!r}")
        if not 0 <= self.contamination < 1:
            raise ValueError("contamination must lie in [0, 1)")
        if self.contamination and self.kind != "weibull":
            raise ValueError("contamination is only defined for Weibull sources")
        if self.kind == "weibull" and not self.shape > 0:
            raise ValueError("Weibull shape must be positive")

    @property
    def family(self) -> str:
        return self.kind

    def __str__(self):
        base = f"{self.kind}({self.shape:g})"
        if not self.contamination:
            return base
        k = self.contamination_scale
        ln = "LN" if k == 1 else f"{k:g}LN"
        return f"{1 - self.contamination:g}*{base} + {self.contamination:g}*{ln}"

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "tukey":
            u = rng.random(n)
            lam = self.shape
            if lam == 0:
                return np.log(u) - np.log1p(-u)
            return (u ** lam - (1 - u) ** lam) / lam
        x = rng.weibull(self.shape, n)
        if self.contamination:
            bad = rng.random(n) < self.contamination
            x[bad] = self.contamination_scale * rng.lognormal(size=int(bad.sum()))
        return x


_SOURCE_RE = re.compile(
    r"^\s*(tukey|weibull)\s*[:(]\s*([-+0-9.eE]+)\s*\)?\s*"
    r"(?:\+\s*([0-9.eE]+)\s*\*?\s*(?:([0-9.eE]+)\s*\*?\s*)?ln)?\s*$", re.IGNORECASE)


def parse_source(text: str) -> SimulationSource:
    """Parse ``tukey:-1``, ``weibull:2`` or ``weibull:2+0.05*2ln``.

    Examples
    --------
    >>> parse_source("weibull:1 + 0.05*2LN")
    SimulationSource(kind='weibull', shape=1.0, contamination=0.05, contamination_scale=2.0)
    """
    mt = _SOURCE_RE.match(text)
    if not mt:
        raise ValueError(f"cannot parse source {text!r}")
    kind, shape, p, k = mt.groups()
    return SimulationSource(kind.lower(), float(shape), float(p) if p else 0.0,
                            float(k) if k else 1.0)


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(rep),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class MethodSummary:
    method: str
    se: float
    mean: float
    sd: float
    min: float
    max: float
    count: int
    failures: int = 0

    @classmethod
    def from_estimates(cls, method, estimates, truth, failures=0):
        est = np.asarray(estimates, dtype=float)
        if est.size == 0:
            return cls(method, math.nan, math.nan, math.nan, math.nan, math.nan, 0, failures)
        mean = float(est.mean())
        sd = float(est.std(ddof=1)) if est.size > 1 else 0.0
        se = math.sqrt(sd ** 2 + (mean - truth) ** 2)
        return cls(method, se, mean, sd, float(est.min()), float(est.max()), int(est.size),
                   failures)


@dataclass(frozen=True)
class SimulationReport:
    """Per-method summaries; ``se**2 = sd**2 + (mean - true_shape)**2``."""

    source: SimulationSource
    family: str
    n: int
    replications: int
    true_shape: float
    rows: tuple = ()
    estimates: dict = field(default_factory=dict, repr=False, compare=False)

    def row(self, method: str) -> MethodSummary:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_csv(self) -> str:
        lines = ["source,family,n,method,se,mean,sd,min,max,count,failures"]
        for r in self.rows:
            vals = ",".join(f"{v:.10g}" for v in (r.se, r.mean, r.sd, r.min, r.max))
            lines.append(f"\"{self.source}\",{self.family},{self.n},{r.method},{vals},"
                         f"{r.count},{r.failures}")
        return "\n".join(lines) + "\n"


def _one_replication(source, family, methods, n, seed, rep):
    x = source.sample(n, replication_rng(seed, rep))
    s = EmpiricalSample(x)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for method in methods:
            try:
                out[method] = fit(s, family, method).shape
            except (PdqError, ValueError) as exc:
                log.info("replication %d, %s failed: %s", rep, method, exc)
                out[method] = math.nan
    return out


def run_simulation(source, family: str | None = None, methods=("hpdq", "ppcc"),
                   n: int = 500, replications: int = 25, seed: int = 0,
                   n_jobs: int = 1) -> SimulationReport:
    """Fit ``family`` by each method to ``replications`` samples of size ``n``.

    Fit failures are counted per method rather than raised.  ``n_jobs > 1``
    spreads replications over processes with joblib; the result is the same.
    """
    if isinstance(source, str):
        source = parse_source(source)
    family = family or source.family
    methods = tuple(methods)
    if replications < 0 or n < 2:
        raise ValueError("need replications >= 0 and n >= 2")
    if replications == 0:
        return SimulationReport(source, family, n, 0, source.shape)
    reps = range(replications)
    if n_jobs == 1:
        results = [_one_replication(source, family, methods, n, seed, r) for r in reps]
    else:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(
            delayed(_one_replication)(source, family, methods, n, seed, r) for r in reps)
    estimates = {}
    rows = []
    for method in methods:
        est = np.array([res[method] for res in results])
        ok = np.isfinite(est)
        estimates[method] = est
        rows.append(MethodSummary.from_estimates(method, est[ok], source.shape,
                                                 int((~ok).sum())))
    return SimulationReport(source, family, n, replications, source.shape, tuple(rows),
                            estimates)
