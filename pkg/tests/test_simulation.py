import math

import numpy as np
import pytest
from scipy import stats

from pdqshape.simulation import (
    MethodSummary,
    SimulationSource,
    parse_source,
    replication_rng,
    run_simulation,
)


@pytest.mark.parametrize("text,expected", [
    ("tukey:-1", SimulationSource("tukey", -1.0)),
    ("Tukey(0.14)", SimulationSource("tukey", 0.14)),
    ("weibull:2", SimulationSource("weibull", 2.0)),
    ("weibull:1 + 0.05*2LN", SimulationSource("weibull", 1.0, 0.05, 2.0)),
    ("weibull:2+0.1*LN", SimulationSource("weibull", 2.0, 0.1, 1.0)),
])
def test_parse_source(text, expected):
    assert parse_source(text) == expected


@pytest.mark.parametrize("text", ["normal:1", "tukey", "tukey:-1 + 0.05*LN", "weibull:-1",
                                  "weibull:1 + 1.5*LN"])
def test_parse_source_rejects(text):
    with pytest.raises(ValueError):
        parse_source(text)


def test_source_str():
    assert str(parse_source("weibull:1 + 0.05*2LN")) == "0.95*weibull(1) + 0.05*2LN"
    assert str(parse_source("tukey:-1")) == "tukey(-1)"


def test_replication_streams_are_reproducible_and_distinct():
    a = replication_rng(3, 0).random(5)
    assert np.array_equal(a, replication_rng(3, 0).random(5))
    assert not np.array_equal(a, replication_rng(3, 1).random(5))
    assert not np.array_equal(a, replication_rng(4, 0).random(5))


def test_tukey_sampler_matches_quantile_function():
    rng = np.random.default_rng(0)
    x = SimulationSource("tukey", 0.0).sample(20000, rng)
    assert stats.kstest(x, stats.logistic.cdf).pvalue > 1e-3
    x = SimulationSource("tukey", 1.0).sample(20000, rng)
    assert x.min() >= -1 and x.max() <= 1
    assert stats.kstest(x, stats.uniform(-1, 2).cdf).pvalue > 1e-3


def test_contaminated_sampler_fraction():
    src = SimulationSource("weibull", 1.0, 0.2, 1000.0)
    x = src.sample(20000, np.random.default_rng(1))
    # lognormal draws scaled by 1000 dominate the upper range
    assert np.mean(x > 50) == pytest.approx(0.2, abs=0.015)


def test_method_summary_se():
    summary = MethodSummary.from_estimates("hpdq", [1.0, 2.0, 3.0], truth=1.0)
    assert summary.mean == 2.0 and summary.sd == 1.0
    assert summary.se == pytest.approx(math.sqrt(2))
    assert summary.count == 3
    empty = MethodSummary.from_estimates("ppcc", [], truth=1.0, failures=4)
    assert math.isnan(empty.se) and empty.failures == 4


def test_zero_replications():
    rep = run_simulation("tukey:-1", replications=0)
    assert rep.rows == () and rep.replications == 0
    assert rep.to_csv().count("\n") == 1


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_simulation("tukey:-1", replications=-1)
    with pytest.raises(ValueError):
        run_simulation("tukey:-1", n=1)


@pytest.fixture(scope="module")
def small_run():
    return run_simulation("weibull:2", methods=("hpdq", "ppcc", "mle"), n=300,
                          replications=4, seed=9)


def test_report_shape(small_run):
    assert [r.method for r in small_run.rows] == ["hpdq", "ppcc", "mle"]
    for r in small_run.rows:
        assert r.count + r.failures == 4
        assert r.se ** 2 == pytest.approx(r.sd ** 2 + (r.mean - 2.0) ** 2)
        assert r.min <= r.mean <= r.max
    csv_lines = small_run.to_csv().strip().split("\n")
    assert csv_lines[0].startswith("source,family,n,method,se")
    assert len(csv_lines) == 4
    with pytest.raises(KeyError):
        small_run.row("moments")


def test_seed_reproducible(small_run):
    again = run_simulation("weibull:2", methods=("hpdq", "ppcc", "mle"), n=300,
                           replications=4, seed=9)
    assert again.rows == small_run.rows


def test_parallel_matches_serial():
    kw = dict(methods=("ppcc",), n=200, replications=4, seed=2)
    serial = run_simulation("tukey:-0.5", **kw)
    parallel = run_simulation("tukey:-0.5", n_jobs=2, **kw)
    assert np.array_equal(serial.estimates["ppcc"], parallel.estimates["ppcc"])


def test_failures_are_counted_not_raised():
    # likelihood fits reject the negative draws of a Tukey sample
    rep = run_simulation("tukey:0.14", family="weibull", methods=("mle",), n=100,
                         replications=3)
    assert rep.row("mle").failures == 3 and rep.row("mle").count == 0
