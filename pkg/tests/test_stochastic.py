import math

import numpy as np
import pytest

from turnsim.stochastic import (
    PRESETS,
    WeibullParams,
    assignment_stream,
    bernoulli,
    order_stream,
    pax_stream,
    sample_weibull,
)


def test_preset_registry():
    assert set(PRESETS) == {"walk", "A", "B"}
    assert PRESETS["walk"] == WeibullParams(0.9, 0.4, 0.16)
    assert PRESETS["A"] == WeibullParams(2.0, 6.5, 5.5)
    assert PRESETS["B"] == WeibullParams(2.0, 6.5, 1.5)


def test_analytic_mean():
    # theta + beta * Gamma(1 + 1/alpha)
    assert PRESETS["A"].mean() == pytest.approx(11.26047, abs=1e-4)
    assert PRESETS["B"].mean() == pytest.approx(7.26047, abs=1e-4)
    assert PRESETS["walk"].mean() == pytest.approx(0.16 + 0.4 * math.gamma(1 / 0.9 + 1))


def test_cdf_anchor_points():
    for params in PRESETS.values():
        assert params.cdf(params.theta) == 0.0
        assert params.cdf(params.theta - 1.0) == 0.0
        # at theta + beta the exponent is exactly 1 regardless of alpha
        assert params.cdf(params.theta + params.beta) == pytest.approx(1 - math.e**-1)
        assert params.cdf(params.theta + 50 * params.beta) == pytest.approx(1.0)


def test_draws_respect_floor_and_mean():
    rng = np.random.default_rng(7)
    params = PRESETS["A"]
    xs = np.array([sample_weibull(rng, params) for _ in range(100_000)])
    assert xs.min() >= params.theta
    assert xs.min() < params.theta + 0.1 * params.beta  # floor is approached
    assert xs.mean() == pytest.approx(params.mean(), abs=0.05)


def test_kolmogorov_smirnov_against_cdf():
    rng = np.random.default_rng(99)
    for name in ("walk", "A", "B"):
        params = PRESETS[name]
        xs = np.sort([sample_weibull(rng, params) for _ in range(100_000)])
        n = len(xs)
        cdf = np.array([params.cdf(x) for x in xs])
        ecdf_hi = np.arange(1, n + 1) / n
        ecdf_lo = np.arange(0, n) / n
        d = max(np.max(ecdf_hi - cdf), np.max(cdf - ecdf_lo))
        assert d < 0.01, f"KS statistic {d:.4f} too large for preset {name}"


def test_bernoulli_frequency():
    rng = np.random.default_rng(3)
    hits = sum(bernoulli(rng, 0.3) for _ in range(100_000))
    assert 0.29 < hits / 100_000 < 0.31
    assert not any(bernoulli(rng, 0.0) for _ in range(1000))
    assert all(bernoulli(rng, 1.0) for _ in range(1000))


def test_streams_are_reproducible_and_distinct():
    a1 = assignment_stream(42).random(8)
    a2 = assignment_stream(42).random(8)
    assert np.array_equal(a1, a2)
    o = order_stream(42).random(8)
    assert not np.array_equal(a1, o)
    p0 = pax_stream(42, 0).random(8)
    p1 = pax_stream(42, 1).random(8)
    assert not np.array_equal(p0, p1)
    assert np.array_equal(p0, pax_stream(42, 0).random(8))
    # a different run seed shifts every stream
    assert not np.array_equal(a1, assignment_stream(43).random(8))
