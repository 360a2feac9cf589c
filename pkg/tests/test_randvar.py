import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from mllp import randvar as rv
from mllp.errors import DomainError, EfficiencyWarning
from mllp.randvar import RandomSource


def lt_z(x, u, target):
    v = np.exp(-u * np.asarray(x))
    return (v.mean() - target) / (v.std(ddof=1) / math.sqrt(v.size))


def test_stream_is_deterministic():
    a, b = RandomSource(42), RandomSource(42)
    np.testing.assert_array_equal(a.uniform01(1000), b.uniform01(1000))
    assert RandomSource(42).uniform01() == 0.0860776307352848  # golden value
    assert RandomSource(43).uniform01() != RandomSource(42).uniform01()


def test_uniform_open_interval():
    u = RandomSource(1).uniform01(10 ** 6)
    assert u.min() > 0 and u.max() < 1
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_seed_validation():
    with pytest.raises(DomainError):
        RandomSource(-1)
    with pytest.raises(DomainError):
        RandomSource(2 ** 64)


def test_derive_seed_and_spawn():
    assert rv.derive_seed(1, 2, 3) == rv.derive_seed(1, 2, 3)
    assert len({rv.derive_seed(1, i, j) for i in range(10) for j in range(10)}) == 100
    kids = RandomSource(9).spawn(3)
    assert [k.seed for k in kids] == [k.seed for k in RandomSource(9).spawn(3)]
    assert len({k.seed for k in kids}) == 3


def test_scalar_and_array_returns():
    src = RandomSource(3)
    assert isinstance(rv.exponential(src, 2.0), float)
    assert isinstance(rv.gamma_variate(src, 1.0, 0.5), float)
    assert isinstance(rv.stable_variate(src, 0.5), float)
    assert isinstance(rv.ml_variate(src, 0.5, 1.0), float)
    assert isinstance(rv.negbin_variate(src, 1.0, 0.5), int)
    assert rv.gamma_variate(src, 1.0, 2.0, size=(3, 4)).shape == (3, 4)


@pytest.mark.parametrize("shape", [0.05, 0.3, 1.0, 2.5, 40.0])
def test_gamma_distribution(shape):
    x = rv.gamma_variate(RandomSource(11), 2.0, shape, size=200_000)
    assert np.all(x >= 0) and np.all(np.isfinite(x))
    assert stats.kstest(x, stats.gamma(shape, scale=0.5).cdf).pvalue > 1e-3


def test_gamma_broadcast_shapes():
    shapes = np.array([0.5, 5.0])
    x = rv.gamma_variate(RandomSource(2), 1.0, shapes[:, None], size=(2, 100_000))
    np.testing.assert_allclose(x.mean(axis=1), shapes, rtol=0.02)


def test_exponential_mean():
    x = rv.exponential(RandomSource(5), 4.0, size=10 ** 6)
    assert abs(x.mean() - 0.25) < 4 * 0.25 / 1000


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
def test_stable_laplace(alpha):
    s = rv.stable_variate(RandomSource(7), alpha, size=400_000)
    assert s.min() > 0
    for u in (0.5, 1.0, 3.0):
        assert abs(lt_z(s, u, math.exp(-u ** alpha))) < 4


def test_stable_against_scipy():
    # alpha=1/2 standard positive stable is Levy with scale 1/2
    s = rv.stable_variate(RandomSource(8), 0.5, size=200_000)
    assert stats.kstest(s, stats.levy(scale=0.5).cdf).pvalue > 1e-3


@pytest.mark.parametrize("alpha,lam", [(0.3, 2.0), (0.7, 0.5)])
def test_ml_laplace(alpha, lam):
    x = rv.ml_variate(RandomSource(10), alpha, lam, size=400_000)
    for u in (0.5, 2.0):
        assert abs(lt_z(x, u, lam / (lam + u ** alpha))) < 4


def test_ml_near_exponential():
    x = rv.ml_variate(RandomSource(12), 0.999, 1.0, size=400_000)
    target = 1.0 - math.exp(-50.0)  # E min(X, 50) for exponential(1)
    assert abs(np.minimum(x, 50).mean() / target - 1) < 0.05


@pytest.mark.parametrize("mu,t", [(1.0, 1.0), (3.0, 5.0), (0.2, 0.01)])
def test_tempered_stable_laplace(mu, t):
    alpha = 0.6
    x, st_ = rv.tempered_stable_variate(RandomSource(13), alpha, mu, t, size=300_000, return_stats=True)
    assert st_.acceptance_rate >= math.exp(-1) * 0.95
    for u in (0.5, 2.0):
        target = math.exp(-t * ((u + mu) ** alpha - mu ** alpha))
        assert abs(lt_z(x, u, target)) < 4
    mean = t * alpha * mu ** (alpha - 1)
    assert abs(x.mean() / mean - 1) < 0.02


def test_tempered_efficiency_warning():
    with pytest.warns(EfficiencyWarning):
        rv.tempered_stable_variate(RandomSource(1), 0.5, 100.0, 1.5, split=False)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rv.tempered_stable_variate(RandomSource(1), 0.5, 100.0, 1.5, size=10)


@pytest.mark.parametrize("mean", [0.3, 4.0, 9.99, 10.0, 250.0])
def test_poisson(mean):
    k = rv.poisson_variate(RandomSource(14), mean, size=300_000)
    se = math.sqrt(mean / k.size)
    assert abs(k.mean() - mean) < 4 * se
    assert abs(k.var() / mean - 1) < 0.03
    freq0 = np.mean(k == int(mean))
    assert abs(freq0 - stats.poisson(mean).pmf(int(mean))) < 0.005


def test_poisson_zero_mean():
    assert np.all(rv.poisson_variate(RandomSource(1), np.zeros(5)) == 0)


@pytest.mark.parametrize("t,p", [(1.0, 0.5), (2.5, 0.2)])
def test_negbin(t, p):
    j = rv.negbin_variate(RandomSource(15), t, p, size=400_000)
    mean = t * (1 - p) / p
    var = mean / p
    assert abs(j.mean() - mean) < 4 * math.sqrt(var / j.size)
    assert abs(np.mean(j == 0) - p ** t) < 0.004


@pytest.mark.parametrize("call", [
    lambda s: rv.stable_variate(s, 1.0),
    lambda s: rv.stable_variate(s, 0.0),
    lambda s: rv.gamma_variate(s, -1.0, 1.0),
    lambda s: rv.gamma_variate(s, 1.0, 0.0),
    lambda s: rv.exponential(s, 0.0),
    lambda s: rv.tempered_stable_variate(s, 0.5, -1.0, 1.0),
    lambda s: rv.negbin_variate(s, 1.0, 1.0),
    lambda s: rv.poisson_variate(s, -2.0),
])
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call(RandomSource(0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 64 - 1), st.integers(1, 50))
def test_uniform_property(seed, n):
    u = RandomSource(seed).uniform01(n)
    assert np.all((u > 0) & (u < 1))
    np.testing.assert_array_equal(u, RandomSource(seed).uniform01(n))
