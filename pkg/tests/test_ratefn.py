import math
import pickle
import threading

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from rwgraph.dist import make_distribution, parse_dist
from rwgraph.errors import DegenerateProbability, DomainError
from rwgraph.ratefn import (RateFunction, chernoff_bound, legendre, rate_inverse, sum_bound,
                            threshold_xn)

ALL = ["gaussian", "laplace", "uniform", "rademacher", "steptail"]


def _mp_conjugate(log_mgf, t, s_max):
    """Legendre transform by root-finding the stationarity condition in mpmath."""
    mp.mp.dps = 40
    t = mp.mpf(t)
    g = lambda s: mp.diff(log_mgf, s) - t
    s = mp.findroot(g, (mp.mpf("1e-8"), mp.mpf(s_max)), solver="anderson")
    return float(s * t - log_mgf(s))


def _mp_uniform_rate(t):
    # Lambda(s) = log(sinh s / s); stationarity is the Langevin equation coth s - 1/s = t
    mp.mp.dps = 40
    t = mp.mpf(t)
    s = mp.findroot(lambda s: mp.coth(s) - 1 / s - t, (mp.mpf("1e-6"), mp.mpf(1e6)), solver="anderson")
    return float(s * t - mp.log(mp.sinh(s) / s))


def test_gaussian_rate_values():
    r = RateFunction(parse_dist("gaussian"))
    assert r(2.0) == 2.0
    assert r.inverse(2.0) == pytest.approx(2.0, abs=1e-12)
    assert RateFunction(parse_dist("gaussian:2"))(2.0) == 0.5


def test_rademacher_rate_value():
    r = RateFunction(parse_dist("rademacher"))
    entropy = 0.5 * (1.5 * math.log(1.5) + 0.5 * math.log(0.5))
    assert r(0.5) == pytest.approx(entropy, rel=1e-14)
    assert r(0.5) == pytest.approx(0.1308, abs=1e-4)
    assert r(1.0) == pytest.approx(math.log(2.0), rel=1e-15)
    assert r(1.5) == math.inf


def test_laplace_rate_against_stationary_point():
    # Lambda(s) = -log(1 - s^2); s* solves 2s/(1-s^2) = t
    for t in (0.01, 0.3, 1.0, 2.0, 7.5, 50.0):
        s = (math.sqrt(1 + t * t) - 1) / t
        oracle = s * t + math.log(1 - s * s)
        assert RateFunction(parse_dist("laplace"))(t) == pytest.approx(oracle, rel=1e-12)
    assert RateFunction(parse_dist("laplace"))(1.0) == pytest.approx(0.2259871559, abs=1e-9)


def test_laplace_numeric_matches_closed_form():
    exact = RateFunction(parse_dist("laplace:1.7"))
    numeric = RateFunction(parse_dist("laplace:1.7"), closed_form=False)
    for t in np.linspace(0.0, 30.0, 61):
        assert numeric(t) == pytest.approx(exact(t), rel=1e-7, abs=1e-9)


@pytest.mark.parametrize("t", [0.05, 0.3, 0.5, 0.8, 0.95, 0.999])
def test_uniform_rate_against_langevin_root(t):
    assert RateFunction(parse_dist("uniform"))(t) == pytest.approx(_mp_uniform_rate(t), rel=1e-8)


def test_uniform_rate_scaling():
    assert RateFunction(parse_dist("uniform:3"))(1.5) == pytest.approx(RateFunction(parse_dist("uniform"))(0.5), rel=1e-9)


def test_steptail_rate_against_mpmath():
    d = parse_dist("steptail:5")
    y = [mp.log(2)] + [mp.mpf(2) ** (k * k) for k in range(1, 6)]
    probs = [mp.e ** -y[k - 1] - mp.e ** -y[k] for k in range(1, 5)] + [mp.e ** -y[4]]
    lam = lambda s: mp.log(mp.fsum(p * 2 * mp.cosh(s * x) for p, x in zip(probs, range(1, 6))))
    r = RateFunction(d)
    for t in (0.5, 1.5, 2.5):
        assert r(t) == pytest.approx(_mp_conjugate(lam, t, 200), rel=1e-7)


def test_rate_at_and_beyond_support_edge():
    assert RateFunction(parse_dist("uniform"))(1.0) == math.inf
    assert RateFunction(parse_dist("uniform"))(1.2) == math.inf
    d = parse_dist("steptail:4")
    assert RateFunction(d)(4.0) == pytest.approx(2.0 ** 9, rel=1e-12)
    assert RateFunction(d)(4.5) == math.inf
    assert RateFunction(make_distribution("zero"))(0.5) == math.inf


@pytest.mark.parametrize("name", ALL)
def test_rate_basic_shape(name):
    d = parse_dist(name)
    r = RateFunction(d)
    assert r(0.0) == 0.0
    top = min(d.ess_sup, 15.0)
    grid = np.linspace(0.0, top * 0.999, 80)
    values = [r(t) for t in grid]
    assert all(v >= 0 for v in values)
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    for t in grid[::7]:
        assert r(-t) == r(t)


@pytest.mark.parametrize("name", ALL)
def test_rate_convex_on_grid(name):
    d = parse_dist(name)
    r = RateFunction(d)
    top = min(d.ess_sup, 10.0)
    grid = np.linspace(0.0, top * 0.98, 50)
    v = np.array([r(t) for t in grid])
    second = v[2:] - 2 * v[1:-1] + v[:-2]
    assert np.all(second >= -1e-7 * np.maximum(1.0, np.abs(v[1:-1])))


@pytest.mark.parametrize("name", ALL)
@settings(max_examples=40, deadline=None)
@given(y=st.floats(min_value=0.0, max_value=20.0))
def test_inverse_round_trip(name, y):
    d = parse_dist(name)
    r = RateFunction(d)
    s = r.inverse(y)
    assert 0.0 <= s <= d.ess_sup
    if s < d.ess_sup:
        assert abs(r(s) - y) <= 1e-6
    else:
        # y exceeds every finite value; the inverse pins to the support edge
        assert r(s * (1 - 1e-9)) < y + 1e-6


@pytest.mark.parametrize("name", ALL)
def test_inverse_nondecreasing(name):
    r = RateFunction(parse_dist(name))
    values = [r.inverse(y) for y in np.linspace(0.0, 25.0, 60)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_inverse_rejects_negative():
    with pytest.raises(DomainError):
        rate_inverse(RateFunction(parse_dist("gaussian")), -1.0)


def test_inverse_gaussian_closed_form():
    r = RateFunction(parse_dist("gaussian"))
    for y in (0.1, 1.0, math.log(100), 10.0):
        assert r.inverse(y) == pytest.approx(math.sqrt(2 * y), rel=1e-12)


def test_chernoff_examples():
    assert chernoff_bound(RateFunction(parse_dist("gaussian")), 2.0) == pytest.approx(math.exp(-2), rel=1e-14)
    assert chernoff_bound(RateFunction(parse_dist("gaussian")), 2.0) == pytest.approx(0.135335, abs=1e-6)
    lap = chernoff_bound(RateFunction(parse_dist("laplace")), 1.0)
    assert lap == pytest.approx(math.exp(-0.2259871559), rel=1e-9)
    with pytest.raises(DomainError):
        chernoff_bound(RateFunction(parse_dist("gaussian")), 0.0)


@pytest.mark.parametrize("name", ALL)
def test_chernoff_dominates_tail(name):
    d = parse_dist(name)
    r = RateFunction(d)
    for t in np.linspace(0.05, min(d.ess_sup, 8.0), 40):
        assert d.tail(t) <= chernoff_bound(r, t) * (1 + 1e-9)


def test_sum_bound_dominates_empirical_frequency():
    r = RateFunction(parse_dist("gaussian"))
    k, t = 4, 0.8
    sums = np.random.default_rng(1).standard_normal((200_000, k)).sum(axis=1)
    freq = np.mean(sums > k * t)
    assert freq <= sum_bound(r, k, t)
    assert sum_bound(r, k, t) == pytest.approx(math.exp(-k * t * t / 2), rel=1e-14)
    with pytest.raises(DomainError):
        sum_bound(r, k, -1.0)
    with pytest.raises(DomainError):
        sum_bound(r, 0, 1.0)


def test_legendre_function_form():
    r = RateFunction(parse_dist("gaussian"))
    assert legendre(r, 3.0) == 4.5


def test_memo_threads_agree():
    r = RateFunction(parse_dist("uniform"))
    plain = RateFunction(parse_dist("uniform"), memoize=False)
    grid = [0.01 * k for k in range(1, 99)]
    results = {}

    def work(i):
        results[i] = [r(t) for t in grid]

    threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    expected = [plain(t) for t in grid]
    assert all(results[i] == expected for i in range(4))


def test_rate_function_pickles():
    r = RateFunction(parse_dist("laplace"))
    r(1.0)
    clone = pickle.loads(pickle.dumps(r))
    assert clone(1.0) == r(1.0)
    assert clone(2.0) == r(2.0)


def test_xn_gaussian_against_quantile():
    for n in (100, 10**3, 10**4, 10**6):
        p = 2 * math.log(n) / n
        assert threshold_xn(parse_dist("gaussian"), 1, 2 * math.log(n), n) == pytest.approx(norm.isf(p), rel=1e-9)
    assert threshold_xn(parse_dist("gaussian"), 1, 2 * math.log(100), 100) == pytest.approx(1.3279131275, abs=1e-9)


def test_xn_uniform_closed_form():
    n = 100
    assert threshold_xn(parse_dist("uniform"), 1, 2 * math.log(n), n) == pytest.approx(1 - 4 * math.log(n) / n, rel=1e-12)


def test_xn_laplace_closed_form():
    n = 1000
    p = 2 * math.log(n) / n
    assert threshold_xn(parse_dist("laplace"), 1, 2 * math.log(n), n) == pytest.approx(-math.log(2 * p), rel=1e-12)


def test_xn_atomic_returns_atom():
    d = parse_dist("steptail")
    n = 10**4
    x = threshold_xn(d, 1, 2 * math.log(n), n)
    assert x in d.steps.x
    assert d.tail(x) <= 2 * math.log(n) / n
    assert d.tail(x - 1) > 2 * math.log(n) / n


def test_xn_degenerate_probability():
    with pytest.raises(DegenerateProbability):
        threshold_xn(parse_dist("gaussian"), 1, 2 * math.log(3), 3)
    with pytest.raises(DomainError):
        threshold_xn(parse_dist("gaussian"), 1, 0.5, 100)
    assert threshold_xn(make_distribution("zero"), 1, 2 * math.log(100), 100) == 0.0


@pytest.mark.parametrize("name", ALL)
def test_xn_sandwich_and_monotone(name):
    d = parse_dist(name)
    r = RateFunction(d)
    xs = []
    for n in (10**2, 10**3, 10**4, 10**5, 10**6):
        x = threshold_xn(d, 1, 2 * math.log(n), n, rate=r)
        assert x <= r.inverse(math.log(n)) * (1 + 1e-9) + 1e-12
        xs.append(x)
    assert all(b >= a for a, b in zip(xs, xs[1:]))
