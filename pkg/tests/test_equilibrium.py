"""Exact tilted sampling and the static Gaussian limit."""

import numpy as np
import pytest

from wasep import equilibrium, model


def exact_law(params):
    """Enumeration oracle: every bridge with its tilted probability."""
    bridges = equilibrium.enumerate_bridges(params.N)
    logw = params.gamma * np.array([model.area(b) for b in bridges], dtype=float)
    w = np.exp(logw - logw.max())
    return bridges, w / w.sum()


def test_partition_function_matches_enumeration():
    for N, alpha in [(2, 0.5), (3, 0.4), (4, 0.7)]:
        params = model.make_params(N, alpha)
        table = equilibrium.build_partition_table(params)
        bridges = equilibrium.enumerate_bridges(N)
        logw = params.gamma * np.array([model.area(b) for b in bridges], dtype=float)
        from scipy.special import logsumexp
        assert equilibrium.log_partition_function(table) == pytest.approx(
            float(logsumexp(logw)), abs=1e-10)


def test_sampler_matches_enumeration():
    params = model.make_params(3, 0.5)
    table = equilibrium.build_partition_table(params)
    bridges, probs = exact_law(params)
    keys = {tuple(b): i for i, b in enumerate(bridges)}
    n = 200_000
    samples = equilibrium.sample_mu(table, n, seed=10)
    counts = np.zeros(len(bridges))
    for s in samples:
        counts[keys[tuple(s)]] += 1
    tv = 0.5 * np.abs(counts / n - probs).sum()
    # 99% multinomial envelope: mean bound + McDiarmid deviation
    envelope = 0.5 * np.sqrt(len(bridges) / n) + np.sqrt(np.log(100.0) / (2 * n))
    assert tv <= envelope


def test_samples_are_bridges():
    params = model.make_params(12, 0.3)
    table = equilibrium.build_partition_table(params)
    for s in equilibrium.sample_mu(table, 50, seed=3):
        assert model.is_valid_bridge(s)


def test_sampler_determinism():
    params = model.make_params(6, 0.6)
    table = equilibrium.build_partition_table(params)
    a = equilibrium.sample_mu(table, 20, seed=5)
    b = equilibrium.sample_mu(table, 20, seed=5)
    assert np.array_equal(a, b)


def test_sigma_curve_example():
    """Increment of the centering curve is tanh of the tilt field."""
    params = model.make_params(8, 0.5)
    x, sigma = equilibrium.sigma_curve(params)
    # Sigma(k) - Sigma(k-1) = tanh(h_k), h_k = 2 (N - k + 1/2) / (2N)^alpha
    k = 3
    h_k = 2.0 * (params.N - k + 0.5) / (2 * params.N) ** params.alpha
    assert sigma[k] - sigma[k - 1] == pytest.approx(np.tanh(h_k), abs=1e-12)
    # antisymmetry of the increments about the midpoint
    inc = np.diff(sigma)
    assert np.allclose(inc, -inc[::-1], atol=1e-12)


def test_sigma_tracks_mean_height():
    """The centering curve approximates the exact tilted mean of S."""
    params = model.make_params(4, 0.5)
    bridges, probs = exact_law(params)
    mean_S = probs @ bridges
    _, sigma = equilibrium.sigma_curve(params)
    assert sigma[0] == pytest.approx(0.0, abs=1e-12)
    assert sigma[-1] == pytest.approx(0.0, abs=1e-10)
    # the tanh product ansatz ignores the bridge constraint, so only a
    # loose agreement is expected at this size
    assert np.max(np.abs(sigma - mean_S)) < 0.5


def test_sigma_limit_values():
    assert equilibrium.sigma_limit(0.0) == pytest.approx(0.5 * np.log(2.0))
    x = 1.3
    assert equilibrium.sigma_limit(x) == pytest.approx(
        0.5 * np.log(2.0) - 0.5 * np.log(np.cosh(2 * x)))
    assert equilibrium.sigma_limit(x) == equilibrium.sigma_limit(-x)


def test_balpha_covariance_closed_form():
    assert equilibrium.balpha_covariance(0.0, 0.0) == pytest.approx(0.25)
    x, y = -0.7, 0.4
    expected = 0.25 * (1 + np.tanh(2 * x)) * (1 - np.tanh(2 * y))
    assert equilibrium.balpha_covariance(x, y) == pytest.approx(expected)
    assert equilibrium.balpha_covariance(y, x) == pytest.approx(expected)


def test_rescale_u_vanishes_outside():
    params = model.make_params(8, 0.5)
    S = model.flat_initial(params.N)
    x = np.array([-50.0, 50.0])
    assert np.allclose(equilibrium.rescale_u(S, params, x), 0.0)


def test_empirical_covariance_jackknife_oracle():
    """Vectorised jackknife equals the brute-force leave-one-out loop."""
    rng = np.random.default_rng(8)
    samples = rng.standard_normal((40, 3)) @ rng.standard_normal((3, 3))
    cov, se = equilibrium.empirical_covariance(samples)
    assert np.allclose(cov, np.cov(samples, rowvar=False), atol=1e-12)
    n = len(samples)
    loo = np.stack([np.cov(np.delete(samples, i, axis=0), rowvar=False)
                    for i in range(n)])
    se_brute = np.sqrt((n - 1) / n * np.sum((loo - loo.mean(axis=0)) ** 2, axis=0))
    assert np.allclose(se, se_brute, rtol=1e-8, atol=1e-12)
