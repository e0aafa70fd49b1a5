"""Exact sampling from the area-tilted bridge measure and the static
Gaussian fluctuation theory.

The invariant measure puts weight exp(gamma * area(S)) on each bridge S.
A backward dynamic-programming table of log partition functions gives an
exact forward sampler; the fluctuation field u^N around the deterministic
centering curve converges to a centred Gaussian process whose covariance
is available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import HEIGHT_DTYPE, ModelParams

__all__ = [
    "PartitionTable",
    "build_partition_table",
    "log_partition_function",
    "sample_mu",
    "sigma_curve",
    "sigma_limit",
    "rescale_u",
    "balpha_covariance",
    "empirical_covariance",
    "enumerate_bridges",
]


@dataclass(frozen=True)
class PartitionTable:
    """Backward log partition functions over the diamond of (k, h).

    ``log_z[k, h + N]`` is the log of the total tilted weight of paths
    from (k, h) to (2N, 0), where the weight of a path is
    exp(gamma * sum of heights strictly after position k).
    Inadmissible (k, h) carry -inf.
    """

    params: ModelParams
    log_z: np.ndarray

    def __post_init__(self):
        assert self.log_z.shape == (2 * self.params.N + 1,) * 2


def build_partition_table(params: ModelParams) -> PartitionTable:
    """Fill the table by the backward recursion in log domain.

    log_z(k, h) = logsumexp over h' = h +- 1 of gamma*h' + log_z(k+1, h').
    Memory is O(N^2); fine up to N ~ 8192.
    """
    n2 = 2 * params.N
    gamma = params.gamma
    log_z = np.full((n2 + 1, n2 + 1), -np.inf)
    log_z[n2, params.N] = 0.0  # h = 0 at k = 2N
    h_grid = np.arange(-params.N, params.N + 1, dtype=np.float64)
    for k in range(n2 - 1, -1, -1):
        nxt = log_z[k + 1]
        # step up: h -> h+1 contributes gamma*(h+1) + log_z(k+1, h+1)
        up = np.full(n2 + 1, -np.inf)
        up[:-1] = gamma * (h_grid[:-1] + 1.0) + nxt[1:]
        down = np.full(n2 + 1, -np.inf)
        down[1:] = gamma * (h_grid[1:] - 1.0) + nxt[:-1]
        log_z[k] = np.logaddexp(up, down)
        # mask heights unreachable from (0,0) or not connectable to (2N,0)
        reach = np.abs(h_grid) <= min(k, n2 - k)
        parity = (np.arange(-params.N, params.N + 1) % 2) == (k % 2)
        log_z[k, ~(reach & parity)] = -np.inf
    return PartitionTable(params=params, log_z=log_z)


def log_partition_function(table: PartitionTable) -> float:
    """log Z_N, the log of the total tilted weight over all bridges."""
    return float(table.log_z[0, table.params.N])


def sample_mu(table: PartitionTable, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` i.i.d. bridges with the exact tilted law.

    Walks forward from (0, 0); at position k with height h the up-step
    probability is exp(gamma*(h+1) + log_z(k+1, h+1) - log_z(k, h)).
    Vectorised across samples.  Returns an array of shape (count, 2N+1).
    """
    params = table.params
    n2 = 2 * params.N
    gamma = params.gamma
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    heights = np.zeros((count, n2 + 1), dtype=HEIGHT_DTYPE)
    h = np.zeros(count, dtype=np.int64)
    for k in range(n2):
        cur = table.log_z[k, h + params.N]
        up = gamma * (h + 1.0) + table.log_z[k + 1, np.minimum(h + 1 + params.N, n2)]
        p_up = np.exp(up - cur)
        step = np.where(rng.random(count) < p_up, 1, -1)
        h = h + step
        heights[:, k + 1] = h
    return heights


def enumerate_bridges(N: int) -> np.ndarray:
    """All C(2N, N) bridges, for small-N enumeration oracles."""
    from itertools import combinations

    n2 = 2 * N
    out = []
    for ups in combinations(range(n2), N):
        inc = -np.ones(n2, dtype=np.int64)
        inc[list(ups)] = 1
        S = np.concatenate([[0], np.cumsum(inc)])
        out.append(S)
    return np.array(out, dtype=HEIGHT_DTYPE)


def sigma_curve(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Centering curve on the zoomed grid.

    Returns (x_k, Sigma(x_k)) for k = 0..2N, where
    x_k = (k - N) / (2N)^alpha and Sigma(x_k) = sum_{i<=k} tanh(h_i)
    with h_i = 2 (N - i + 1/2) / (2N)^alpha.  Linear interpolation
    between grid points is understood.
    """
    n2 = 2 * params.N
    scale = float(n2) ** params.alpha
    i = np.arange(1, n2 + 1, dtype=np.float64)
    h_i = 2.0 * (params.N - i + 0.5) / scale
    sigma = np.concatenate([[0.0], np.cumsum(np.tanh(h_i))])
    x = (np.arange(n2 + 1) - params.N) / scale
    return x, sigma


def _log_cosh(y: np.ndarray) -> np.ndarray:
    y = np.abs(y)
    return y + np.log1p(np.exp(-2.0 * y)) - np.log(2.0)


def sigma_limit(x) -> np.ndarray | float:
    """Closed-form limit of (Sigma(x) - N) / (2N)^alpha:
    (1/2) log 2 - (1/2) log cosh(2x)."""
    x = np.asarray(x, dtype=np.float64)
    out = 0.5 * np.log(2.0) - 0.5 * _log_cosh(2.0 * x)
    return out if out.ndim else float(out)


def rescale_u(S: np.ndarray, params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Fluctuation field u^N(x) = (S(N + x (2N)^alpha) - Sigma(x)) / (2N)^(alpha/2).

    Both S and Sigma are read by linear interpolation; u vanishes outside
    [-N/(2N)^alpha, N/(2N)^alpha].
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    n2 = 2 * params.N
    scale = float(n2) ** params.alpha
    grid_x, sigma = sigma_curve(params)
    site = params.N + x * scale
    inside = (site >= 0.0) & (site <= n2)
    s_val = np.interp(site, np.arange(n2 + 1, dtype=np.float64),
                      np.asarray(S, dtype=np.float64))
    sig_val = np.interp(x, grid_x, sigma)
    u = (s_val - sig_val) / float(n2) ** (params.alpha / 2.0)
    u[~inside] = 0.0
    return u


def balpha_covariance(x: float, y: float) -> float:
    """Covariance of the limiting Gaussian field at (x, y).

    For x <= y this is q(-inf, x) q(y, inf) with
    q(-inf, x) = (1 + tanh 2x)/2 and q(y, inf) = (1 - tanh 2y)/2;
    total mass q(-inf, inf) = 1.
    """
    lo, hi = (x, y) if x <= y else (y, x)
    return 0.25 * (1.0 + np.tanh(2.0 * lo)) * (1.0 - np.tanh(2.0 * hi))


def empirical_covariance(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unbiased sample covariance and jackknife standard errors.

    ``samples`` has shape (n, m): n replicas of an m-point field.
    Returns (cov, se), both (m, m).  The jackknife recomputes the
    covariance with each replica left out, using rank-one downdates.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n, m = samples.shape
    if n < 2:
        raise ValueError("need at least 2 samples for a covariance")
    s1 = samples.sum(axis=0)                      # (m,)
    s2 = samples.T @ samples                      # (m, m)
    mean = s1 / n
    cov = (s2 - np.outer(s1, mean)) / (n - 1)
    if n < 3:
        return cov, np.full((m, m), np.nan)
    # leave-one-out covariances, vectorised over the left-out index
    s1_lo = s1[None, :] - samples                               # (n, m)
    outer_x = samples[:, :, None] * samples[:, None, :]         # (n, m, m)
    outer_s = s1_lo[:, :, None] * s1_lo[:, None, :] / (n - 1)
    cov_lo = (s2[None, :, :] - outer_x - outer_s) / (n - 2)
    cov_lo_mean = cov_lo.mean(axis=0)
    se = np.sqrt((n - 1) / n * np.sum((cov_lo - cov_lo_mean) ** 2, axis=0))
    return cov, se
