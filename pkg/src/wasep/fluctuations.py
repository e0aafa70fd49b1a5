"""Hopf-Cole transform, martingale diagnostics, and a stochastic heat
equation reference solver.

The exponential transform of the rescaled height field satisfies an
exact lattice stochastic heat equation: its compensator is c * (lattice
Laplacian) on the fast clock, and the predictable bracket of the site
martingales has a closed form in the field and its first differences.
Both identities hold with the finite-N constants, not just in the limit,
which is what the residual checks below exploit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import equilibrium
from .model import ModelParams

KPZ_EXPONENT = 4.0  # fast clock runs at (2N)^(4 alpha)


@dataclass(frozen=True)
class HopfColeField:
    """Exponentiated height field at one macroscopic time."""

    params: ModelParams
    t_macro: float
    h: np.ndarray                 # gamma*S(l) - lambda*t, length 2N+1
    xi: np.ndarray                # exp(-h)

    @property
    def x(self) -> np.ndarray:
        n2 = 2 * self.params.N
        return (np.arange(n2 + 1) - self.params.N) / n2 ** (2 * self.params.alpha)


def hopf_cole(heights: np.ndarray, t_macro: float,
              params: ModelParams) -> HopfColeField:
    """Build h(l) = gamma S(l) - lambda t and xi = exp(-h).

    The pinned endpoints give xi(0) = xi(2N) = exp(lambda t) exactly.
    """
    S = np.asarray(heights, dtype=np.float64)
    h = params.gamma * S - params.lam * t_macro
    return HopfColeField(params=params, t_macro=float(t_macro), h=h,
                         xi=np.exp(-h))


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported test function with an analytic second derivative."""

    name: str
    support: float
    phi: Callable[[np.ndarray], np.ndarray]
    d2phi: Callable[[np.ndarray], np.ndarray]

    def lattice_values(self, params: ModelParams) -> np.ndarray:
        """Samples on the zoomed lattice x_l = (l - N) / (2N)^(2 alpha)."""
        n2 = 2 * params.N
        x = (np.arange(n2 + 1) - params.N) / n2 ** (2 * params.alpha)
        return self.phi(x)


def gaussian_bump(sigma: float = 1.0, support: float = 4.0) -> TestFunction:
    """Truncated Gaussian; the cut at |x| = support is below 4e-8 * peak."""
    def phi(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(np.abs(x) < support, np.exp(-x ** 2 / (2 * sigma ** 2)), 0.0)

    def d2phi(x):
        x = np.asarray(x, dtype=np.float64)
        core = (x ** 2 / sigma ** 4 - 1.0 / sigma ** 2) * np.exp(-x ** 2 / (2 * sigma ** 2))
        return np.where(np.abs(x) < support, core, 0.0)

    return TestFunction("gaussian_bump", support, phi, d2phi)


def cosine_bump(support: float = 2.0) -> TestFunction:
    """cos^2(pi x / 2A) on [-A, A], C^1 with piecewise-analytic curvature."""
    w = np.pi / (2.0 * support)

    def phi(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(np.abs(x) < support, np.cos(w * x) ** 2, 0.0)

    def d2phi(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(np.abs(x) < support, -2.0 * w ** 2 * np.cos(2 * w * x), 0.0)

    return TestFunction("cosine_bump", support, phi, d2phi)


def inner(f: np.ndarray, g: np.ndarray, params: ModelParams) -> float:
    """Zoomed lattice pairing (2N)^(-2 alpha) sum_{k=1}^{2N-1} f g."""
    n2 = 2 * params.N
    return float(np.sum(f[1:n2] * g[1:n2]) / n2 ** (2 * params.alpha))


def _laplacian(v: np.ndarray) -> np.ndarray:
    """Interior second difference; zero-padded at the pinned endpoints."""
    out = np.zeros_like(v)
    out[1:-1] = v[2:] - 2.0 * v[1:-1] + v[:-2]
    return out


def _exp_weights(dts: np.ndarray, rate: float) -> np.ndarray:
    """Quadrature weights int_0^dt e^(rate s) ds = (e^(rate dt) - 1)/rate.

    Between flip events the field only grows by the deterministic tilt
    e^(lambda s); freezing the jump part at the left endpoint but
    integrating the tilt exactly removes the dominant quadrature bias
    near the pinned boundaries, where lambda dt need not be small.
    """
    if rate == 0.0:
        return dts
    return np.expm1(rate * dts) / rate


def martingale_path(times: np.ndarray, xi: np.ndarray, phi_vals: np.ndarray,
                    params: ModelParams) -> np.ndarray:
    """Cumulative martingale M(t) = <xi(t)-xi(0), phi> - int c <Lap xi, phi>.

    The drift uses the exact jump-rate constant c; the time integral
    freezes the jump part of xi at the left endpoint of each snapshot
    interval while integrating the deterministic tilt e^(lambda s)
    exactly (times are on the fast macroscopic clock).
    Returns M at every snapshot time, starting at 0.
    """
    times = np.asarray(times, dtype=np.float64)
    pair0 = np.array([inner(row, phi_vals, params) for row in xi])
    drift = np.array([inner(_laplacian(row), phi_vals, params) for row in xi])
    m = np.zeros(len(times))
    w = _exp_weights(np.diff(times), params.lam)
    m[1:] = np.cumsum(np.diff(pair0) - params.c * w * drift[:-1])
    return m


def bracket_terms(times: np.ndarray, xi: np.ndarray, phi_vals: np.ndarray,
                  params: ModelParams) -> dict:
    """Quadratic variation bookkeeping for the test-function martingale.

    Returns the empirical quadratic variation of M and the integrated
    predictable bracket split as main - r1 - r2, where the main part is
    (2 lambda / (2N)^(2a)) int <xi^2, phi^2>, r1 collects the lattice
    Laplacian correction and r2 the product of one-sided gradients.
    """
    times = np.asarray(times, dtype=np.float64)
    n2 = 2 * params.N
    za = n2 ** (2 * params.alpha)
    phi2 = phi_vals ** 2
    # integrands are quadratic in xi, so the frozen-jump quadrature
    # integrates the tilt e^(2 lambda s) exactly
    w = _exp_weights(np.diff(times), 2.0 * params.lam)

    main_int = 0.0
    r1_int = 0.0
    r2_int = 0.0
    for i in range(len(times) - 1):
        row = xi[i]
        lap = _laplacian(row)
        grad_prod = np.zeros_like(row)
        grad_prod[1:-1] = (row[2:] - row[1:-1]) * (row[1:-1] - row[:-2])
        main_int += w[i] * (2.0 * params.lam / za) * inner(row ** 2, phi2, params)
        r1_int += w[i] * (-params.lam / za) * inner(row * lap, phi2, params)
        r2_int += w[i] * za * inner(grad_prod, phi2, params)

    m = martingale_path(times, xi, phi_vals, params)
    qv = float(np.sum(np.diff(m) ** 2))
    bracket = main_int - r1_int - r2_int
    return {"qv": qv, "bracket": bracket, "main": main_int,
            "r1": r1_int, "r2": r2_int, "martingale": m}


def martingale_residual(times: np.ndarray, xi: np.ndarray,
                        phi_vals: np.ndarray, params: ModelParams) -> np.ndarray:
    """Per-interval increments of the test-function martingale."""
    return np.diff(martingale_path(times, xi, phi_vals, params))


def bracket_residual(times: np.ndarray, xi: np.ndarray, phi_vals: np.ndarray,
                     params: ModelParams) -> dict:
    """Empirical quadratic variation against the predicted bracket.

    Same bookkeeping as bracket_terms, with the scalar mismatch added
    under the key "residual".
    """
    out = bracket_terms(times, xi, phi_vals, params)
    out["residual"] = out["qv"] - out["bracket"]
    return out


def mshe_reference(t_end: float, support: float, n_cells: int, dt: float,
                   replicas: int, seed: int,
                   noise_scale: float = 2.0) -> dict:
    """Multiplicative stochastic heat equation on [-A, A], value 1 at the
    boundary, flat initial state xi = 1, noise coefficient 2 xi dW.

    Exponential Euler: the deterministic half-step applies the exact
    Dirichlet semigroup of the half Laplacian to xi - 1; the noise
    half-step multiplies each interior cell by 1 + 2 sqrt(dt/dx) Z.
    With the noise off, xi stays identically 1 to rounding.

    Returns samples of xi(t_end, 0) and h = -log(xi)/2.
    """
    A = float(support)
    M = int(n_cells)
    if M % 2 != 0 or M < 4:
        raise ValueError("n_cells must be even and >= 4")
    dx = 2.0 * A / M
    if dt > dx ** 2 / 2.0:
        raise ValueError("dt must not exceed dx^2 / 2")
    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-9 * max(t_end, 1.0):
        raise ValueError("t_end must be an integer multiple of dt")

    # exact semigroup of (1/2) d^2/dx^2 with Dirichlet walls, one step
    j = np.arange(1, M)
    modes = np.sin(np.pi * np.outer(j, j) / M)
    decay = np.exp(-dt * (1.0 - np.cos(np.pi * j / M)) / dx ** 2)
    prop = (modes * decay) @ modes.T * (2.0 / M)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6d736865]))
    v = np.zeros((replicas, M - 1))
    amp = noise_scale * np.sqrt(dt / dx)
    for _ in range(n_steps):
        if noise_scale != 0.0:
            z = rng.standard_normal((replicas, M - 1))
            v = v + amp * (1.0 + v) * z
        v = v @ prop
    xi0 = 1.0 + v[:, M // 2 - 1]
    xi0 = np.maximum(xi0, 1e-12)
    return {"xi": xi0, "h": -np.log(xi0) / 2.0, "h_unhalved": -np.log(xi0),
            "dx": dx, "dt": dt, "n_steps": n_steps}


def height_samples(params: ModelParams, t_macro: float, replicas: int,
                   seed: int, initial: np.ndarray | None = None) -> np.ndarray:
    """Centered height at the midpoint on the fast clock, per replica:
    h^N = gamma S(t, N) - lambda t, started from the flat bridge."""
    from . import dynamics
    from .model import flat_initial

    if initial is None:
        initial = flat_initial(params.N)
    sched = dynamics.Schedule.from_macro([t_macro], "kpz", params)
    out = np.empty(replicas)
    for r in range(replicas):
        traj = dynamics.simulate(params, initial, sched, seed, replica=r)
        out[r] = params.gamma * traj.heights[-1, params.N] - params.lam * t_macro
    return out


def kpz_compare(params_list, t_macro: float, replicas: int, seed: int,
                reference: dict | None = None, **mshe_kwargs) -> dict:
    """Distributional comparison of midpoint heights across system sizes
    and against the stochastic heat equation reference.

    Returns per-size samples, consecutive two-sample KS distances, and
    KS distances to -log(xi)/2 under the reference measure.
    """
    from scipy import stats

    if reference is None:
        reference = mshe_reference(t_end=t_macro, replicas=max(replicas, 2000),
                                   seed=seed + 1, **mshe_kwargs)
    samples = {}
    for i, p in enumerate(params_list):
        samples[p.N] = height_samples(p, t_macro, replicas, seed + 7 * i)
    sizes = sorted(samples)
    ks_between = []
    for a, b in zip(sizes, sizes[1:]):
        ks_between.append(float(stats.ks_2samp(samples[a], samples[b]).statistic))
    ks_to_ref = {n: float(stats.ks_2samp(samples[n], reference["h"]).statistic)
                 for n in sizes}
    ks_to_ref_unhalved = {
        n: float(stats.ks_2samp(samples[n], reference["h_unhalved"]).statistic)
        for n in sizes}
    return {"samples": samples, "ks_between": ks_between,
            "ks_to_reference": ks_to_ref,
            "ks_to_reference_unhalved": ks_to_ref_unhalved,
            "reference": reference}


def equilibrium_stationarity(params: ModelParams, t_macro_list,
                             replicas: int, seed: int,
                             x0: float = 0.0) -> dict:
    """Evolve exact equilibrium samples on the diffusive clock and read
    off the centered zoomed field at x0 at each requested time.

    Returns samples u(t, x0) per time plus the limiting variance at x0.
    """
    from . import dynamics

    table = equilibrium.build_partition_table(params)
    starts = equilibrium.sample_mu(table, replicas, seed)
    sched = dynamics.Schedule.from_macro(t_macro_list, "equilibrium", params)
    x_arr = np.array([x0])
    out = np.empty((len(t_macro_list), replicas))
    for r in range(replicas):
        traj = dynamics.simulate(params, starts[r], sched, seed + 1, replica=r)
        for i in range(len(t_macro_list)):
            out[i, r] = equilibrium.rescale_u(traj.heights[i], params, x_arr)[0]
    return {"times": np.asarray(t_macro_list, dtype=np.float64),
            "u_samples": out,
            "limit_variance": equilibrium.balpha_covariance(x0, x0)}
