"""Discrete heat kernels on the line and on the segment with absorption.

The continuous-time kernel of a simple random walk sped up by 2c is
computed on Z through the modified-Bessel closed form and on
{0, ..., 2N} (Dirichlet at 0 and 2N) through a finite sine expansion;
a method-of-images series provides an independent representation.  The
barrier and windowed quantities used by the KPZ analysis, and numeric
audits of the classical kernel estimates, live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from .model import ModelParams

__all__ = [
    "Domain",
    "KernelSpec",
    "line_kernel",
    "line_kernel_poisson",
    "dirichlet_kernel_eigen",
    "dirichlet_kernel_images",
    "images_jmax",
    "barrier_b",
    "q_kernel",
    "large_dev_g",
    "line_tail_bound",
    "bulk_window",
    "kernel_bound_audit",
]


class Domain(Enum):
    SEGMENT = "segment"
    LINE = "line"


@dataclass(frozen=True)
class KernelSpec:
    """Walk speed and domain for a kernel family.

    ``speed`` is the total jump rate 2 c_N; each of the two neighbours is
    reached at rate c_N.
    """

    params: ModelParams
    domain: Domain

    @property
    def speed(self) -> float:
        return 2.0 * self.params.c


def line_kernel(spec: KernelSpec, t: float, ell) -> np.ndarray | float:
    """p̄_t(ell) on Z: exp(-2ct) I_ell(2ct), vectorised in ell."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    ell = np.asarray(ell)
    x = spec.speed * t
    if x == 0.0:
        out = (ell == 0).astype(np.float64)
    else:
        out = special.ive(np.abs(ell), x)
    return out if out.ndim else float(out)


def line_kernel_poisson(spec: KernelSpec, t: float, ell: int, rel_tol: float = 1e-14) -> float:
    """Poisson-mixture form of the line kernel, the series oracle.

    Sums exp(-2ct) (2ct)^n / n! * P(SRW_n = ell) with the number of terms
    certified by a Chernoff bound on the Poisson tail.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    m = spec.speed * t
    ell = abs(int(ell))
    if m == 0.0:
        return 1.0 if ell == 0 else 0.0
    n_max = _poisson_tail_cutoff(m, rel_tol)
    total = 0.0
    log_m = math.log(m)
    for n in range(ell, n_max + 1, 2):  # P(SRW_n = ell) = 0 unless n = ell mod 2
        log_poisson = -m + n * log_m - math.lgamma(n + 1)
        log_walk = math.lgamma(n + 1) - math.lgamma((n + ell) // 2 + 1) \
            - math.lgamma((n - ell) // 2 + 1) - n * math.log(2.0)
        total += math.exp(log_poisson + log_walk)
    return total


def _poisson_tail_cutoff(m: float, tol: float) -> int:
    """Smallest n with Poisson(m) tail mass beyond n below tol (Chernoff)."""
    n = int(m) + 1
    while True:
        # P(X >= n) <= exp(-m + n - n log(n/m)) for n > m
        if -m + n - n * math.log(n / m) < math.log(tol):
            return n
        n = max(n + 1, int(1.1 * n))


def dirichlet_kernel_eigen(spec: KernelSpec, t: float, k, ell) -> np.ndarray | float:
    """Sine eigen-expansion of the absorbed kernel on {0, ..., 2N}.

    p_t(k, ell) = (1/N) sum_j sin(pi j k / 2N) sin(pi j ell / 2N)
                  exp(-2 c t (1 - cos(pi j / 2N))),  j = 1..2N-1.
    Exact finite sum; the reference representation.
    """
    N = spec.params.N
    n2 = 2 * N
    k = np.asarray(k)
    ell = np.asarray(ell)
    if np.any(k < 1) or np.any(k > n2 - 1) or np.any(ell < 0) or np.any(ell > n2):
        raise ValueError("sites must satisfy 1 <= k <= 2N-1, 0 <= ell <= 2N")
    j = np.arange(1, n2)
    decay = np.exp(-spec.speed * t * (1.0 - np.cos(np.pi * j / n2)))
    term = (np.sin(np.pi * np.multiply.outer(k, j) / n2)
            * np.sin(np.pi * np.multiply.outer(ell, j) / n2))
    out = (term * decay).sum(axis=-1) / N
    return out if out.ndim else float(out)


def images_jmax(spec: KernelSpec, t: float, tol: float = 1e-12) -> int:
    """Number of image shells needed so the neglected tail is below tol.

    The j-th shell lives at distance >= (4j - 2) N; its mass is bounded
    by the large-deviation tail bound of the line kernel.
    """
    n2 = 2 * spec.params.N
    j = 1
    while j < 10_000:
        a = (4 * j - 2) * spec.params.N
        if t == 0.0 or 4.0 * line_tail_bound(spec, t, a) < tol:
            return j
        j += 1
    return j


def dirichlet_kernel_images(spec: KernelSpec, t: float, k: int, ell: int,
                            j_max: int | None = None) -> float:
    """Method-of-images representation of the absorbed kernel.

    sum over |j| <= j_max of p̄_t(k + 4Nj - ell) - p̄_t(-k + 4Nj - ell).
    With j_max from :func:`images_jmax` the truncation error is certified.
    """
    if j_max is None:
        j_max = images_jmax(spec, t)
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    n2 = 2 * spec.params.N
    js = np.arange(-j_max, j_max + 1)
    pos = line_kernel(spec, t, k + 2 * n2 * js - ell)
    neg = line_kernel(spec, t, -k + 2 * n2 * js - ell)
    return float(np.sum(pos - neg))


def barrier_b(params: ModelParams, t: float, ell) -> np.ndarray | float:
    """Supersolution barrier 2 + exp(lambda t - gamma (ell ^ (2N - ell)))."""
    ell = np.asarray(ell, dtype=np.float64)
    dist = np.minimum(ell, 2 * params.N - ell)
    out = 2.0 + np.exp(params.lam * t - params.gamma * dist)
    return out if out.ndim else float(out)


def q_kernel(params: ModelParams, s: float, t: float, k, ell) -> np.ndarray | float:
    """q_{s,t}(k, ell) = p_{t-s}(k, ell) b(s, k)."""
    if s > t:
        raise ValueError("need s <= t")
    spec = KernelSpec(params=params, domain=Domain.SEGMENT)
    if s == t:
        p = (np.asarray(k) == np.asarray(ell)).astype(np.float64)
        p = p if p.ndim else float(p)
    else:
        p = dirichlet_kernel_eigen(spec, t - s, k, ell)
    out = p * barrier_b(params, s, k)
    return out if np.ndim(out) else float(out)


def large_dev_g(x) -> np.ndarray | float:
    """Large-deviation rate g(x) = sqrt(1 + x^2) - x asinh(x) - 1; even, <= 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.sqrt(1.0 + x * x) - x * np.arcsinh(x) - 1.0
    return out if out.ndim else float(out)


def line_tail_bound(spec: KernelSpec, t: float, a: float) -> float:
    """Chernoff bound on sum_{k >= a} p̄_t(k): exp(2tc g(a / (2tc)))."""
    x = spec.speed * t
    if x == 0.0:
        return 0.0
    return math.exp(x * large_dev_g(a / x))


def bulk_window(params: ModelParams, t: float, eps: float) -> tuple[int, int]:
    """Integer bulk window [lam t / gamma + eps N, 2N - lam t / gamma - eps N].

    Rounded inward; raises ValueError once the window has closed.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    shift = params.lam * t / params.gamma + eps * params.N
    lo = math.ceil(shift) if shift > 0 else 0
    hi = 2 * params.N - lo
    if lo > hi:
        raise ValueError(f"bulk window empty at t={t} (eps={eps})")
    return lo, hi


def kernel_bound_audit(params: ModelParams, times: np.ndarray,
                       eps: float = 0.5) -> list[dict]:
    """Report the dimensionless ratios behind the classical kernel estimates.

    Each row is {'ratio': name, 't': t, 'value': v}; the suprema are
    reported, not asserted against invented constants.
    """
    spec = KernelSpec(params=params, domain=Domain.SEGMENT)
    n2 = 2 * params.N
    ells = np.arange(-2 * n2, 2 * n2 + 1)
    rows = []
    for t in np.atleast_1d(times):
        t = float(t)
        pbar = line_kernel(spec, t, ells)
        ct = params.c * t
        rows.append({"ratio": "pbar0_sqrt_ct", "t": t,
                     "value": float(pbar[ells == 0][0] * math.sqrt(max(ct, 0.0)))})
        grad = np.diff(pbar)
        rows.append({"ratio": "sum_abs_grad_over_2pbar0", "t": t,
                     "value": float(np.sum(np.abs(grad)) /
                                    (2.0 * pbar[ells == 0][0]))})
        rows.append({"ratio": "sum_abs_grad_times_k", "t": t,
                     "value": float(np.sum(np.abs(grad) * np.abs(ells[:-1])))})
        # barrier-weighted kernel mass inside the bulk window
        try:
            lo, hi = bulk_window(params, t, eps)
        except ValueError:
            continue
        ell_mid = params.N
        ks = np.arange(1, n2)
        q = q_kernel(params, 0.0, t, ks, np.full_like(ks, ell_mid))
        rows.append({"ratio": "q_mass_over_b", "t": t,
                     "value": float(np.sum(q) / barrier_b(params, t, ell_mid))})
        # off-bulk decay: sup of q over k outside the half-eps window
        lo2, hi2 = bulk_window(params, t, eps / 2.0)
        outside = (ks < lo2) | (ks > hi2)
        if np.any(outside):
            rows.append({"ratio": "offbulk_q_sup", "t": t,
                         "value": float(np.max(q[outside]))})
    return rows
