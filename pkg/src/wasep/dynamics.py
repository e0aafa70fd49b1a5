"""Driving the microscopic dynamics and reading off its trajectories.

The event loops live in ``_engine``; this module owns the schedule and
trajectory containers, the time-scale translations between macroscopic
and microscopic clocks, local averaging diagnostics, and the trajectory
serialization formats (CSV and a small binary container).
"""

from __future__ import annotations

import itertools
import json
import struct
from dataclasses import dataclass

import numpy as np

from . import _engine
from .model import HEIGHT_DTYPE, ModelParams, is_valid_bridge

TIME_SCALINGS = {
    "hydro": lambda n2, alpha: float(n2) ** (1.0 + alpha),
    "kpz": lambda n2, alpha: float(n2) ** (4.0 * alpha),
    "equilibrium": lambda n2, alpha: float(n2) ** (2.0 * alpha),
    "micro": lambda n2, alpha: 1.0,
}

TRAJ_MAGIC = b"WASP"
TRAJ_VERSION = 1


def macro_time_to_micro(t: float, scaling: str, params: ModelParams) -> float:
    """Convert a macroscopic time to unsped microscopic time."""
    try:
        factor = TIME_SCALINGS[scaling]
    except KeyError:
        raise ValueError(f"unknown time scaling {scaling!r}") from None
    if t < 0:
        raise ValueError("time must be nonnegative")
    return t * factor(2 * params.N, params.alpha)


@dataclass(frozen=True)
class Schedule:
    """Sorted microscopic observation times; the horizon is the last one."""

    times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("schedule needs at least one observation time")
        if np.any(times < 0) or np.any(np.diff(times) < 0):
            raise ValueError("observation times must be sorted and >= 0")
        object.__setattr__(self, "times", times)

    @classmethod
    def from_macro(cls, macro_times, scaling: str, params: ModelParams):
        micro = [macro_time_to_micro(t, scaling, params) for t in macro_times]
        return cls(np.asarray(micro))

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


@dataclass
class Trajectory:
    """Snapshots of one corner-growth run plus reproducibility metadata."""

    params: ModelParams
    times: np.ndarray
    heights: np.ndarray           # (n_times, 2N+1) int32
    seed: int
    event_count: int
    rng_algorithm: str = _engine.RNG_ALGORITHM

    def occupations(self) -> np.ndarray:
        return ((np.diff(self.heights, axis=1) + 1) // 2).astype(np.uint8)


def simulate(params: ModelParams, initial: np.ndarray, schedule: Schedule,
             seed: int, replica: int = 0) -> Trajectory:
    """Run the exact corner dynamics and record scheduled snapshots."""
    initial = np.asarray(initial, dtype=HEIGHT_DTYPE)
    if len(initial) != 2 * params.N + 1 or not is_valid_bridge(initial):
        raise ValueError("initial condition is not a valid bridge of size 2N")
    work = initial.astype(np.int64).copy()
    snaps, events = _engine.simulate_bridge(
        work, params.p, schedule.times,
        np.uint64(_engine.stream_seed(seed, replica)))
    return Trajectory(params=params, times=schedule.times.copy(),
                      heights=snaps, seed=seed, event_count=int(events))


def density_profile(heights: np.ndarray, params: ModelParams,
                    n_cells: int) -> np.ndarray:
    """Particle mass per uniform cell of [0, 1], normalised by 2N.

    Site k sits at position k/2N; the returned masses sum to 1/2 for any
    bridge since exactly N of the 2N sites are occupied.
    """
    n2 = 2 * params.N
    if n_cells < 1:
        raise ValueError("need at least one cell")
    eta = (np.diff(np.asarray(heights)) + 1) // 2
    sites = np.arange(1, n2 + 1)
    cells = np.minimum(((sites - 0.5) / n2 * n_cells).astype(np.int64),
                       n_cells - 1)
    return np.bincount(cells, weights=eta, minlength=n_cells) / n2


def rescaled_height(heights: np.ndarray, params: ModelParams):
    """Macroscopic height profile: x -> S(2N x)/2N, linearly interpolated."""
    n2 = 2 * params.N
    x = np.arange(n2 + 1) / n2
    vals = np.asarray(heights, dtype=np.float64) / n2
    return lambda xs: np.interp(xs, x, vals)


@dataclass
class CoupledTrajectory:
    """Joint snapshots of the bridge species and the reservoir species."""

    params: ModelParams
    reservoir_density: float
    times: np.ndarray
    eta: np.ndarray               # (n_times, 2N) uint8
    zeta: np.ndarray
    seed: int
    event_count: int
    boundary_event_count: int
    initial_sign_changes: int
    max_sign_changes: int
    rng_algorithm: str = _engine.RNG_ALGORITHM


def simulate_coupled(params: ModelParams, reservoir_density: float,
                     eta0: np.ndarray, zeta0: np.ndarray,
                     schedule: Schedule, seed: int,
                     replica: int = 0) -> CoupledTrajectory:
    """Basic coupling of the two species, with sign-change tracking.

    The bridge species eta keeps zero-flux boundaries; zeta additionally
    exits at site 1 at rate (2p-1)(1-c) zeta(1) and enters at site 2N at
    rate (2p-1) c (1-zeta(2N)), both on the unsped clock.
    """
    n2 = 2 * params.N
    eta0 = np.asarray(eta0, dtype=np.uint8)
    zeta0 = np.asarray(zeta0, dtype=np.uint8)
    if eta0.shape != (n2,) or zeta0.shape != (n2,):
        raise ValueError("occupation arrays must have length 2N")
    if not 0.0 <= reservoir_density <= 1.0:
        raise ValueError("reservoir density must lie in [0, 1]")
    eta = eta0.copy()
    zeta = zeta0.copy()
    out = _engine.simulate_coupled_pair(
        eta, zeta, params.p, reservoir_density, schedule.times,
        np.uint64(_engine.stream_seed(seed, replica)))
    eta_snaps, zeta_snaps, events, bdry, n0, max_n = out
    return CoupledTrajectory(
        params=params, reservoir_density=reservoir_density,
        times=schedule.times.copy(), eta=eta_snaps, zeta=zeta_snaps,
        seed=seed, event_count=int(events),
        boundary_event_count=int(bdry),
        initial_sign_changes=int(n0), max_sign_changes=int(max_n))


def sign_changes(eta: np.ndarray, zeta: np.ndarray) -> int:
    """Minimal cluster count n(eta, zeta): 1 plus the number of sign
    alternations along the discrepancy sequence eta - zeta."""
    eta = np.asarray(eta, dtype=np.uint8)
    zeta = np.asarray(zeta, dtype=np.uint8)
    if eta.shape != zeta.shape:
        raise ValueError("shape mismatch")
    return int(_engine.sign_change_count(eta, zeta))


def local_average_polynomial(phi, r: int):
    """Coefficients of a -> E_a[phi] under product Bernoulli(a) marginals.

    Returns the value table on all 2^r words and a callable in a.
    """
    if r < 1:
        raise ValueError("window size must be >= 1")
    words = np.array(list(itertools.product((0, 1), repeat=r)), dtype=np.uint8)
    values = np.array([float(phi(w)) for w in words])
    ones = words.sum(axis=1)

    def tilde(a):
        a = np.asarray(a, dtype=np.float64)
        shape = a.shape
        a = a.reshape(-1, 1)
        weights = a ** ones * (1.0 - a) ** (r - ones)
        return (weights @ values).reshape(shape)

    return values, tilde


def replacement_statistic(eta: np.ndarray, phi, r: int, ell: int):
    """Gap |window average of phi - tilde_phi(window density)| at all sites.

    Windows are periodic with half-width ell; the shifted observable at
    anchor k reads sites k+1 .. k+r (mod 2N, 1-based). Returns an array
    indexed by anchor site k = 1 .. 2N.
    """
    eta = np.asarray(eta, dtype=np.float64)
    n2 = eta.size
    if not 1 <= ell or 2 * ell + 1 > n2:
        raise ValueError("window does not fit on the ring")
    values, tilde = local_average_polynomial(phi, r)

    # phi evaluated on every shifted word, via bit-packing of r sites
    shifted = np.empty(n2, dtype=np.int64)
    packed = np.zeros(n2, dtype=np.int64)
    for j in range(r):
        packed = 2 * packed + eta.astype(np.int64).take(
            np.arange(j, n2 + j) % n2, mode="wrap")[:n2]
    phi_at = values[packed]

    kernel = np.ones(2 * ell + 1) / (2 * ell + 1)
    def ring_mean(v):
        ext = np.concatenate([v[-2 * ell:], v, v[:2 * ell]])
        return np.convolve(ext, kernel, mode="valid")[ell:ell + n2]

    # anchor k (1-based) reads shifted words at ring slot k mod 2N and
    # site densities at slot k-1, hence the one-step roll
    avg_phi = np.roll(ring_mean(phi_at), -1)
    avg_eta = ring_mean(eta)
    return np.abs(avg_phi - tilde(avg_eta))


# --- trajectory serialization -------------------------------------------

def trajectory_to_csv(traj: Trajectory) -> str:
    """One row per snapshot: time then the 2N+1 heights."""
    lines = []
    for t, row in zip(traj.times, traj.heights):
        lines.append(",".join([repr(float(t))] + [str(int(v)) for v in row]))
    return "\n".join(lines) + "\n"


def trajectory_from_csv(text: str, params: ModelParams) -> tuple:
    times = []
    rows = []
    for line in text.strip().splitlines():
        parts = line.split(",")
        if len(parts) != 2 * params.N + 2:
            raise ValueError("row length does not match 2N+2")
        times.append(float(parts[0]))
        rows.append([int(v) for v in parts[1:]])
    return np.array(times), np.array(rows, dtype=HEIGHT_DTYPE)


def trajectory_metadata(traj: Trajectory) -> dict:
    return {
        "N": traj.params.N,
        "alpha": traj.params.alpha,
        "seed": traj.seed,
        "event_count": traj.event_count,
        "rng_algorithm": traj.rng_algorithm,
        "n_snapshots": int(len(traj.times)),
    }


def trajectory_to_binary(traj: Trajectory) -> bytes:
    """Header: magic 'WASP', u32 version, u32 N, f64 alpha; then the
    float64 times and int32 height rows, all little-endian."""
    head = struct.pack("<4sIId", TRAJ_MAGIC, TRAJ_VERSION,
                       traj.params.N, traj.params.alpha)
    body = struct.pack("<Q", len(traj.times))
    body += traj.times.astype("<f8").tobytes()
    body += traj.heights.astype("<i4").tobytes()
    return head + body


def trajectory_from_binary(blob: bytes) -> tuple:
    """Returns (N, alpha, times, heights)."""
    magic, version, n, alpha = struct.unpack_from("<4sIId", blob, 0)
    if magic != TRAJ_MAGIC:
        raise ValueError("bad magic")
    if version != TRAJ_VERSION:
        raise ValueError(f"unsupported version {version}")
    off = struct.calcsize("<4sIId")
    (count,) = struct.unpack_from("<Q", blob, off)
    off += 8
    times = np.frombuffer(blob, dtype="<f8", count=count, offset=off).copy()
    off += 8 * count
    heights = np.frombuffer(blob, dtype="<i4", count=count * (2 * n + 1),
                            offset=off).reshape(count, 2 * n + 1).copy()
    return n, alpha, times, heights
