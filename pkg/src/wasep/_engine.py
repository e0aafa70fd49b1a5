"""Numba event loops for the corner-growth and coupled dynamics.

All randomness comes from an inlined splitmix64 generator so that runs
are bit-reproducible across platforms; per-replica streams are derived
from (master seed, replica index) with the same mixing function.  Rates
are expressed in unsped microscopic time; callers translate macroscopic
observation times before building schedules.
"""

from __future__ import annotations

import numpy as np
from numba import njit

RNG_ALGORITHM = "splitmix64"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _next_u64(state):
    state[0] = state[0] + _GOLDEN
    return _mix64(state[0])


@njit(cache=True, inline="always")
def _next_float(state):
    # 53-bit mantissa in [0, 1)
    return (_next_u64(state) >> np.uint64(11)) * 1.1102230246251565e-16


def stream_seed(master_seed: int, replica: int) -> int:
    """Derive an independent 64-bit stream seed for one replica."""
    mask = (1 << 64) - 1
    z = (int(master_seed) + int(_GOLDEN) * (replica + 1)) & mask
    z = ((z ^ (z >> 30)) * int(_MIX1)) & mask
    z = ((z ^ (z >> 27)) * int(_MIX2)) & mask
    return z ^ (z >> 31)


@njit(cache=True, inline="always")
def _corner_class(h, k):
    lap = h[k + 1] - 2 * h[k] + h[k - 1]
    if lap == 2:
        return 1  # down corner, flips up at rate p
    if lap == -2:
        return 2  # up corner, flips down at rate 1-p
    return 0


@njit(cache=True, nogil=True)
def simulate_bridge(heights, p, schedule, seed):
    """Exact CTMC of the corner dynamics with O(1) event selection.

    ``heights`` is modified in place; snapshots of shape
    (len(schedule), len(heights)) are recorded at the scheduled times.
    Returns (snapshots, event_count).
    """
    n_sites = len(heights) - 1          # 2N
    q = 1.0 - p
    state = np.empty(1, dtype=np.uint64)
    state[0] = np.uint64(seed)

    # swap-remove corner registries
    down = np.empty(n_sites, dtype=np.int64)
    up = np.empty(n_sites, dtype=np.int64)
    cls = np.zeros(n_sites + 1, dtype=np.int8)
    idx = np.zeros(n_sites + 1, dtype=np.int64)
    n_down = 0
    n_up = 0
    for k in range(1, n_sites):
        c = _corner_class(heights, k)
        cls[k] = c
        if c == 1:
            down[n_down] = k
            idx[k] = n_down
            n_down += 1
        elif c == 2:
            up[n_up] = k
            idx[k] = n_up
            n_up += 1

    n_sched = len(schedule)
    snapshots = np.empty((n_sched, n_sites + 1), dtype=np.int32)
    si = 0
    t = 0.0
    events = 0
    while si < n_sched:
        total = p * n_down + q * n_up
        if total <= 0.0:
            while si < n_sched:
                snapshots[si] = heights
                si += 1
            break
        u = _next_float(state)
        if u <= 0.0:
            u = 1e-300
        t_next = t + (-np.log(u)) / total
        while si < n_sched and schedule[si] < t_next:
            snapshots[si] = heights
            si += 1
        if si >= n_sched:
            break
        # pick the flip site
        r = _next_float(state) * total
        if r < p * n_down:
            k = down[np.int64(r / p) % n_down]
            heights[k] += 2
        else:
            k = up[np.int64((r - p * n_down) / q) % n_up]
            heights[k] -= 2
        events += 1
        t = t_next
        for s in range(k - 1, k + 2):
            if s < 1 or s > n_sites - 1:
                continue
            new_c = _corner_class(heights, s)
            old_c = cls[s]
            if new_c == old_c:
                continue
            if old_c == 1:
                j = idx[s]
                n_down -= 1
                down[j] = down[n_down]
                idx[down[j]] = j
            elif old_c == 2:
                j = idx[s]
                n_up -= 1
                up[j] = up[n_up]
                idx[up[j]] = j
            if new_c == 1:
                down[n_down] = s
                idx[s] = n_down
                n_down += 1
            elif new_c == 2:
                up[n_up] = s
                idx[s] = n_up
                n_up += 1
            cls[s] = new_c
    return snapshots, events


@njit(cache=True, nogil=True)
def sign_change_count(eta, zeta):
    """Minimal number of constant-sign clusters covering all sites."""
    n = 1
    sign = 0
    for k in range(len(eta)):
        d = np.int64(eta[k]) - np.int64(zeta[k])
        if d == 0:
            continue
        if sign == 0:
            sign = d
        elif d != sign:
            n += 1
            sign = d
    return n


@njit(cache=True, nogil=True)
def simulate_coupled_pair(eta, zeta, p, c, schedule, seed):
    """Basic coupling of the zero-flux and reservoir species.

    Uniformisation: each bond can spend at most total rate p + (1-p) = 1
    (leftward attempts at rate p, rightward at 1-p) and the two boundary
    clocks of zeta at most (2p-1).  Events are thinned to the exact
    generator rates.  Sign changes are recounted after every accepted
    boundary event and at every snapshot.

    Returns (eta_snaps, zeta_snaps, events, boundary_events, n0, max_n).
    """
    n_sites = len(eta)
    q = 1.0 - p
    drift = 2.0 * p - 1.0
    state = np.empty(1, dtype=np.uint64)
    state[0] = np.uint64(seed)

    total = (n_sites - 1) + drift
    n_sched = len(schedule)
    eta_snaps = np.empty((n_sched, n_sites), dtype=np.uint8)
    zeta_snaps = np.empty((n_sched, n_sites), dtype=np.uint8)
    si = 0
    t = 0.0
    events = 0
    boundary_events = 0
    n0 = sign_change_count(eta, zeta)
    max_n = n0
    while si < n_sched:
        u = _next_float(state)
        if u <= 0.0:
            u = 1e-300
        t_next = t + (-np.log(u)) / total
        while si < n_sched and schedule[si] < t_next:
            eta_snaps[si] = eta
            zeta_snaps[si] = zeta
            n = sign_change_count(eta, zeta)
            if n > max_n:
                max_n = n
            si += 1
        if si >= n_sched:
            break
        t = t_next
        r = _next_float(state) * total
        if r < n_sites - 1:
            j = np.int64(r)
            if j > n_sites - 2:
                j = n_sites - 2
            f = r - j
            if f < p:
                # leftward attempt across bond (j, j+1): jump j+1 -> j
                g = f / p
                be = 1 if (eta[j + 1] == 1 and eta[j] == 0) else 0
                bz = 1 if (zeta[j + 1] == 1 and zeta[j] == 0) else 0
                bmin = be * bz
                if g < bmin:
                    eta[j + 1] = 0
                    eta[j] = 1
                    zeta[j + 1] = 0
                    zeta[j] = 1
                    events += 1
                elif g < be:
                    eta[j + 1] = 0
                    eta[j] = 1
                    events += 1
                elif g < be + bz - bmin:
                    zeta[j + 1] = 0
                    zeta[j] = 1
                    events += 1
            else:
                # rightward attempt: jump j -> j+1
                g = (f - p) / q
                be = 1 if (eta[j] == 1 and eta[j + 1] == 0) else 0
                bz = 1 if (zeta[j] == 1 and zeta[j + 1] == 0) else 0
                bmin = be * bz
                if g < bmin:
                    eta[j] = 0
                    eta[j + 1] = 1
                    zeta[j] = 0
                    zeta[j + 1] = 1
                    events += 1
                elif g < be:
                    eta[j] = 0
                    eta[j + 1] = 1
                    events += 1
                elif g < be + bz - bmin:
                    zeta[j] = 0
                    zeta[j + 1] = 1
                    events += 1
        else:
            rb = (r - (n_sites - 1)) / drift
            if rb < 1.0 - c:
                if zeta[0] == 1:
                    zeta[0] = 0
                    events += 1
                    boundary_events += 1
                    n = sign_change_count(eta, zeta)
                    if n > max_n:
                        max_n = n
            else:
                if zeta[n_sites - 1] == 0:
                    zeta[n_sites - 1] = 1
                    events += 1
                    boundary_events += 1
                    n = sign_change_count(eta, zeta)
                    if n > max_n:
                        max_n = n
    return eta_snaps, zeta_snaps, events, boundary_events, n0, max_n
