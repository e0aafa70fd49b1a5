"""Discrete bridges, occupation variables and model constants.

The state space consists of lattice paths ("bridges") from (0, 0) to
(2N, 0) with increments +-1, equivalently particle configurations with
exactly N particles on {1, ..., 2N}.  The asymmetry of the dynamics is
parametrised by an exponent alpha in (0, 1); all derived constants
(up-flip weight p, tilt gamma, diffusive speed c, drift lambda) are
collected in :class:`ModelParams`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "make_params",
    "area",
    "discrete_laplacian",
    "flip",
    "corner_sets",
    "flat_initial",
    "maximal_initial",
    "is_valid_bridge",
    "height_to_occupation",
    "occupation_to_height",
    "bridge_to_csv_row",
    "bridge_from_csv_row",
    "occupation_to_hex",
    "occupation_from_hex",
    "NoCornerError",
]

HEIGHT_DTYPE = np.int32


class NoCornerError(ValueError):
    """Raised when a flip is requested at a site without a corner."""


@dataclass(frozen=True)
class ModelParams:
    """Lattice size, asymmetry exponent and derived constants.

    Attributes
    ----------
    N : int
        Half the lattice length; the bridge lives on {0, ..., 2N}.
    alpha : float
        Asymmetry exponent, in (0, 1).
    p : float
        Up-flip probability weight, p/(1-p) = exp(4/(2N)^alpha).
    gamma : float
        Area tilt, gamma = (1/2) log(p/(1-p)) = 2 (2N)^(-alpha).
    c : float
        Heat-kernel speed constant, (2N)^(4 alpha) / (2 cosh gamma).
    lam : float
        Drift constant, c (e^gamma - 2 + e^(-gamma)).
    """

    N: int
    alpha: float
    p: float
    gamma: float
    c: float
    lam: float

    @property
    def sites(self) -> int:
        """Number of particle sites, 2N."""
        return 2 * self.N


def make_params(N: int, alpha: float) -> ModelParams:
    """Build the full constant set for lattice size 2N and exponent alpha.

    gamma is evaluated in closed form, p through expit(4 (2N)^(-alpha))
    which is exact to 1 ulp, and (c, lam) via expm1 so that the chain is
    accurate for all desk-scale N.
    """
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    gamma = 2.0 * (2.0 * N) ** (-alpha)
    # p = e^{2 gamma} / (1 + e^{2 gamma}) = 1 / (1 + e^{-2 gamma})
    p = 1.0 / (1.0 + math.exp(-2.0 * gamma))
    c = (2.0 * N) ** (4.0 * alpha) / (math.exp(gamma) + math.exp(-gamma))
    # e^g - 2 + e^{-g} = expm1(g) + expm1(-g), exact cancellation-free form
    lam = c * (math.expm1(gamma) + math.expm1(-gamma))
    return ModelParams(N=N, alpha=alpha, p=p, gamma=gamma, c=c, lam=lam)


def is_valid_bridge(S: np.ndarray) -> bool:
    """Check pinned endpoints and unit increments."""
    S = np.asarray(S)
    if S.ndim != 1 or len(S) < 3 or len(S) % 2 == 0:
        return False
    if S[0] != 0 or S[-1] != 0:
        return False
    return bool(np.all(np.abs(np.diff(S)) == 1))


def area(S: np.ndarray) -> int:
    """Signed area under the bridge, sum of S(k) for k = 1..2N."""
    return int(np.sum(S[1:], dtype=np.int64))


def discrete_laplacian(S: np.ndarray, k: int) -> int:
    """S(k+1) - 2 S(k) + S(k-1); +-2 at corners, 0 on straight segments."""
    if not (1 <= k <= len(S) - 2):
        raise IndexError(f"site {k} out of range [1, {len(S) - 2}]")
    return int(S[k + 1]) - 2 * int(S[k]) + int(S[k - 1])


def flip(S: np.ndarray, k: int) -> np.ndarray:
    """Flip the corner at site k, returning a new bridge.

    A down corner (local minimum) moves up by 2, an up corner (local
    maximum) moves down by 2.  The flip is an involution.
    """
    lap = discrete_laplacian(S, k)
    if lap == 0:
        raise NoCornerError(f"no corner at site {k}")
    out = np.array(S, dtype=HEIGHT_DTYPE, copy=True)
    out[k] += lap
    return out


def corner_sets(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sites of down corners (flip rate p) and up corners (flip rate 1-p)."""
    lap = S[2:].astype(np.int64) - 2 * S[1:-1].astype(np.int64) + S[:-2]
    interior = np.arange(1, len(S) - 1)
    return interior[lap == 2], interior[lap == -2]


def flat_initial(N: int) -> np.ndarray:
    """Lowest sawtooth bridge, S(k) = k mod 2."""
    return (np.arange(2 * N + 1) % 2).astype(HEIGHT_DTYPE)


def maximal_initial(N: int) -> np.ndarray:
    """Maximal bridge, S(k) = k ^ (2N - k)."""
    k = np.arange(2 * N + 1)
    return np.minimum(k, 2 * N - k).astype(HEIGHT_DTYPE)


def height_to_occupation(S: np.ndarray) -> np.ndarray:
    """eta(k) = (S(k) - S(k-1) + 1) / 2 for k = 1..2N."""
    inc = np.diff(S)
    return ((inc + 1) // 2).astype(np.uint8)


def occupation_to_height(eta: np.ndarray) -> np.ndarray:
    """Inverse of :func:`height_to_occupation`; requires N particles.

    Raises ValueError when the particle number does not close the bridge.
    """
    eta = np.asarray(eta)
    if len(eta) % 2 != 0:
        raise ValueError("occupation length must be even")
    total = int(np.sum(eta, dtype=np.int64))
    if 2 * total != len(eta):
        raise ValueError(
            f"occupation has {total} particles on {len(eta)} sites; "
            f"a bridge requires {len(eta) // 2}"
        )
    S = np.empty(len(eta) + 1, dtype=HEIGHT_DTYPE)
    S[0] = 0
    np.cumsum(2 * eta.astype(HEIGHT_DTYPE) - 1, out=S[1:])
    return S


# -- serialization -----------------------------------------------------------
#
# Bridges travel as a CSV row of 2N+1 integers.  Occupations travel as a hex
# string: bits are packed site 1 first (most significant bit of the first
# nibble), zero-padded on the right to a multiple of 4 bits.


def bridge_to_csv_row(S: np.ndarray) -> str:
    return ",".join(str(int(v)) for v in S)


def bridge_from_csv_row(row: str) -> np.ndarray:
    S = np.array([int(v) for v in row.strip().split(",")], dtype=HEIGHT_DTYPE)
    if not is_valid_bridge(S):
        raise ValueError("CSV row does not encode a valid bridge")
    return S


def occupation_to_hex(eta: np.ndarray) -> str:
    bits = "".join("1" if v else "0" for v in eta)
    pad = (-len(bits)) % 4
    bits += "0" * pad
    return "".join(f"{int(bits[i:i + 4], 2):x}" for i in range(0, len(bits), 4))


def occupation_from_hex(text: str, n_sites: int) -> np.ndarray:
    bits = "".join(f"{int(ch, 16):04b}" for ch in text.strip())
    if len(bits) < n_sites:
        raise ValueError("hex string too short for requested site count")
    return np.array([1 if b == "1" else 0 for b in bits[:n_sites]], dtype=np.uint8)
