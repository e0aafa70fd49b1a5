"""Boundary behaviour of the finite-volume entropy solver: the Dirichlet
ghost states act exactly like zero-flux walls, and the scheme contracts
in L1.

Run as: python3 demos/burgers_boundaries.py
"""

import numpy as np

from wasep import burgers
from wasep.burgers import BoundaryMode, CellField

M = 200
rng = np.random.default_rng(3)

rho = CellField(rng.random(M))
a = burgers.solve(rho, 0.5, BoundaryMode.ZERO_FLUX)
b = burgers.solve(rho, 0.5, BoundaryMode.DIRICHLET_BLN)
print("zero-flux vs Dirichlet ghosts, random data:",
      "bit-identical" if np.array_equal(a.values, b.values) else "DIFFER")

u = CellField(rng.random(M))
v = CellField(rng.random(M))
d0 = np.abs(u.values - v.values).sum() / M
ut = burgers.solve(u, 0.5)
vt = burgers.solve(v, 0.5)
d1 = np.abs(ut.values - vt.values).sum() / M
print(f"L1 distance: {d0:.5f} -> {d1:.5f} (contraction)")

flat = CellField(np.full(M, 0.5))
for t in (0.25, 0.5):
    out = burgers.solve(flat, t)
    m = burgers.integrated_height(out)
    x = np.arange(M + 1) / M
    exact = np.minimum(np.minimum(x, 1.0 - x), t)
    print(f"flat data, t = {t}: sup height error = {np.abs(m - exact).max():.5f}"
          f"  (bound {2.5 / M:.5f})")
