"""Sample the area-tilted bridge measure and compare the zoomed field's
covariance with its closed-form limit.

Run as: python3 demos/equilibrium_measure.py
"""

import numpy as np

from wasep import equilibrium, model

params = model.make_params(256, 0.5)
print(f"2N = {2 * params.N}, alpha = {params.alpha}, gamma = {params.gamma:.4f}")

table = equilibrium.build_partition_table(params)
print(f"log Z = {equilibrium.log_partition_function(table):.4f}")

samples = equilibrium.sample_mu(table, 4000, seed=7)
grid = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
u = np.stack([equilibrium.rescale_u(s, params, grid) for s in samples])
cov, se = equilibrium.empirical_covariance(u)

print("\n x      y     empirical   closed form   |z|")
for i, x in enumerate(grid):
    for j, y in enumerate(grid):
        if j < i:
            continue
        lim = equilibrium.balpha_covariance(x, y)
        z = abs(cov[i, j] - lim) / se[i, j]
        print(f"{x:5.1f} {y:5.1f}   {cov[i, j]:9.4f}   {lim:9.4f}   {z:5.2f}")

# the deterministic shape: mean height tracks the integrated tanh profile
x, sigma = equilibrium.sigma_curve(params)
mean_S = samples.mean(axis=0)
dev = np.max(np.abs(mean_S - sigma))
print(f"\nmax |mean height - sigma curve| = {dev:.3f} (lattice units)")
