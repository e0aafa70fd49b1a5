"""Discrete heat kernels with absorbing walls: the eigenexpansion, the
method of images, the whole-line Bessel form, and the classical bounds
that the fluctuation arguments lean on.

Run as: python3 demos/heat_kernel_audit.py
"""

import numpy as np

from wasep import dynamics, heatkernel, model
from wasep.heatkernel import Domain, KernelSpec

params = model.make_params(32, 0.5)
spec = KernelSpec(params=params, domain=Domain.SEGMENT)
rng = np.random.default_rng(1)

dev = 0.0
for _ in range(300):
    t = float(rng.uniform(1e-3, 0.3))
    k = int(rng.integers(1, 64))
    ell = int(rng.integers(0, 65))
    a = heatkernel.dirichlet_kernel_eigen(spec, t, k, ell)
    b = heatkernel.dirichlet_kernel_images(spec, t, k, ell)
    dev = max(dev, abs(float(a) - float(b)))
print(f"eigenexpansion vs images, 300 random (t,k,l): max dev {dev:.2e}")

mid = np.arange(1, 64)
s, t = 0.02, 0.05
lhs = heatkernel.dirichlet_kernel_eigen(spec, s + t, 5, 40)
rhs = np.sum(heatkernel.dirichlet_kernel_eigen(spec, s, 5, mid)
             * heatkernel.dirichlet_kernel_eigen(spec, t, mid, 40))
print(f"semigroup property: |p_(s+t) - p_s p_t| = {abs(lhs - rhs):.2e}")

times = [dynamics.macro_time_to_micro(x, "kpz", params) for x in (0.05, 0.1)]
rows = heatkernel.kernel_bound_audit(params, np.asarray(times), eps=0.25)
print("\nratio                        t(micro)      value")
for r in rows:
    print(f"{r['ratio']:<28s} {r['t']:9.2f}  {r['value']:9.4f}")
