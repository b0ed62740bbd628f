"""
Checking the solver against an exact solution
=============================================

Without coupling and with m = D = 1 the kinetic equation is linear, and a
Gaussian initial density stays Gaussian: the mean follows the damped
characteristics and the covariance grows by twice the closed-form C(t).
"""

# %%
import math

import numpy as np
import matplotlib.pyplot as plt

from kinetic_kuramoto.kernel import GaussianDatum, linear_oracle
from kinetic_kuramoto.model import ModelParams, build_frequency_distribution, build_grid
from kinetic_kuramoto.solver import evolve, init_density

params = ModelParams(m=1.0, D=1.0, K=0.0)
datum = GaussianDatum(mean=(0.5, math.pi), cov=((0.25, 0.0), (0.0, 0.25)))

# %%
# Refine d_t by halves and keep d_omega**2 proportional to d_t.
errors = []
for dt in (0.01, 0.005, 0.0025):
    h = math.sqrt(4 * dt)
    grid = build_grid(params, h, dt, h * math.ceil(5 / h), T=1.0)
    g = build_frequency_distribution({"kind": "point", "at": 0.0}, grid)
    res = evolve(init_density(datum, grid), params, g, grid.n_t)
    W, TH = np.meshgrid(grid.omega, grid.theta, indexing="ij")
    exact = linear_oracle(datum, res.final.t, params=params)(W, TH)
    errors.append(np.abs(res.final.values[:, :, 0] - exact).sum() * grid.cell)
    print(f"d_t={dt}: L1 error {errors[-1]:.3e}")

print("observed orders:", [round(math.log2(a / b), 2) for a, b in zip(errors, errors[1:])])

# %%
# The theta marginal at t = 1 next to the exact one (last grid).
num = res.final.values[:, :, 0].sum(axis=0) * grid.d_omega
ref = exact.sum(axis=0) * grid.d_omega
plt.plot(grid.theta, ref, "k-", label="exact")
plt.plot(grid.theta[::200], num[::200], "o", ms=3, label="scheme")
plt.xlabel("theta")
plt.legend()
plt.savefig("linear_oracle.png", dpi=120)
