"""
Grids and the positivity conditions
===================================

The scheme only stays nonnegative when the spacings are small enough for the
given (m, D, K). This walks through the three conditions and shows what
happens to the preset time steps.
"""

# %%
import math

from kinetic_kuramoto.model import (ModelParams, StabilityError, build_grid, reconstruct_grid,
                                    stability_conditions)

params = ModelParams(m=1.0, D=1.0, K=6.0)

# %%
# Each condition is checked separately. With d_omega = 0.2 the largest time
# step is 0.04 / 1.96 and the half-width may not exceed 2D/(m d_omega) - K = 4.
report = stability_conditions(params, d_omega=0.2, d_t=0.02, G_omega=4.0)
print(report.describe())

# %%
# The theta spacing is tied to the other two: d_theta = d_omega * d_t, and
# n_theta must close the circle. build_grid rounds n_theta and nudges d_t.
grid = build_grid(params, 0.2, 0.02, 4.0, T=10.0)
print(grid.n_omega, grid.n_theta, grid.d_t, grid.n_theta * grid.d_theta - 2 * math.pi)

# %%
# The presets only fix d_t. At d_omega = 0.2 the step 0.0317 is too large.
try:
    build_grid(params, 0.2, 0.0317, 4.0, T=10.0)
except StabilityError as exc:
    print(exc)

# %%
# reconstruct_grid searches for a spacing that keeps the preset step, and
# lowers the step only when no spacing admits it.
for p, dt in [(ModelParams(1, 1, 1), 0.0317), (ModelParams(1, 1, 6), 0.0317),
              (ModelParams(2, 1, 6), 0.0079), (ModelParams(1, 0.5, 6), 0.0317)]:
    g = reconstruct_grid(p, dt, T=10.0)
    print(f"m={p.m:g} D={p.D:g} K={p.K:g}: d_omega={g.d_omega:.4g} G={g.G_omega:g} "
          f"d_t={g.d_t:.5f} (asked {dt})")
