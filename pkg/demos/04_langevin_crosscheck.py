"""
Finite-N oscillators against the kinetic equation
=================================================

Sample oscillators from the same initial density, integrate the noisy
second-order dynamics, and compare the ensemble-averaged |r_N(t)| with the
kinetic |r(t)|.
"""

# %%
import numpy as np
import matplotlib.pyplot as plt

from kinetic_kuramoto.langevin import run_langevin, sample_ensemble
from kinetic_kuramoto.model import ModelParams, build_frequency_distribution, build_grid
from kinetic_kuramoto.solver import evolve, init_density, paper_default

params = ModelParams(m=1.0, D=1.0, K=6.0)
grid = build_grid(params, 0.2, 0.02, 4.0, T=10.0)
g = build_frequency_distribution({"kind": "point", "at": 0.0}, grid)

kinetic = evolve(init_density("paper-default", grid), params, g, grid.n_t)

# %%
runs = []
for seed in range(8):
    ens = sample_ensemble(paper_default, g, N=5000, seed=seed, G_omega=grid.G_omega)
    series, _ = run_langevin(ens, params, grid.d_t, grid.n_t)
    runs.append(series.abs_r)
mean = np.mean(runs, axis=0)
print("RMS difference:", np.sqrt(np.mean((mean - kinetic.abs_r) ** 2)))

# %%
plt.plot(kinetic.t, kinetic.abs_r, "k-", label="kinetic")
plt.plot(series.t, mean, "r--", label="8 x 5000 oscillators")
plt.fill_between(series.t, np.min(runs, axis=0), np.max(runs, axis=0), color="r", alpha=0.2)
plt.xlabel("t")
plt.ylabel("|r|")
plt.legend()
plt.savefig("langevin_crosscheck.png", dpi=120)
