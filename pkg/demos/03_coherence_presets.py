"""
Phase and frequency coherence for the named presets
===================================================

Runs the preset sweeps and plots |r(t)| and |s(t)|. Only the time step of
each preset is fixed; the README explains how the rest of the grid is chosen.
Takes about half a minute.
"""

# %%
import matplotlib.pyplot as plt

from kinetic_kuramoto.config import materialize, run_preset
from kinetic_kuramoto.solver import evolve, init_density


def run(name):
    out = {}
    for cfg in run_preset(name):
        params, grid, g, initial = materialize(cfg)
        out[cfg.label] = evolve(init_density(initial, grid), params, g, grid.n_t)
    return out


# %%
# Stronger coupling gives more phase coherence.
fig, axes = plt.subplots(1, 3, figsize=(13, 3.5))
for label, res in run("fig1").items():
    axes[0].plot(res.t, res.abs_r, label=label.split("_", 1)[1])
    print(label, "late |r| =", round(res.window_mean("abs_r", 8, 10), 3))
axes[0].set_title("|r(t)|, K sweep")

# %%
# Heavier oscillators lock their frequencies more strongly.
for label, res in run("fig4").items():
    axes[1].plot(res.t, res.abs_s, label=label.split("_", 1)[1])
    print(label, "late |s| =", round(res.window_mean("abs_s", 8, 10), 3))
axes[1].set_title("|s(t)|, m sweep")

# %%
# Two initial data with the same parameters.
for label, res in run("fig78").items():
    axes[2].plot(res.t, res.abs_r, label=label.split("=", 1)[1])
axes[2].set_title("|r(t)|, two initial data")

for ax in axes:
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig("coherence_presets.png", dpi=120)
