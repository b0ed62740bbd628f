"""Explicit positivity-preserving scheme for the inertial Kuramoto kinetic equation.

One step maps ``rho^n`` to ``rho^{n+1}`` by a three-point stencil in omega
applied at the characteristic foot ``theta_j - omega_i d_t``, which on the
lattice is the exact index shift ``j - i``:

    rho^{n+1}[i, j] = A0 rho^n[i, j-i] + Am rho^n[i-1, j-i] + Ap rho^n[i+1, j-i]

    A0 = 1 - 2 D d_t / (m d_omega)**2 + d_t / m
    Am, Ap = D d_t / (m d_omega)**2 -/+ d_t / (2 m d_omega) * (omega_i + Phi[j-i])

Boundary rows ``|omega| = G_omega`` are held at zero.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .meanfield import order_parameters, phi_discrete, slice_masses
from .model import (FrequencyDistribution, GridSpec, ModelParams, SimulationError,
                    ValidationError, validate_stability, StabilityError)

log = logging.getLogger(__name__)


@dataclass
class DensityField:
    """Nodal values ``[n_omega, n_theta, n_Omega]`` on ``grid`` at time ``t``."""

    values: np.ndarray
    grid: GridSpec
    t: float = 0.0

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValidationError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}")

    def masses(self) -> np.ndarray:
        return slice_masses(self.values, self.grid)

    def theta_marginal(self) -> np.ndarray:
        """Density in theta per slice, ``sum_i rho d_omega``, shape (n_theta, n_Omega)."""
        return self.values.sum(axis=0) * self.grid.d_omega

    def omega_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.grid.d_theta

    def copy(self) -> "DensityField":
        return DensityField(self.values.copy(), self.grid, self.t)


@dataclass
class StepReport:
    step: int
    mass: np.ndarray           # per-slice mass before renormalisation
    min_value: float
    boundary_leak: np.ndarray  # per-slice mass pushed into the boundary rows
    tail_mass: np.ndarray      # per-slice mass in |omega| > G_omega / 2

    @property
    def mass_min(self) -> float:
        return float(self.mass.min())

    @property
    def mass_max(self) -> float:
        return float(self.mass.max())


# ---------------------------------------------------------------------------
# initial data

def paper_default(omega, theta):
    return np.exp(-omega ** 2) * (np.sin(theta) + 1.0) / (1.0 + omega ** 2)


def paper_half_sine(omega, theta):
    return np.exp(-omega ** 2) * (np.sin(theta / 2.0) + 1.0) / (1.0 + omega ** 2)


def paper_literal(omega, theta):
    """Initial datum with the ``omega + 1`` denominator, usable only for G_omega < 1."""
    return np.exp(-omega ** 2) * (np.sin(theta) + 1.0) / (omega + 1.0)


INITIAL_PRESETS: dict[str, Callable] = {
    "paper-default": paper_default,
    "paper-half-sine": paper_half_sine,
    "paper-literal": paper_literal,
}


def init_density(preset, grid: GridSpec) -> DensityField:
    """Sample an initial datum at the nodes, clip at 0 and normalise every slice.

    ``preset`` is a name from `INITIAL_PRESETS` or an evaluator
    ``f(omega, theta)``; the same datum is used for every Omega slice.
    """
    if isinstance(preset, str):
        if preset not in INITIAL_PRESETS:
            raise ValidationError(
                f"unknown initial preset {preset!r}; available: {sorted(INITIAL_PRESETS)}")
        if preset == "paper-literal" and grid.G_omega >= 1.0:
            raise ValidationError("paper-literal initial data is singular at omega = -1; "
                                  "it needs G_omega < 1")
        evaluator = INITIAL_PRESETS[preset]
    else:
        evaluator = preset
    W, TH = np.meshgrid(grid.omega, grid.theta, indexing="ij")
    with np.errstate(all="ignore"):
        plane = np.asarray(evaluator(W, TH), dtype=float)
    plane = np.broadcast_to(plane, W.shape)
    if not np.all(np.isfinite(plane)):
        raise ValidationError("initial evaluator returned non-finite values")
    plane = np.clip(plane, 0.0, None)
    plane[0] = 0.0
    plane[-1] = 0.0
    values = np.repeat(plane[:, :, None], grid.n_Omega, axis=2)
    if np.any(slice_masses(values, grid) <= 0):
        raise ValidationError("initial datum vanishes on the grid interior")
    return renormalize(DensityField(values, grid, 0.0))


def renormalize(rho: DensityField) -> DensityField:
    """Scale each Omega slice to unit discrete mass."""
    mass = rho.masses()
    if np.any(~np.isfinite(mass)) or np.any(mass <= 0):
        raise SimulationError(
            "a slice has no mass left; the omega domain is too small for this run")
    return DensityField(rho.values / mass[None, None, :], rho.grid, rho.t)


# ---------------------------------------------------------------------------
# one step

def stencil_coefficients(params: ModelParams, grid: GridSpec, phi: np.ndarray):
    """Return ``(A0, Am, Ap)``; Am and Ap have shape (n_omega, n_theta, n_Omega)
    and are indexed by the source theta column ``j - i``."""
    c = params.D * grid.d_t / (params.m * grid.d_omega) ** 2
    b = grid.d_t / (2.0 * grid.d_omega * params.m)
    drift = b * (grid.omega[:, None, None] + phi[None, :, :])
    A0 = 1.0 - 2.0 * c + grid.d_t / params.m
    return A0, c - drift, c + drift


_SHIFT_CACHE: dict = {}


def _shift_index(grid: GridSpec) -> np.ndarray:
    """Flat gather index sending source column ``j - i`` to target column ``j``."""
    key = (grid.n_omega, grid.n_theta)
    idx = _SHIFT_CACHE.get(key)
    if idx is None:
        i_phys = np.arange(grid.n_omega) - grid.i_max
        j = np.arange(grid.n_theta)
        src = (j[None, :] - i_phys[:, None]) % grid.n_theta
        idx = (np.arange(grid.n_omega)[:, None] * grid.n_theta + src).ravel()
        if len(_SHIFT_CACHE) > 16:
            _SHIFT_CACHE.clear()
        _SHIFT_CACHE[key] = idx
    return idx


def la_step(rho: DensityField, phi: np.ndarray, params: ModelParams,
            step: int = 0) -> tuple[DensityField, StepReport]:
    """Advance one time step with the drift shift ``phi`` frozen.

    The returned field is not renormalised; the report carries its mass.
    """
    grid = rho.grid
    u = rho.values
    if phi.shape != (grid.n_theta, grid.n_Omega):
        raise ValidationError(f"phi has shape {phi.shape}, expected "
                              f"{(grid.n_theta, grid.n_Omega)}")
    A0, Am, Ap = stencil_coefficients(params, grid, phi)

    out = np.empty_like(u)
    out[1:-1] = A0 * u[1:-1] + Am[1:-1] * u[:-2] + Ap[1:-1] * u[2:]
    # what the stencil would deposit on the boundary rows, before zeroing them
    leak_top = Am[-1] * u[-2]
    leak_bottom = Ap[0] * u[1]
    out[0] = 0.0
    out[-1] = 0.0

    n_w, n_th, n_k = grid.shape
    out = out.reshape(n_w * n_th, n_k)[_shift_index(grid)].reshape(grid.shape)
    if not np.all(np.isfinite(out)):
        raise SimulationError(f"non-finite values produced at step {step}")

    cell = grid.cell
    leak = cell * (leak_top.sum(axis=0) + leak_bottom.sum(axis=0))
    tail_rows = np.abs(grid.omega) > 0.5 * grid.G_omega
    report = StepReport(
        step=step,
        mass=slice_masses(out, grid),
        min_value=float(out.min()),
        boundary_leak=leak,
        tail_mass=cell * out[tail_rows].sum(axis=0).sum(axis=0),
    )
    return DensityField(out, grid, rho.t + grid.d_t), report


# ---------------------------------------------------------------------------
# time loop

@dataclass
class SeriesRecord:
    step: int
    t: float
    abs_r: float
    phase_r: float
    abs_s: float
    mass_min: float
    mass_max: float
    min_rho: float
    tail_mass: float
    boundary_leak: float


SERIES_FIELDS = ("step", "t", "abs_r", "phase_r", "abs_s", "mass_min", "mass_max",
                 "min_rho", "tail_mass", "boundary_leak")


@dataclass
class SimulationResult:
    records: list[SeriesRecord]
    final: DensityField
    snapshots: list[DensityField] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    @property
    def abs_r(self) -> np.ndarray:
        return self.column("abs_r")

    @property
    def abs_s(self) -> np.ndarray:
        return self.column("abs_s")

    def window_mean(self, name: str, t0: float, t1: float) -> float:
        t = self.t
        sel = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
        return float(self.column(name)[sel].mean())


def _record(step, rho, g, report=None) -> SeriesRecord:
    r, s = order_parameters(rho, g)
    tail_rows = np.abs(rho.grid.omega) > 0.5 * rho.grid.G_omega
    tail = rho.grid.cell * rho.values[tail_rows].sum(axis=0).sum(axis=0)
    if report is None:
        masses = rho.masses()
        leak = 0.0
    else:
        masses = report.mass
        leak = float(report.boundary_leak.max())
    return SeriesRecord(step, rho.t, r.modulus, r.phase, s.modulus,
                        float(masses.min()), float(masses.max()),
                        float(rho.values.min()), float(tail.max()), leak)


def evolve(rho: DensityField, params: ModelParams, g: FrequencyDistribution, n_steps: int,
           snapshot_every: int = 0, on_snapshot: Callable | None = None,
           keep_snapshots: bool = False, unsafe: bool = False,
           on_step: Callable | None = None) -> SimulationResult:
    """Run ``n_steps`` steps from a normalised field, recording diagnostics.

    Each step: compute Phi from ``rho^n``, apply `la_step`, renormalise.
    """
    grid = rho.grid
    if g.nodes.size != grid.n_Omega:
        raise ValidationError("frequency distribution does not match the Omega slices")
    report = validate_stability(params, grid)
    if not report.overall_ok and not unsafe:
        raise StabilityError("grid violates the stability conditions:\n" + report.describe())

    records = [_record(0, rho, g)]
    snaps = []

    def snap(field_):
        if keep_snapshots:
            snaps.append(field_.copy())
        if on_snapshot is not None:
            on_snapshot(field_)

    if snapshot_every:
        snap(rho)
    for n in range(n_steps):
        phi = phi_discrete(rho, g, K=params.K, check=False)
        try:
            stepped, rep = la_step(rho, phi, params, step=n + 1)
        except SimulationError as exc:
            raise SimulationError(f"{exc}; last good step {n}") from exc
        rho = renormalize(stepped)
        records.append(_record(n + 1, rho, g, rep))
        if on_step is not None:
            on_step(rho, rep)
        if snapshot_every and (n + 1) % snapshot_every == 0:
            snap(rho)
    log.debug("evolved %d steps to t=%.6g", n_steps, rho.t)
    return SimulationResult(records, rho, snaps)


def run_simulation(config, on_snapshot: Callable | None = None,
                   keep_snapshots: bool = False) -> SimulationResult:
    """Build grid, distribution and initial data from a `RunConfig` and evolve to T."""
    from .config import materialize

    params, grid, g, initial = materialize(config)
    rho = init_density(initial, grid)
    return evolve(rho, params, g, grid.n_t, snapshot_every=config.snapshot_every,
                  on_snapshot=on_snapshot, keep_snapshots=keep_snapshots,
                  unsafe=config.unsafe_grid)
