"""Mean-field coupling and coherence diagnostics on the lattice.

All sums use the rectangle rule with node weight ``d_omega * d_theta`` and
slice probability ``g_k * d_Omega``. Reductions are done in a fixed order
(omega rows first, then theta, then Omega slices), so results are
bit-reproducible for a given array.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import FrequencyDistribution, GridSpec, ValidationError

NORMALIZATION_TOL = 1e-6


@dataclass(frozen=True)
class OrderParameter:
    re: float
    im: float

    @property
    def modulus(self) -> float:
        return math.hypot(self.re, self.im)

    @property
    def phase(self) -> float:
        return math.atan2(self.im, self.re)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def from_complex(cls, z: complex) -> "OrderParameter":
        return cls(float(z.real), float(z.imag))


def slice_masses(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """``d_omega**2 * d_t * sum_{i,j} rho_{ijk}`` for every slice k."""
    return grid.cell * values.sum(axis=0).sum(axis=0)


def _check_normalized(values: np.ndarray, grid: GridSpec):
    mass = slice_masses(values, grid)
    bad = np.abs(mass - 1.0) > NORMALIZATION_TOL
    if np.any(bad):
        raise ValidationError(
            f"field is not normalized: slice masses {mass[bad][:5]} deviate from 1")


def _reduce(values: np.ndarray, phasor: np.ndarray, axis: int, g: FrequencyDistribution,
            grid: GridSpec) -> complex:
    if axis == 1:
        per_slice = (values.sum(axis=0) * phasor[:, None]).sum(axis=0)
    else:
        per_slice = (values.sum(axis=1) * phasor[:, None]).sum(axis=0)
    return complex(grid.cell * (per_slice * g.weights).sum())


def order_parameters(rho, g: FrequencyDistribution, grid: GridSpec | None = None,
                     check: bool = True) -> tuple[OrderParameter, OrderParameter]:
    """Phase coherence ``r`` and frequency coherence ``s`` of a density.

    ``rho`` is a `DensityField` or a raw ``(n_omega, n_theta, n_Omega)`` array
    (then ``grid`` is required).
    """
    values, grid = _unpack(rho, grid)
    if check:
        _check_normalized(values, grid)
    r = _reduce(values, np.exp(1j * grid.theta), 1, g, grid)
    s = _reduce(values, np.exp(1j * grid.omega), 0, g, grid)
    return OrderParameter.from_complex(r), OrderParameter.from_complex(s)


def kura_field(r: OrderParameter, K: float, theta):
    """Continuous coupling ``K |r| sin(psi - theta)``."""
    return K * r.modulus * np.sin(r.phase - np.asarray(theta, dtype=float))


def phi_discrete(rho, g: FrequencyDistribution, grid: GridSpec | None = None, K: float = 0.0,
                 check: bool = True) -> np.ndarray:
    """Discrete drift shift on the (theta, Omega) nodes, shape ``(n_theta, n_Omega)``.

    ``Phi[j, k] = -Omega_k - K * sum rho g sin(theta' - theta_j)`` evaluated
    through a single order-parameter reduction.
    """
    values, grid = _unpack(rho, grid)
    r, _ = order_parameters(values, g, grid, check=check)
    coupling = K * (r.im * np.cos(grid.theta) - r.re * np.sin(grid.theta))
    return -g.nodes[None, :] - coupling[:, None]


def phi_double_sum(rho, g: FrequencyDistribution, grid: GridSpec | None = None,
                   K: float = 0.0) -> np.ndarray:
    """Reference O(n_theta**2) evaluation of `phi_discrete` by the direct sum."""
    values, grid = _unpack(rho, grid)
    theta = grid.theta
    col = (values.sum(axis=0) * g.weights[None, :]).sum(axis=1)   # over i, then k
    sines = np.sin(theta[None, :] - theta[:, None])               # [j, j_hat]
    coupling = K * grid.cell * (sines @ col)
    return -g.nodes[None, :] - coupling[:, None]


def _unpack(rho, grid):
    if hasattr(rho, "values") and hasattr(rho, "grid"):
        return rho.values, rho.grid
    if grid is None:
        raise ValidationError("a raw array needs its grid")
    values = np.asarray(rho, dtype=float)
    if values.shape != grid.shape:
        raise ValidationError(f"field shape {values.shape} does not match grid {grid.shape}")
    return values, grid
