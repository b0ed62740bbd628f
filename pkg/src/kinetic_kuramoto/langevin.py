"""Finite-N inertial Kuramoto oscillators with noise (Euler-Maruyama).

    m dtheta_k^2/dt^2 + dtheta_k/dt = Omega_k + K r_N sin(psi_N - theta_k) + noise

written as a first-order system in (theta, omega). The noise amplitude
``sqrt(2D)/m`` gives the omega-diffusion ``D/m**2`` of the kinetic equation.
Random numbers come from a Philox counter-based generator, seeded per run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .meanfield import OrderParameter
from .model import TWO_PI, FrequencyDistribution, ModelParams, ValidationError


@dataclass
class OscillatorEnsemble:
    theta: np.ndarray
    omega: np.ndarray
    natural: np.ndarray
    rng: np.random.Generator
    t: float = 0.0

    def __post_init__(self):
        n = self.theta.shape
        if len(n) != 1 or n[0] < 1 or self.omega.shape != n or self.natural.shape != n:
            raise ValidationError("ensemble arrays must share a length N >= 1")

    @property
    def N(self) -> int:
        return self.theta.size


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_ensemble(rho0, g: FrequencyDistribution, N: int, seed: int = 0,
                    G_omega: float = 4.0) -> OscillatorEnsemble:
    """Draw N oscillators: (omega, theta) by rejection from ``rho0`` on
    ``[-G_omega, G_omega] x [0, 2pi)``, natural frequencies from ``g``."""
    if N < 1:
        raise ValidationError("N must be at least 1")
    rng = make_rng(seed)
    # envelope from a fine evaluation, padded; raised if a proposal exceeds it
    w = np.linspace(-G_omega, G_omega, 401)
    th = np.linspace(0.0, TWO_PI, 401)
    probe = np.asarray(rho0(w[:, None], th[None, :]), dtype=float)
    if np.any(probe < 0) or not np.all(np.isfinite(probe)):
        raise ValidationError("rho0 must be finite and nonnegative on the domain")
    bound = 1.05 * probe.max()
    if bound <= 0:
        raise ValidationError("rho0 vanishes on the sampling domain")
    mean_ratio = probe.mean() / bound

    omegas, thetas = [], []
    have = proposed = 0
    while have < N:
        batch = max(1024, int(1.5 * (N - have) / max(mean_ratio, 1e-4)))
        pw = rng.uniform(-G_omega, G_omega, batch)
        pt = rng.uniform(0.0, TWO_PI, batch)
        f = np.asarray(rho0(pw, pt), dtype=float)
        if np.any(f > bound):
            bound = 1.05 * f.max()
            omegas, thetas, have, proposed = [], [], 0, 0
            continue
        keep = rng.uniform(0.0, bound, batch) < f
        proposed += batch
        omegas.append(pw[keep])
        thetas.append(pt[keep])
        have += int(keep.sum())
        if proposed > 10 * batch and have / proposed < 1e-4:
            raise ValidationError("rejection acceptance rate below 1e-4")
    omega = np.concatenate(omegas)[:N]
    theta = np.concatenate(thetas)[:N]
    natural = rng.choice(g.nodes, size=N, p=g.weights)
    return OscillatorEnsemble(theta, omega, natural.astype(float), rng)


def ensemble_order_parameter(ens: OscillatorEnsemble) -> OrderParameter:
    """``r_N exp(i psi_N) = mean(exp(i theta))``."""
    return OrderParameter(float(np.mean(np.cos(ens.theta))), float(np.mean(np.sin(ens.theta))))


def frequency_order_parameter(ens: OscillatorEnsemble) -> OrderParameter:
    return OrderParameter(float(np.mean(np.cos(ens.omega))), float(np.mean(np.sin(ens.omega))))


def langevin_step(ens: OscillatorEnsemble, params: ModelParams, dt: float,
                  noise: bool = True) -> OscillatorEnsemble:
    """One Euler-Maruyama step; both updates use the state at the start of the step.

    ``noise=False`` drops the stochastic forcing (the D = 0 limit) and draws
    no random numbers.
    """
    if dt <= 0:
        raise ValidationError("dt must be positive")
    r = ensemble_order_parameter(ens)
    force = -ens.omega + ens.natural + params.K * r.modulus * np.sin(r.phase - ens.theta)
    omega = ens.omega + (dt / params.m) * force
    if noise:
        xi = ens.rng.standard_normal(ens.N)
        omega = omega + (math.sqrt(2.0 * params.D) / params.m) * math.sqrt(dt) * xi
    theta = np.mod(ens.theta + ens.omega * dt, TWO_PI)
    return OscillatorEnsemble(theta, omega, ens.natural, ens.rng, ens.t + dt)


@dataclass
class LangevinSeries:
    t: np.ndarray
    abs_r: np.ndarray
    phase_r: np.ndarray
    abs_s: np.ndarray


def run_langevin(ens: OscillatorEnsemble, params: ModelParams, dt: float, n_steps: int,
                 record_every: int = 1, noise: bool = True
                 ) -> tuple[LangevinSeries, OscillatorEnsemble]:
    ts, rs, ps, ss = [], [], [], []

    def rec(e):
        r = ensemble_order_parameter(e)
        ts.append(e.t)
        rs.append(r.modulus)
        ps.append(r.phase)
        ss.append(frequency_order_parameter(e).modulus)

    rec(ens)
    for n in range(n_steps):
        ens = langevin_step(ens, params, dt, noise)
        if (n + 1) % record_every == 0:
            rec(ens)
    return LangevinSeries(np.array(ts), np.array(rs), np.array(ps), np.array(ss)), ens
