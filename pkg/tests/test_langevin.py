import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kinetic_kuramoto.langevin import (OscillatorEnsemble, ensemble_order_parameter,
                                       frequency_order_parameter, langevin_step, make_rng,
                                       run_langevin, sample_ensemble)
from kinetic_kuramoto.model import (GridSpec, ModelParams, ValidationError,
                                    build_frequency_distribution, build_grid)
from kinetic_kuramoto.solver import evolve, init_density, paper_default


def ensemble(theta, omega=None, natural=None, seed=0):
    theta = np.asarray(theta, dtype=float)
    omega = np.zeros_like(theta) if omega is None else np.asarray(omega, dtype=float)
    natural = np.zeros_like(theta) if natural is None else np.asarray(natural, dtype=float)
    return OscillatorEnsemble(theta, omega, natural, make_rng(seed))


def point_g():
    grid = GridSpec(d_omega=0.2, d_t=0.02, G_omega=4.0, T=1.0, n_theta=10)
    return build_frequency_distribution({"kind": "point", "at": 0.0}, grid)


def test_order_parameter_examples():
    r = ensemble_order_parameter(ensemble(np.full(7, 1.2)))
    assert r.modulus == pytest.approx(1.0, abs=1e-15)
    assert r.phase == pytest.approx(1.2, abs=1e-15)
    r = ensemble_order_parameter(ensemble(np.arange(10) * 2 * math.pi / 10))
    assert r.modulus <= 1e-12
    r = ensemble_order_parameter(ensemble([0.0, math.pi / 2]))
    assert r.modulus == pytest.approx(math.sqrt(2) / 2, rel=1e-15)
    s = frequency_order_parameter(ensemble([0.0, 1.0], omega=[0.0, 0.0]))
    assert s.modulus == 1.0


@settings(max_examples=50)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=40))
def test_order_parameter_bounded(theta):
    assert 0.0 <= ensemble_order_parameter(ensemble(theta)).modulus <= 1.0 + 1e-15


def test_ensemble_shape_checked():
    with pytest.raises(ValidationError):
        OscillatorEnsemble(np.zeros(3), np.zeros(2), np.zeros(3), make_rng(0))


def test_deterministic_decay():
    p = ModelParams(1.0, 1.0, 0.0)
    dt, n = 0.01, 200
    ens = ensemble([0.3], omega=[2.0])
    for _ in range(n):
        ens = langevin_step(ens, p, dt, noise=False)
    assert ens.omega[0] == pytest.approx(2.0 * (1 - dt) ** n, rel=1e-12)
    assert abs(ens.omega[0] - 2.0 * math.exp(-n * dt)) <= 2.0 * dt


def test_fixed_seed_is_reproducible():
    p = ModelParams(1.0, 1.0, 6.0)
    runs = []
    for _ in range(2):
        ens = sample_ensemble(paper_default, point_g(), 500, seed=11)
        series, final = run_langevin(ens, p, 0.02, 50)
        runs.append((series.abs_r, final.theta, final.omega))
    for a, b in zip(*runs):
        np.testing.assert_array_equal(a, b)
    other = sample_ensemble(paper_default, point_g(), 500, seed=12)
    assert not np.array_equal(other.theta, runs[0][1])


def test_ou_stationary_variance():
    m, D, dt = 2.0, 1.0, 0.01
    p = ModelParams(m, D, 0.0)
    N = 20000
    ens = ensemble(np.zeros(N), seed=3)
    _, ens = run_langevin(ens, p, dt, 2500, record_every=2500)
    var = ens.omega.var()
    se = (D / m) * math.sqrt(2.0 / (N - 1))
    assert abs(var - D / m) <= 3 * se


def test_point_mass_natural_frequencies():
    ens = sample_ensemble(paper_default, point_g(), 100, seed=0)
    assert np.all(ens.natural == 0.0)


def test_sampled_theta_histogram():
    ens = sample_ensemble(paper_default, point_g(), 100_000, seed=5)
    nb = 32
    edges = np.linspace(0, 2 * math.pi, nb + 1)
    hist, _ = np.histogram(ens.theta, edges, density=True)
    # exact bin averages of the marginal (1 + sin theta) / (2 pi)
    exact = (np.diff(edges) - np.diff(np.cos(edges))) / (2 * math.pi * np.diff(edges))
    assert np.max(np.abs(hist - exact)) < 0.02
    assert np.all(np.abs(ens.omega) <= 4.0)


def test_sampling_errors():
    g = point_g()
    with pytest.raises(ValidationError):
        sample_ensemble(paper_default, g, 0)
    with pytest.raises(ValidationError):
        sample_ensemble(lambda w, th: -np.ones_like(w), g, 10)
    with pytest.raises(ValidationError):
        sample_ensemble(lambda w, th: np.zeros_like(w), g, 10)


def test_step_rejects_nonpositive_dt():
    with pytest.raises(ValidationError):
        langevin_step(ensemble([0.0]), ModelParams(), 0.0)


def test_histogram_converges_to_kinetic_marginal():
    p = ModelParams(1.0, 1.0, 6.0)
    grid = build_grid(p, 0.1, 0.005, 4.0, 1.0)
    g = build_frequency_distribution({"kind": "point", "at": 0.0}, grid)
    res = evolve(init_density("paper-default", grid), p, g, grid.n_t)
    marginal = res.final.values[:, :, 0].sum(axis=0) * grid.d_omega
    nb = 24
    edges = np.linspace(0, 2 * math.pi, nb + 1)
    bins = np.minimum((grid.theta / (2 * math.pi) * nb).astype(int), nb - 1)
    pde = np.bincount(bins, marginal) / np.bincount(bins)

    errors = []
    for N in (1_000, 10_000, 100_000):
        e = []
        for seed in (0, 1):
            ens = sample_ensemble(paper_default, g, N, seed, grid.G_omega)
            _, ens = run_langevin(ens, p, grid.d_t, grid.n_t, record_every=grid.n_t)
            hist, _ = np.histogram(ens.theta, edges, density=True)
            e.append(np.abs(hist - pde).sum() * 2 * math.pi / nb)
        errors.append(np.mean(e))
    assert errors[0] > errors[1] > errors[2]
