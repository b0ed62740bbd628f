import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kinetic_kuramoto.config import config_from_dict
from kinetic_kuramoto.kernel import GaussianDatum, linear_oracle
from kinetic_kuramoto.meanfield import phi_discrete
from kinetic_kuramoto.model import (GridSpec, ModelParams, SimulationError, StabilityError,
                                    ValidationError, build_frequency_distribution, build_grid)
from kinetic_kuramoto.solver import (DensityField, evolve, init_density, la_step, renormalize,
                                     run_simulation, stencil_coefficients)

P = ModelParams(1.0, 1.0, 0.0)


def small_grid(n_theta=64, G=2.0, d_omega=0.25):
    # closes the theta period; the step is far too large to evolve stably
    return GridSpec(d_omega=d_omega, d_t=2 * math.pi / (n_theta * d_omega), G_omega=G, T=1.0,
                    n_theta=n_theta)


def point(grid):
    return build_frequency_distribution({"kind": "point", "at": 0.0}, grid)


# initial data

def test_paper_default_is_normalised_and_nonnegative():
    grid = build_grid(P, 0.2, 0.02, 4.0, 1.0)
    rho = init_density("paper-default", grid)
    assert rho.values.min() >= 0
    assert abs(rho.masses()[0] - 1.0) <= 1e-12
    assert np.all(rho.values[0] == 0) and np.all(rho.values[-1] == 0)


def test_paper_default_vanishes_where_sine_is_minus_one():
    grid = small_grid(n_theta=64)
    rho = init_density("paper-default", grid)
    j = 3 * grid.n_theta // 4
    assert grid.theta[j] == pytest.approx(1.5 * math.pi)
    assert np.all(rho.values[:, j, 0] == 0.0)


def test_constant_evaluator_gives_uniform_interior():
    grid = small_grid()
    rho = init_density(lambda w, th: np.ones_like(w), grid)
    interior = rho.values[1:-1]
    # boundary rows are held at zero, so the interior spans 2*G_omega - d_omega
    expect = 1.0 / (2 * math.pi * (2 * grid.G_omega - grid.d_omega))
    np.testing.assert_allclose(interior, expect, rtol=1e-12)


@pytest.mark.parametrize("evaluator", [lambda w, th: np.full_like(w, np.nan),
                                       lambda w, th: np.zeros_like(w), "no-such-preset"])
def test_init_density_errors(evaluator):
    with pytest.raises(ValidationError):
        init_density(evaluator, small_grid())


def test_literal_datum_needs_narrow_domain():
    with pytest.raises(ValidationError):
        init_density("paper-literal", small_grid(G=2.0))
    rho = init_density("paper-literal", small_grid(G=0.75))
    assert rho.values.min() >= 0


def test_renormalize_cases():
    rho = init_density("paper-half-sine", small_grid())
    again = renormalize(rho)
    np.testing.assert_array_max_ulp(again.values, rho.values, maxulp=1)
    tripled = renormalize(DensityField(3 * rho.values, rho.grid))
    np.testing.assert_allclose(tripled.values, rho.values, rtol=1e-15)
    with pytest.raises(SimulationError):
        renormalize(DensityField(np.zeros(rho.grid.shape), rho.grid))


# one step

@settings(max_examples=60)
@given(st.floats(0.2, 3), st.floats(0.2, 3), st.floats(0.05, 0.5), st.floats(1e-4, 0.05),
       st.floats(-5, 5))
def test_coefficient_identity(m, D, h, dt, phi):
    grid = GridSpec(d_omega=h, d_t=dt, G_omega=2 * h, T=1.0, n_theta=4)
    A0, Am, Ap = stencil_coefficients(ModelParams(m, D), grid, np.full((4, 1), phi))
    np.testing.assert_allclose(A0 + Am + Ap, 1.0 + dt / m, rtol=1e-13)


def test_impulse_spreads_to_three_cells():
    grid = small_grid(n_theta=40)
    i0, j0 = grid.i_max + 2, 7
    v = np.zeros(grid.shape)
    v[i0, j0, 0] = 1.0
    phi = np.full((grid.n_theta, 1), 0.3)
    out, _ = la_step(DensityField(v, grid), phi, P)
    A0, Am, Ap = stencil_coefficients(P, grid, phi)
    nz = np.argwhere(out.values != 0)
    assert len(nz) == 3
    i_phys = lambda i: i - grid.i_max
    expect = {(i0, (j0 + i_phys(i0)) % grid.n_theta): A0,
              (i0 + 1, (j0 + i_phys(i0 + 1)) % grid.n_theta): Am[i0 + 1, j0, 0],
              (i0 - 1, (j0 + i_phys(i0 - 1)) % grid.n_theta): Ap[i0 - 1, j0, 0]}
    for i, j, k in nz:
        assert out.values[i, j, k] == pytest.approx(expect[(i, j)], rel=1e-15)


def test_interior_mass_is_conserved_exactly():
    grid = build_grid(ModelParams(1, 1, 2), 0.2, 0.02, 4.0, 1.0)
    g = point(grid)
    rho = init_density(lambda w, th: np.where(np.abs(w) <= 1.0, np.exp(-w ** 2) * (2 + np.cos(th)), 0),
                       grid)
    for _ in range(5):
        phi = phi_discrete(rho, g, K=2.0)
        out, rep = la_step(rho, phi, ModelParams(1, 1, 2))
        assert abs(rep.mass[0] - 1.0) <= 1e-13
        assert rep.boundary_leak[0] == 0.0
        rho = renormalize(out)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([0.0, 1.0, 2.0]), st.floats(0.3, 1.0))
def test_positivity_under_stability_conditions(seed, K, frac):
    p = ModelParams(1.0, 1.0, K)
    h = 0.25
    dt = frac * h * h / (2 - h * h)
    grid = GridSpec(d_omega=h, d_t=dt, G_omega=2.0, T=1.0, n_theta=48)
    g = point(grid)
    v = np.random.default_rng(seed).random(grid.shape) ** 4
    rho = init_density(lambda w, th: v[..., 0], grid)
    res = evolve(rho, p, g, 20, on_step=lambda r, rep: _assert_nonneg(r.values))
    assert res.final.values.min() >= 0.0


def _assert_nonneg(values):
    assert values.min() >= -1e-12 * values.max()


def test_theta_rotation_equivariance():
    p = ModelParams(1.0, 1.0, 2.0)
    grid = build_grid(p, 0.25, 0.02, 2.0, 1.0)
    g = point(grid)
    rho = init_density("paper-default", grid)
    shifted = DensityField(np.roll(rho.values, 1, axis=1), grid)
    a = evolve(rho, p, g, 15).final.values
    b = evolve(shifted, p, g, 15).final.values
    np.testing.assert_allclose(np.roll(a, 1, axis=1), b, rtol=1e-12, atol=1e-14)


def test_uncoupled_uniform_phase_stays_incoherent():
    grid = build_grid(P, 0.25, 0.02, 2.0, 1.0)
    rho = init_density(lambda w, th: np.exp(-w ** 2) + 0 * th, grid)
    res = evolve(rho, P, point(grid), 50)
    assert np.all(res.abs_r <= 1e-12)


def _one_step_error(dt):
    d = GaussianDatum((0.5, math.pi), ((0.25, 0.0), (0.0, 0.25)))
    h = math.sqrt(4 * dt)
    grid = build_grid(P, h, dt, h * math.ceil(5 / h), 1.0)
    out, _ = la_step(init_density(d, grid), np.zeros((grid.n_theta, 1)), P)
    out = renormalize(out)
    W, TH = np.meshgrid(grid.omega, grid.theta, indexing="ij")
    exact = linear_oracle(d, grid.d_t, params=P)(W, TH)
    return np.abs(out.values[:, :, 0] - exact).sum() * grid.cell, grid


def test_one_step_local_error_is_second_order():
    e1, g1 = _one_step_error(0.01)
    e2, g2 = _one_step_error(0.005)
    # d_omega**2 is proportional to d_t here, so the bound is C * d_t**2
    assert e1 <= 5.0 * g1.d_t ** 2
    assert e2 <= 5.0 * g2.d_t ** 2
    assert e1 / e2 > 3.5


def test_frequency_coherence_against_oracle():
    d = GaussianDatum((0.5, 1.0), ((0.2, 0.0), (0.0, 0.3)))
    # G_omega must hold the stationary omega-variance D/m = 1 comfortably
    grid = build_grid(P, 0.1, 0.005, 5.0, 2.0)
    res = evolve(init_density(d, grid), P, point(grid), grid.n_t)
    f = linear_oracle(d, res.final.t, params=P)
    expect = math.exp(-0.5 * f.cov[0][0])
    assert res.abs_s[-1] == pytest.approx(expect, abs=0.01)


# time loop

def test_evolve_records_and_diagnostics():
    p = ModelParams(1.0, 1.0, 4.0)
    grid = build_grid(p, 0.25, 0.02, 2.0, 1.0)
    res = evolve(init_density("paper-default", grid), p, point(grid), 10, snapshot_every=5,
                 keep_snapshots=True)
    assert [r.step for r in res.records] == list(range(11))
    assert res.t[-1] == pytest.approx(10 * grid.d_t)
    assert len(res.snapshots) == 3
    assert np.all(res.column("boundary_leak") >= 0)
    assert np.all((res.abs_r >= 0) & (res.abs_r <= 1 + 1e-12))
    assert np.all((res.abs_s >= 0) & (res.abs_s <= 1 + 1e-12))
    assert res.window_mean("abs_r", 0.0, 1.0) == pytest.approx(res.abs_r.mean())


def test_evolve_refuses_unstable_grid():
    p = ModelParams(1.0, 1.0, 0.0)
    grid = build_grid(p, 0.2, 0.0317, 4.0, 1.0, unsafe=True)
    rho = init_density("paper-default", grid)
    with pytest.raises(StabilityError):
        evolve(rho, p, point(grid), 1)
    evolve(rho, p, point(grid), 1, unsafe=True)


def test_run_simulation_from_config():
    cfg = config_from_dict({"model": {"K": 2.0},
                            "grid": {"target_d_t": 0.02, "T": 0.2, "d_omega": 0.25, "G_omega": 2}})
    res = run_simulation(cfg)
    grid = res.final.grid
    assert res.records[-1].t == pytest.approx(grid.n_t * grid.d_t)
    assert res.records[-1].t >= 0.2
    assert res.final.values.min() >= 0
