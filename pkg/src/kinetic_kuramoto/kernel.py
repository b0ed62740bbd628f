"""Closed-form fundamental solutions of the constant-coefficient degenerate
Kolmogorov operator ``(1+eps) d2/domega2 + omega d/domega - omega d/dtheta - d/dt``
and the Galilean-type group it is invariant under.

Matrices are plain 2x2 numpy arrays. The exact Gaussian solutions built here are
the oracle against which the finite-difference solver is checked in the linear
(uncoupled) regime.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import ModelParams, ValidationError

_SMALL_T = 1e-12


class GroupPoint(NamedTuple):
    omega: float
    theta: float
    t: float


def exp_flow(t: float) -> np.ndarray:
    """``E(t) = exp(-t B)`` for the drift matrix ``B = [[1, 0], [-1, 0]]``."""
    e = math.exp(-t)
    return np.array([[e, 0.0], [1.0 - e, 1.0]])


def covariance(eps: float, t: float) -> np.ndarray:
    """``C_eps(t) = int_0^t E(s) A_eps E(s)^T ds`` in closed form."""
    if t < 0:
        raise ValidationError("covariance needs t >= 0")
    if eps < 0:
        raise ValidationError("epsilon must be nonnegative")
    e1 = math.exp(-t)
    e2 = e1 * e1
    # expm1 keeps the small-t entries accurate
    c11 = -math.expm1(-2.0 * t)
    c12 = math.expm1(-t) ** 2
    c22 = 2.0 * t - 3.0 + 4.0 * e1 - e2
    if t < 1e-3:
        # series of 2t - 3 + 4e^-t - e^-2t; the closed form cancels catastrophically
        c22 = t ** 3 * (2.0 / 3.0 - t / 2.0 + 7.0 * t ** 2 / 30.0 - t ** 3 / 12.0)
    return 0.5 * (1.0 + eps) * np.array([[c11, c12], [c12, c22]])


def _inv_det(C: np.ndarray) -> tuple[np.ndarray, float]:
    a, b, c, d = C[0, 0], C[0, 1], C[1, 0], C[1, 1]
    det = a * d - b * c
    return np.array([[d, -b], [-c, a]]) / det, det


def gamma_eps(omega, theta, t: float, eps: float = 0.0):
    """Fundamental solution with pole at the origin, vectorised over (omega, theta).

    Zero for ``t <= 0``. For ``t`` below 1e-12 the kernel is treated as fully
    concentrated and 0 is returned everywhere, including the pole.
    """
    omega = np.asarray(omega, dtype=float)
    theta = np.asarray(theta, dtype=float)
    shape = np.broadcast(omega, theta).shape
    if t <= _SMALL_T:
        return np.zeros(shape) if shape else 0.0
    Ci, det = _inv_det(covariance(eps, t))
    q = Ci[0, 0] * omega ** 2 + 2.0 * Ci[0, 1] * omega * theta + Ci[1, 1] * theta ** 2
    out = np.exp(-0.25 * q - t) / (4.0 * math.pi * math.sqrt(det))
    return out if shape else float(out)


def gamma_eps_at(omega, theta, t: float, omega0, theta0, t0: float, eps: float = 0.0):
    """``Gamma^eps(x, t; x0, t0) = Gamma^eps(x - E(t - t0) x0, t - t0)``."""
    s = t - t0
    if s <= 0:
        shape = np.broadcast(np.asarray(omega), np.asarray(theta),
                             np.asarray(omega0), np.asarray(theta0)).shape
        return np.zeros(shape) if shape else 0.0
    e = math.exp(-s)
    omega0 = np.asarray(omega0, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    return gamma_eps(np.asarray(omega) - e * omega0,
                     np.asarray(theta) - (1.0 - e) * omega0 - theta0, s, eps)


def gamma_tilde(omega, t: float, xi, tau: float, eps: float = 0.0):
    """Fundamental solution of ``(1+eps) d2/domega2 + omega d/domega - d/dt``.

    This is the exact integral of `gamma_eps_at` over the pole's theta
    coordinate: a Gaussian in ``omega`` centred at ``exp(-(t-tau)) xi`` with
    variance ``(1+eps)(1 - exp(-2(t-tau)))``, damped by ``exp(-(t-tau))``.
    """
    s = t - tau
    if s <= 0:
        raise ValidationError("gamma_tilde needs t > tau")
    var = (1.0 + eps) * -math.expm1(-2.0 * s)
    dev = np.asarray(omega, dtype=float) - math.exp(-s) * np.asarray(xi, dtype=float)
    out = np.exp(-dev ** 2 / (2.0 * var) - s) / math.sqrt(2.0 * math.pi * var)
    return out if np.ndim(out) else float(out)


def group_compose(z, w) -> GroupPoint:
    """``z o w = (w_x + E(w_t) z_x, z_t + w_t)``."""
    om, th, t = z
    xi, eta, tau = w
    e = math.exp(-tau)
    return GroupPoint(xi + om * e, eta + th + om * (1.0 - e), t + tau)


def group_inverse(z) -> GroupPoint:
    om, th, t = z
    e = math.exp(t)
    return GroupPoint(-om * e, -th - om * (1.0 - e), -t)


def aniso_norm(z) -> float:
    om, th, t = z
    return abs(om) + abs(th) ** (1.0 / 3.0) + abs(t) ** 0.5


def aniso_distance(z, w) -> float:
    """Quasi-distance ``d(z, w) = ||w^{-1} o z||``."""
    om, th, t = z
    xi, eta, tau = w
    e = math.exp(tau - t)
    return (abs(om - xi * e) + abs(th - eta + xi * (e - 1.0)) ** (1.0 / 3.0)
            + abs(t - tau) ** 0.5)


# --------------------------------------------------------------------------
# Linear oracle: m = D = 1, K = 0, constant drift shift Omega.


@dataclass(frozen=True)
class GaussianDatum:
    """Bivariate normal density in (omega, theta); callable as an evaluator.

    With ``periodic`` set the theta variable is wrapped onto ``[0, 2*pi)`` by
    summing ``images`` copies on each side.
    """

    mean: tuple[float, float]
    cov: tuple[tuple[float, float], tuple[float, float]]
    periodic: bool = True
    images: int = 4

    def __post_init__(self):
        C = np.asarray(self.cov, dtype=float)
        if C.shape != (2, 2) or not np.allclose(C, C.T) or np.linalg.det(C) <= 0:
            raise ValidationError("covariance must be symmetric positive definite")

    def __call__(self, omega, theta):
        omega = np.asarray(omega, dtype=float)
        theta = np.asarray(theta, dtype=float)
        Ci, det = _inv_det(np.asarray(self.cov, dtype=float))
        norm = 1.0 / (2.0 * math.pi * math.sqrt(det))
        dw = omega - self.mean[0]
        shifts = range(-self.images, self.images + 1) if self.periodic else (0,)
        out = np.zeros(np.broadcast(dw, theta).shape)
        for n in shifts:
            dth = theta - self.mean[1] + 2.0 * math.pi * n
            q = Ci[0, 0] * dw ** 2 + 2.0 * Ci[0, 1] * dw * dth + Ci[1, 1] * dth ** 2
            out = out + np.exp(-0.5 * q)
        return norm * out


def transport_mean(omega0, theta0, t: float, Omega: float = 0.0):
    """Mean of the linear dynamics ``omega' = -(omega - Omega)``, ``theta' = omega``."""
    e = math.exp(-t)
    dw = np.asarray(omega0, dtype=float) - Omega
    return Omega + dw * e, np.asarray(theta0, dtype=float) + Omega * t + dw * (1.0 - e)


def _check_linear_regime(params: ModelParams | None):
    if params is None:
        return
    if params.K != 0 or params.m != 1 or params.D != 1:
        raise ValidationError("the linear oracle needs K = 0 and m = D = 1")


def linear_oracle(rho0, t: float, Omega: float = 0.0, *, params: ModelParams | None = None,
                  periodic: bool = True):
    """Exact solution at time ``t`` of the uncoupled problem with drift shift Omega.

    ``rho0`` is a `GaussianDatum`, a point ``(omega0, theta0)`` or a
    ``(omega, theta, values, cell_area)`` tuple of nodal data, which is
    propagated by superposing the mass-conserving kernel
    ``exp(t) * Gamma^0`` over the nodes. Returns an evaluator
    ``f(omega, theta)``.
    """
    _check_linear_regime(params)
    if t < 0:
        raise ValidationError("oracle time must be nonnegative")
    E = exp_flow(t)
    S = 2.0 * covariance(0.0, t)

    if isinstance(rho0, GaussianDatum):
        mw, mt = transport_mean(rho0.mean[0], rho0.mean[1], t, Omega)
        cov = E @ np.asarray(rho0.cov, dtype=float) @ E.T + S
        return GaussianDatum((float(mw), float(mt)), tuple(map(tuple, cov)),
                             periodic=periodic, images=rho0.images)

    if len(rho0) == 2:
        if t <= _SMALL_T:
            raise ValidationError("a point mass has no density at t = 0")
        mw, mt = transport_mean(rho0[0], rho0[1], t, Omega)
        return GaussianDatum((float(mw), float(mt)), tuple(map(tuple, S)), periodic=periodic)

    w_nodes, th_nodes, values, area = rho0
    w_nodes = np.ravel(np.asarray(w_nodes, dtype=float))
    th_nodes = np.ravel(np.asarray(th_nodes, dtype=float))
    mass = np.ravel(np.asarray(values, dtype=float)) * area
    keep = mass != 0
    w_nodes, th_nodes, mass = w_nodes[keep], th_nodes[keep], mass[keep]
    if t <= _SMALL_T:
        raise ValidationError("nodal data is only propagated for t > 0")
    mw, mt = transport_mean(w_nodes, th_nodes, t, Omega)
    kern = GaussianDatum((0.0, 0.0), tuple(map(tuple, S)), periodic=periodic)

    def evaluate(omega, theta):
        omega = np.asarray(omega, dtype=float)
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(np.broadcast(omega, theta).shape)
        for a, b, c in zip(mw, mt, mass):
            out += c * kern(omega - a, theta - b)
        return out

    return evaluate


# --------------------------------------------------------------------------
# Quadrature checks of the kernel identities.


def _box(C: np.ndarray, center, nsig: float = 8.0):
    sd = np.sqrt(2.0 * np.diag(C))
    return [(center[i] - nsig * sd[i], center[i] + nsig * sd[i]) for i in range(2)]


def _midpoints(lo: float, hi: float, n: int) -> tuple[np.ndarray, float]:
    h = (hi - lo) / n
    return lo + h * (np.arange(n) + 0.5), h


def backward_mass(omega: float, theta: float, t: float, tau: float = 0.0,
                  eps: float = 0.0, n: int = 801) -> float:
    """Midpoint quadrature of ``Gamma^eps(x, t; xi, eta, tau)`` over the pole."""
    s = t - tau
    E = exp_flow(s)
    Einv = np.linalg.inv(E)
    # pole variable y = E^{-1}(x - u) with u ~ N(0, 2C); covariance of y:
    C = Einv @ covariance(eps, s) @ Einv.T
    center = Einv @ np.array([omega, theta])
    (a0, a1), (b0, b1) = _box(C, center)
    xi, hx = _midpoints(a0, a1, n)
    eta, he = _midpoints(b0, b1, n)
    X, Y = np.meshgrid(xi, eta, indexing="ij")
    vals = gamma_eps_at(omega, theta, t, X, Y, tau, eps)
    return float(vals.sum() * hx * he)


def theta_marginal(omega: float, theta: float, t: float, xi: float, tau: float = 0.0,
                   eps: float = 0.0, n: int = 4001) -> float:
    """Midpoint quadrature of ``Gamma^eps(x, t; xi, eta, tau)`` over ``eta``."""
    s = t - tau
    C = covariance(eps, s)
    c = theta - (1.0 - math.exp(-s)) * xi
    sd = math.sqrt(2.0 * C[1, 1])
    eta, h = _midpoints(c - 10.0 * sd, c + 10.0 * sd, n)
    return float(gamma_eps_at(omega, theta, t, xi, eta, tau, eps).sum() * h)


def covariance_quadrature(eps: float, t: float, n: int = 2000) -> np.ndarray:
    """Gauss-Legendre quadrature of ``int_0^t E(s) A_eps E(s)^T ds``."""
    x, w = np.polynomial.legendre.leggauss(n)
    s = 0.5 * t * (x + 1.0)
    A = np.array([[1.0 + eps, 0.0], [0.0, 0.0]])
    out = np.zeros((2, 2))
    for si, wi in zip(s, w):
        E = exp_flow(si)
        out += wi * (E @ A @ E.T)
    return 0.5 * t * out


def mass_kernel(omega, theta, t: float, omega0, theta0, t0: float, eps: float = 0.0):
    """Forward-mass-conserving kernel ``exp(t - t0) * Gamma^eps``."""
    return math.exp(t - t0) * gamma_eps_at(omega, theta, t, omega0, theta0, t0, eps)


def chapman_kolmogorov(x, t: float, s: float, y, eps: float = 0.0,
                       n: int = 601) -> tuple[float, float]:
    """Return ``(int G(x,t;z,s) G(z,s;y,0) dz, G(x,t;y,0))`` for the mass kernel."""
    # intermediate z is distributed around the forward image of y at time s
    C = 2.0 * covariance(eps, s)
    mean = exp_flow(s) @ np.asarray(y, dtype=float)
    sd = np.sqrt(np.diag(C))
    zw, hw = _midpoints(mean[0] - 9 * sd[0], mean[0] + 9 * sd[0], n)
    zt, ht = _midpoints(mean[1] - 9 * sd[1], mean[1] + 9 * sd[1], n)
    Zw, Zt = np.meshgrid(zw, zt, indexing="ij")
    left = mass_kernel(x[0], x[1], t, Zw, Zt, s, eps) * mass_kernel(Zw, Zt, s, y[0], y[1], 0.0, eps)
    direct = mass_kernel(x[0], x[1], t, y[0], y[1], 0.0, eps)
    return float(left.sum() * hw * ht), float(direct)


@dataclass
class IdentityCheck:
    name: str
    value: float
    expected: float
    tol: float

    @property
    def error(self) -> float:
        return abs(self.value - self.expected)

    @property
    def passed(self) -> bool:
        return self.error <= self.tol


def kernel_identity_suite() -> list[IdentityCheck]:
    """Quadrature checks of normalisation, theta-marginal, covariance and
    reproducing identities at a handful of spot points."""
    checks = []
    for t, eps, (w, th) in [(0.7, 0.1, (0.3, -0.4)), (0.2, 0.0, (-1.0, 2.0)),
                            (2.0, 0.5, (0.5, 1.0))]:
        checks.append(IdentityCheck(f"backward mass t={t} eps={eps}",
                                    backward_mass(w, th, t, 0.0, eps), 1.0, 1e-6))
    for t, eps, w, th, xi in [(0.7, 0.1, 0.3, 0.2, -0.4), (1.5, 0.0, -0.8, 1.0, 1.2),
                              (0.3, 0.25, 0.1, -2.0, 0.5)]:
        checks.append(IdentityCheck(f"theta marginal t={t} eps={eps}",
                                    theta_marginal(w, th, t, xi, 0.0, eps),
                                    gamma_tilde(w, t, xi, 0.0, eps), 1e-6))
    for t, eps in [(1.0, 0.0), (0.5, 0.3), (3.0, 0.0)]:
        C = covariance(eps, t)
        Q = covariance_quadrature(eps, t)
        checks.append(IdentityCheck(f"covariance t={t} eps={eps}",
                                    float(np.max(np.abs(C - Q))), 0.0, 1e-8))
    for x, t, s, y in [((0.2, 0.5), 1.0, 0.4, (0.0, 0.0)), ((-0.3, 0.1), 1.5, 0.9, (0.4, -0.2))]:
        lhs, rhs = chapman_kolmogorov(x, t, s, y)
        checks.append(IdentityCheck(f"reproducing t={t} s={s}", lhs, rhs, 1e-4))
    return checks
