"""Physical parameters, the coupled (omega, theta, Omega, t) lattice and the
frequency distribution, plus the stability gate of the explicit scheme.

The theta spacing is never chosen freely: it is ``d_omega * d_t`` so that the
free-transport shift ``theta - omega * d_t`` of a node lands on another node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class ValidationError(ValueError):
    """Malformed parameters, grids or configurations."""


class StabilityError(ValidationError):
    """A grid violates the positivity conditions of the explicit scheme."""


class SimulationError(RuntimeError):
    """Runtime failure while evolving a field (NaN, total mass loss)."""


def _is_integer(x: float, tol: float = 1e-9) -> bool:
    return abs(x - round(x)) <= tol * max(1.0, abs(x))


@dataclass(frozen=True)
class ModelParams:
    """Constants of the inertial Kuramoto kinetic equation.

    m is the inertia, D the noise intensity, K the coupling strength and
    Omega1 the half-width of the support of the natural-frequency density.
    """

    m: float = 1.0
    D: float = 1.0
    K: float = 0.0
    Omega1: float = 0.0

    def __post_init__(self):
        for name in ("m", "D", "K", "Omega1"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"{name} must be a finite number, got {v!r}")
        if self.m <= 0:
            raise ValidationError("inertia m must be positive")
        if self.D <= 0:
            raise ValidationError("noise intensity D must be positive")
        if self.K < 0:
            raise ValidationError("coupling must be nonnegative")
        if self.Omega1 < 0:
            raise ValidationError("Omega1 must be nonnegative")


@dataclass(frozen=True)
class GridSpec:
    """The lattice ``(i*d_omega, j*d_omega*d_t, k*d_Omega, n*d_t)``.

    omega rows run over ``-G_omega..G_omega`` (``n_omega = 2*G_omega/d_omega + 1``),
    theta columns over ``0..n_theta-1`` with periodic wraparound. ``d_Omega == 0``
    marks a degenerate frequency axis (identical oscillators, one slice).
    """

    d_omega: float
    d_t: float
    G_omega: float
    T: float
    n_theta: int
    d_Omega: float = 0.0
    n_Omega: int = 1
    n_omega: int = field(init=False)
    n_t: int = field(init=False)

    def __post_init__(self):
        if not (self.d_omega > 0 and self.d_t > 0 and self.G_omega > 0 and self.T > 0):
            raise ValidationError("grid spacings, G_omega and T must be positive")
        if self.d_Omega < 0:
            raise ValidationError("d_Omega must be nonnegative")
        if self.n_theta < 1 or self.n_Omega < 1:
            raise ValidationError("index counts must be positive")
        if self.d_Omega == 0 and self.n_Omega != 1:
            raise ValidationError("a degenerate frequency axis has exactly one slice")
        half = self.G_omega / self.d_omega
        if not _is_integer(half) or round(half) < 1:
            raise ValidationError(
                f"G_omega/d_omega = {half!r} is not a positive integer")
        object.__setattr__(self, "n_omega", 2 * int(round(half)) + 1)
        object.__setattr__(self, "n_t", int(math.ceil(self.T / self.d_t - 1e-9)))

    @property
    def d_theta(self) -> float:
        return self.d_omega * self.d_t

    @property
    def i_max(self) -> int:
        """Signed index of the upper boundary row."""
        return (self.n_omega - 1) // 2

    @property
    def omega(self) -> np.ndarray:
        return self.d_omega * np.arange(-self.i_max, self.i_max + 1)

    @property
    def theta(self) -> np.ndarray:
        return self.d_theta * np.arange(self.n_theta)

    @property
    def Omega(self) -> np.ndarray:
        half = (self.n_Omega - 1) // 2
        return self.d_Omega * np.arange(-half, half + 1)

    @property
    def cell(self) -> float:
        """Area weight ``d_omega * d_theta = d_omega**2 * d_t`` of one node."""
        return self.d_omega * self.d_omega * self.d_t

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_omega, self.n_theta, self.n_Omega)


@dataclass(frozen=True)
class StabilityReport:
    d_omega_ok: bool
    d_t_ok: bool
    G_omega_ok: bool
    d_omega_max: float
    d_t_max: float  # math.inf when the time step is unconstrained
    G_omega_max: float

    @property
    def d_t_unconstrained(self) -> bool:
        return math.isinf(self.d_t_max)

    @property
    def overall_ok(self) -> bool:
        return self.d_omega_ok and self.d_t_ok and self.G_omega_ok

    def describe(self) -> str:
        dt = "unconstrained" if self.d_t_unconstrained else f"{self.d_t_max:.10g}"
        return (
            f"d_omega <= {self.d_omega_max:.10g}: {'ok' if self.d_omega_ok else 'VIOLATED'}\n"
            f"d_t <= {dt}: {'ok' if self.d_t_ok else 'VIOLATED'}\n"
            f"G_omega <= {self.G_omega_max:.10g}: {'ok' if self.G_omega_ok else 'VIOLATED'}\n"
            f"overall: {'ok' if self.overall_ok else 'VIOLATED'}"
        )


def max_time_step(params: ModelParams, d_omega: float) -> float:
    """Largest ``d_t`` keeping the centre coefficient of the stencil nonnegative."""
    den = 2.0 * params.D - params.m * d_omega ** 2
    if den <= 0:
        return math.inf
    return params.m ** 2 * d_omega ** 2 / den


def max_half_width(params: ModelParams, d_omega: float) -> float:
    """Largest ``G_omega`` keeping both off-centre coefficients nonnegative."""
    return 2.0 * params.D / (params.m * d_omega) - params.Omega1 - params.K


def stability_conditions(params: ModelParams, d_omega: float, d_t: float,
                         G_omega: float) -> StabilityReport:
    if d_omega <= 0 or d_t <= 0 or G_omega <= 0:
        raise ValidationError("grid spacings and G_omega must be positive")
    d_omega_max = math.sqrt(2.0 * params.D) / params.m
    d_t_max = max_time_step(params, d_omega)
    G_max = max_half_width(params, d_omega)
    return StabilityReport(
        d_omega_ok=d_omega <= d_omega_max,
        d_t_ok=d_t <= d_t_max,
        G_omega_ok=G_omega <= G_max,
        d_omega_max=d_omega_max,
        d_t_max=d_t_max,
        G_omega_max=G_max,
    )


def validate_stability(params: ModelParams, grid: GridSpec) -> StabilityReport:
    return stability_conditions(params, grid.d_omega, grid.d_t, grid.G_omega)


def build_grid(params: ModelParams, target_d_omega: float, target_d_t: float,
               G_omega: float, T: float, d_Omega: float = 0.0,
               unsafe: bool = False) -> GridSpec:
    """Build the lattice, nudging ``d_t`` so the theta period closes exactly.

    ``n_theta = round(2*pi / (d_omega * target_d_t))`` and ``d_t`` is recomputed
    as ``2*pi / (n_theta * d_omega)``. Raises `StabilityError` if the adjusted
    grid breaks the positivity conditions, unless ``unsafe`` is set.
    """
    if not (target_d_omega > 0 and target_d_t > 0 and G_omega > 0 and T > 0):
        raise ValidationError("d_omega, d_t, G_omega and T must be positive")
    if d_Omega < 0:
        raise ValidationError("d_Omega must be nonnegative")
    n_theta = int(round(TWO_PI / (target_d_omega * target_d_t)))
    if n_theta < 1:
        raise ValidationError("time step too large for a single theta cell")
    d_t = TWO_PI / (n_theta * target_d_omega)
    if d_Omega > 0:
        ratio = params.Omega1 / d_Omega
        if not _is_integer(ratio):
            raise ValidationError(f"Omega1/d_Omega = {ratio!r} is not an integer")
        n_Omega = 2 * int(round(ratio)) + 1
    else:
        n_Omega = 1
    grid = GridSpec(d_omega=target_d_omega, d_t=d_t, G_omega=G_omega, T=T,
                    n_theta=n_theta, d_Omega=d_Omega, n_Omega=n_Omega)
    if not unsafe:
        report = validate_stability(params, grid)
        if not report.overall_ok:
            raise StabilityError("grid violates the stability conditions:\n"
                                 + report.describe())
    return grid


# Candidate omega spacings for reconstructed preset grids: unit fractions and
# multiples of 0.05, so that G_omega/d_omega stays an integer.
_SPACING_LADDER = sorted({round(h, 12): h for h in
                          [1.0 / n for n in range(1, 41)] + [k / 20.0 for k in range(1, 21)]}.values())


def _fit_half_width(params: ModelParams, h: float, G_pref: float) -> float:
    """Largest multiple of ``h`` not above ``min(G_pref, max_half_width)``."""
    return round(h * math.floor(min(G_pref, max_half_width(params, h)) / h + 1e-9), 12)


def reconstruct_grid(params: ModelParams, target_d_t: float, T: float,
                     G_pref: float = 4.0, G_min: float = 2.0,
                     d_omega_pref: float = 0.2, d_Omega: float = 0.0) -> GridSpec:
    """Pick ``(d_omega, G_omega)`` for a run whose only given step is ``d_t``.

    Keeps ``target_d_t`` whenever some ladder spacing admits it with
    ``G_omega >= G_min``; among those, maximise ``G_omega`` (capped at
    ``G_pref``), then prefer the spacing closest to ``d_omega_pref``. If no
    spacing admits ``target_d_t``, the widest admissible half-width is kept and
    the time step is lowered to 98% of its stability limit.
    """
    best = None
    for h in _SPACING_LADDER:
        if h > math.sqrt(2.0 * params.D) / params.m:
            continue
        G = _fit_half_width(params, h, G_pref)
        if G < G_min - 1e-9:
            continue
        if target_d_t * (1 + 1e-3) > max_time_step(params, h):
            continue
        key = (round(G, 9), -abs(h - d_omega_pref))
        if best is None or key > best[0]:
            best = (key, h, G)
    if best is not None:
        _, h, G = best
        return build_grid(params, h, target_d_t, G, T, d_Omega)

    fallback = None
    for h in _SPACING_LADDER:
        if h > math.sqrt(2.0 * params.D) / params.m:
            continue
        G = _fit_half_width(params, h, G_pref)
        if G <= 0:
            continue
        key = (round(G, 9), h)
        if fallback is None or key > fallback[0]:
            fallback = (key, h, G)
    if fallback is None:
        raise StabilityError("no admissible grid for these parameters")
    _, h, G = fallback
    return build_grid(params, h, 0.98 * max_time_step(params, h), G, T, d_Omega)


@dataclass(frozen=True)
class FrequencyDistribution:
    """Natural-frequency density tabulated on the Omega slices of a grid.

    ``weights[k] = g_k * d_Omega`` are slice probabilities summing to one;
    for a point mass there is one slice of weight 1 and ``d_Omega == 0``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    d_Omega: float

    @property
    def density(self) -> np.ndarray:
        if self.d_Omega == 0:
            return self.weights.copy()
        return self.weights / self.d_Omega

    @property
    def is_point_mass(self) -> bool:
        return self.nodes.size == 1

    def support_half_width(self) -> float:
        nz = self.nodes[self.weights > 0]
        return float(np.max(np.abs(nz))) if nz.size else 0.0


def build_frequency_distribution(spec: dict, grid: GridSpec) -> FrequencyDistribution:
    """Tabulate a distribution description on the Omega slices of ``grid``.

    Recognised kinds: ``point`` (key ``at``), ``uniform`` (``low``, ``high``),
    ``gaussian`` (``mean``, ``std``, truncated to the grid), ``tabulated``
    (``weights`` on the nodes). Every cell gets full rectangle weight, then
    the table is renormalised so that ``sum(g_k) * d_Omega == 1``.
    """
    kind = spec.get("kind", "point")
    nodes = grid.Omega
    half = float(np.max(np.abs(nodes))) if nodes.size else 0.0
    tol = 1e-9 * max(1.0, half)

    if kind == "point":
        at = float(spec.get("at", 0.0))
        if grid.n_Omega == 1:
            return FrequencyDistribution(np.array([at]), np.array([1.0]), grid.d_Omega)
        hit = np.flatnonzero(np.abs(nodes - at) <= tol)
        if hit.size != 1:
            raise ValidationError(f"point mass at {at} is not an Omega node")
        w = np.zeros(nodes.size)
        w[hit[0]] = 1.0
        return FrequencyDistribution(nodes, w, grid.d_Omega)

    if grid.d_Omega == 0:
        raise ValidationError(f"a {kind!r} distribution needs d_Omega > 0")
    if kind == "uniform":
        lo, hi = float(spec["low"]), float(spec["high"])
        if lo < -half - tol or hi > half + tol:
            raise ValidationError("support exceeds [-Omega1, Omega1]")
        raw = ((nodes >= lo - tol) & (nodes <= hi + tol)).astype(float)
    elif kind == "gaussian":
        mean, std = float(spec.get("mean", 0.0)), float(spec["std"])
        if std <= 0:
            raise ValidationError("gaussian std must be positive")
        raw = np.exp(-0.5 * ((nodes - mean) / std) ** 2)
    elif kind == "tabulated":
        raw = np.asarray(spec["weights"], dtype=float)
        if raw.shape != nodes.shape:
            raise ValidationError(
                f"tabulated weights need {nodes.size} entries, got {raw.size}")
    else:
        raise ValidationError(f"unknown distribution kind {kind!r}")

    if np.any(raw < 0) or not np.all(np.isfinite(raw)):
        raise ValidationError("distribution weights must be finite and nonnegative")
    total = raw.sum()
    if total <= 0:
        raise ValidationError("distribution has empty support")
    return FrequencyDistribution(nodes, raw / total, grid.d_Omega)
