"""Mean-field Kuramoto model with inertia and noise: an explicit
positivity-preserving solver for the kinetic equation, the exact Gaussian
kernels of the linear problem, and a finite-N Langevin cross-check."""

from .model import (FrequencyDistribution, GridSpec, ModelParams, SimulationError,
                    StabilityError, StabilityReport, ValidationError, build_frequency_distribution,
                    build_grid, reconstruct_grid, validate_stability)
from .meanfield import OrderParameter, kura_field, order_parameters, phi_discrete
from .solver import (DensityField, SimulationResult, StepReport, evolve, init_density, la_step,
                     renormalize, run_simulation)
from .config import RunConfig, parse_config, run_preset

__version__ = "0.1.0"
