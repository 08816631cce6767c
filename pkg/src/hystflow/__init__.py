"""Two-phase porous-media flow with play-type hysteresis and dynamic
capillarity: constitutive curves, traveling-wave orbits, admissible Riemann
solutions and a finite-volume solver, plus a CLI tying them together."""

from .constitutive import (
    CapillaryModel,
    ConstitutiveModel,
    DimensionalParams,
    FLUX_PRESETS,
    PermeabilityModel,
    VanGenuchtenCurve,
    nondimensionalize,
)
from .entropy import solve_A, solve_B
from .errors import ConfigError, DomainError, HystflowError, NumericalError
from .flux_geometry import (
    FluxGeometry,
    base_state,
    plateau_saturation,
    tangent_saturations_B,
)
from .harness import RunConfig, compare, estimate_front_speed, extract_plateau, main
from .pde_solver import FVSolver, Grid, SolverConfig, run
from .tw_solver import (
    Orbit,
    OrbitOutcome,
    SolutionSet,
    TWProblem,
    WaveAnalysis,
    integrate_orbit,
    rh_speed,
    scenario_b_orbit,
    tau_star,
)

__version__ = "0.1.0"

__all__ = [
    "CapillaryModel",
    "ConfigError",
    "ConstitutiveModel",
    "DimensionalParams",
    "DomainError",
    "FLUX_PRESETS",
    "FVSolver",
    "FluxGeometry",
    "Grid",
    "HystflowError",
    "NumericalError",
    "Orbit",
    "OrbitOutcome",
    "PermeabilityModel",
    "RunConfig",
    "SolutionSet",
    "SolverConfig",
    "TWProblem",
    "VanGenuchtenCurve",
    "WaveAnalysis",
    "base_state",
    "compare",
    "estimate_front_speed",
    "extract_plateau",
    "integrate_orbit",
    "main",
    "nondimensionalize",
    "plateau_saturation",
    "rh_speed",
    "run",
    "scenario_b_orbit",
    "solve_A",
    "solve_B",
    "tangent_saturations_B",
    "tau_star",
]
