"""Laser phase noise in driven cavities: heating budgets and simulators.

The package splits into closed-form budgets (analytic), exact-update
Monte Carlo integrators (langevin) driven by reproducible noise streams
(noise), steady-state solvers for the optomechanically coupled system
(coupled), and INI scenario handling plus a command line (config, cli).
"""

from . import kernels
from .errors import (
    ConfigError,
    DivergenceError,
    InstabilityError,
    NumericalError,
    PhaseNoiseError,
)
from .core import (
    Bundle,
    NoiseSpec,
    SimConfig,
    SystemParams,
    collect_violations,
    pump_rate_from_power,
    tabulated_from_arrays,
    validate,
)
from .noise import (
    NoisePath,
    PsdEstimate,
    RNG_ALGORITHM,
    STREAMS_PER_TRAJECTORY,
    estimate_psd,
    gen_phase,
    gen_phase_colored,
    gen_phase_white,
    gen_vacuum,
    read_spectrum_csv,
    stream,
    write_spectrum_csv,
)
from .analytic import (
    CODATA,
    ConditionsReport,
    PhysicalConstants,
    SteadyStateReport,
    check_conditions,
    effective_temperature,
    mean_amplitude,
    phase_noise_occupation_colored,
    phase_noise_occupation_white,
    sqrt_t_gamma_figure,
    steady_state_report,
)
from .langevin import (
    EnsembleResult,
    EnsembleStats,
    MODES,
    THREADS_ENV,
    Trajectory,
    integrate_displaced,
    integrate_lab,
    integrate_twin,
    integrate_two_cavity_lab,
    run_ensemble,
    step_displaced,
    step_lab,
    step_twin,
)
from .coupled import (
    CoolingReport,
    CoupledModel,
    MechanicalParams,
    build_model,
    solve_spectral,
    solve_steady,
)
from .config import (
    RATE_FIELDS,
    Scenario,
    SweepSpec,
    apply_parameter,
    load_scenario,
    parse_scenario_text,
    serialize_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "Bundle",
    "CODATA",
    "ConditionsReport",
    "ConfigError",
    "CoolingReport",
    "CoupledModel",
    "DivergenceError",
    "EnsembleResult",
    "EnsembleStats",
    "InstabilityError",
    "MODES",
    "MechanicalParams",
    "NoisePath",
    "NoiseSpec",
    "NumericalError",
    "PhaseNoiseError",
    "PhysicalConstants",
    "PsdEstimate",
    "RATE_FIELDS",
    "RNG_ALGORITHM",
    "STREAMS_PER_TRAJECTORY",
    "Scenario",
    "SimConfig",
    "SteadyStateReport",
    "SweepSpec",
    "SystemParams",
    "THREADS_ENV",
    "Trajectory",
    "apply_parameter",
    "build_model",
    "check_conditions",
    "collect_violations",
    "effective_temperature",
    "estimate_psd",
    "gen_phase",
    "gen_phase_colored",
    "gen_phase_white",
    "gen_vacuum",
    "integrate_displaced",
    "integrate_lab",
    "integrate_twin",
    "integrate_two_cavity_lab",
    "kernels",
    "load_scenario",
    "mean_amplitude",
    "parse_scenario_text",
    "phase_noise_occupation_colored",
    "phase_noise_occupation_white",
    "pump_rate_from_power",
    "read_spectrum_csv",
    "run_ensemble",
    "serialize_scenario",
    "solve_spectral",
    "solve_steady",
    "sqrt_t_gamma_figure",
    "steady_state_report",
    "step_displaced",
    "step_lab",
    "step_twin",
    "stream",
    "tabulated_from_arrays",
    "validate",
    "write_spectrum_csv",
    "__version__",
]
