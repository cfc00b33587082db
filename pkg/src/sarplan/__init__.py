"""Coverage planning for a UAV-borne side-looking radar.

Library layout:

- :mod:`sarplan.params` / :mod:`sarplan.model` — parameter records, derived
  constants, and pure evaluators for geometry, link budget, energy, and
  trajectory construction.
- :mod:`sarplan.robust` — Gaussian deviation model and the closed-form
  trajectory compensation.
- :mod:`sarplan.subproblem` — the convex per-iteration program (conic IR +
  solver binding).
- :mod:`sarplan.sca` — the successive-convex-approximation planner and the
  outer search over the scan count.
- :mod:`sarplan.monotonic` — per-scan monotonic relaxation and the polyblock
  global upper bound.
- :mod:`sarplan.sim` — Monte-Carlo deviation simulator (missed area,
  reliability).
- :mod:`sarplan.config` / :mod:`sarplan.cli` — JSON config with unit
  parsing and the batch command-line front-end.
"""

from .params import (CommParams, EnergyParams, LinkBudget, MissionParams,
                     Params, RadarParams, default_params)
from .model import (DerivedConstants, Plan, ValidationReport, battery_trace,
                    build_nominal_trajectory, coverage, derive_constants,
                    link_rate, propulsion_power, sar_data_rate, swath_width,
                    validate_plan)
from .robust import (Compensation, DeviationModel, compensation, erfinv,
                     no_compensation, robust_trajectory, zero_deviation)
from .sca import (MissionReport, ScaConfig, ScaResult, n_upper_bound,
                  plan_mission, sca_solve, scheme_compensation)
from .monotonic import (BoundProblem, BoundResult, build_bound_problem,
                        polyblock_solve)
from .sim import (SimConfig, SimResult, missed_area, reliability_estimate,
                  run_simulation, sample_actual_trajectory, trajectory_rng)
from .config import (ConfigError, MissionConfig, SolverSettings, load_config,
                     parse_config, parse_quantity, with_overrides)

__version__ = "0.1.0"

__all__ = [
    "BoundProblem", "BoundResult", "CommParams", "Compensation",
    "ConfigError", "DerivedConstants", "DeviationModel", "EnergyParams",
    "LinkBudget", "MissionConfig", "MissionParams", "MissionReport",
    "Params", "Plan", "RadarParams", "ScaConfig", "ScaResult", "SimConfig",
    "SimResult", "SolverSettings", "ValidationReport", "battery_trace",
    "build_bound_problem", "build_nominal_trajectory", "compensation",
    "coverage", "default_params", "derive_constants", "erfinv", "link_rate",
    "load_config", "missed_area", "n_upper_bound", "no_compensation",
    "parse_config", "parse_quantity", "plan_mission", "polyblock_solve",
    "propulsion_power", "reliability_estimate", "robust_trajectory",
    "run_simulation", "sample_actual_trajectory", "sar_data_rate",
    "sca_solve", "scheme_compensation", "swath_width", "trajectory_rng",
    "validate_plan", "with_overrides", "zero_deviation", "__version__",
]
