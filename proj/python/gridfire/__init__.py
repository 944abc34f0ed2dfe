"""Wildfire-aware distribution switching under decision-dependent ambiguity."""

from ._core import (
    CalibrationError,
    ConfigError,
    DduConfig,
    GridInstance,
    InstanceError,
    PreconditionError,
    SignatureError,
    SolverError,
    SupportCapError,
    annual_rate_to_horizon_probability,
    cuts_from_json,
    cuts_to_json,
    random_ddu_config,
    random_radial_instance,
    recourse_cost,
    run_cli,
    simulate,
    solve_ddro,
    wildfire_bypass_instance,
    worst_case_expectation,
)

__all__ = [
    "CalibrationError",
    "ConfigError",
    "DduConfig",
    "GridInstance",
    "InstanceError",
    "PreconditionError",
    "SignatureError",
    "SolverError",
    "SupportCapError",
    "annual_rate_to_horizon_probability",
    "cuts_from_json",
    "cuts_to_json",
    "random_ddu_config",
    "random_radial_instance",
    "recourse_cost",
    "run_cli",
    "simulate",
    "solve_ddro",
    "wildfire_bypass_instance",
    "worst_case_expectation",
]
