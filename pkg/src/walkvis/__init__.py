"""Generalized visibility of lattice points along power curves: limiting
densities, seeded alpha-random-walk simulation, and verifiers for the
supporting arithmetic identities."""

from .numtheory import (
    BExponent,
    CapacityError,
    DensityResult,
    PrimeTables,
    build_tables,
    euler_product_truncated,
    gcd_b,
    zeta_int,
)
from .visibility import (
    LatticePoint,
    WatchpointSet,
    WatchpointValidationError,
    curve_oracle_visible,
    is_b_visible,
    validate_watchpoint_set,
)
from .walk import (
    WalkerConfig,
    derive_trial_seed,
    next_uniform,
    walk_positions,
)
from .estimators import (
    AggregateResult,
    SimulationSpec,
    TrialResult,
    WalkersMode,
    WatchpointsMode,
    aggregate_trials,
    exact_expectation_walkers,
    exact_expectation_watchpoints,
    simulate_walkers_run,
    simulate_watchpoint_run,
)
from .theory import (
    MeanValueReport,
    binomial_congruence_sum,
    density_walkers,
    density_watchpoints,
    f_b_value,
    f_b_values_upto,
    f_bs_value,
    gcdb_conditioned_binomial_sum,
    mean_value_check,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateResult",
    "BExponent",
    "CapacityError",
    "DensityResult",
    "LatticePoint",
    "MeanValueReport",
    "PrimeTables",
    "SimulationSpec",
    "TrialResult",
    "WalkerConfig",
    "WalkersMode",
    "WatchpointSet",
    "WatchpointValidationError",
    "WatchpointsMode",
    "aggregate_trials",
    "binomial_congruence_sum",
    "build_tables",
    "curve_oracle_visible",
    "density_walkers",
    "density_watchpoints",
    "derive_trial_seed",
    "euler_product_truncated",
    "exact_expectation_walkers",
    "exact_expectation_watchpoints",
    "f_b_value",
    "f_b_values_upto",
    "f_bs_value",
    "gcd_b",
    "gcdb_conditioned_binomial_sum",
    "is_b_visible",
    "mean_value_check",
    "next_uniform",
    "simulate_walkers_run",
    "simulate_watchpoint_run",
    "validate_watchpoint_set",
    "walk_positions",
    "zeta_int",
]
