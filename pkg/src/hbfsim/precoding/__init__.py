"""Hybrid precoding solvers: the block-coordinate-descent scheme for the
dual-switch architecture plus the reference baselines."""

from ._backend import backend_name
from .altmin import altmin_inner, solve_fbb_procrustes, solve_switch_phase
from .baselines import (
    SOLVER_NAMES,
    SolverResult,
    dsa_altmin_precoder,
    dsa_power,
    fc_omp_power,
    full_digital_power,
    full_digital_precoder,
    omp_dictionary,
    omp_fc_precoder,
    run_solver,
)
from .bcd import (
    SolveTrace,
    SolverConfig,
    bcd_precoder,
    normalize_fbb,
    search_dac_resolution,
)

__all__ = [
    "SOLVER_NAMES",
    "SolveTrace",
    "SolverConfig",
    "SolverResult",
    "altmin_inner",
    "backend_name",
    "bcd_precoder",
    "dsa_altmin_precoder",
    "dsa_power",
    "fc_omp_power",
    "full_digital_power",
    "full_digital_precoder",
    "normalize_fbb",
    "omp_dictionary",
    "omp_fc_precoder",
    "run_solver",
    "search_dac_resolution",
    "solve_fbb_procrustes",
    "solve_switch_phase",
]
