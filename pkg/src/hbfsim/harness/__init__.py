"""Monte-Carlo sweep harness: sweep engines, CSV/plot emission, config
parsing, and the `hbfsim` command-line entry point."""

from ..config import SystemConfig
from .io import (
    dump_config,
    emit_aggregate_csv,
    emit_csv,
    emit_plot,
    load_config,
    parse_config_text,
    read_sweep_csv,
)
from .sweep import (
    AXES,
    CSV_COLUMNS,
    SweepResult,
    TrialRow,
    run_nrf_sweep,
    run_partial_csi_sweep,
    run_snr_sweep,
    run_xi_sweep,
)

__all__ = [
    "AXES",
    "CSV_COLUMNS",
    "SweepResult",
    "SystemConfig",
    "TrialRow",
    "dump_config",
    "emit_aggregate_csv",
    "emit_csv",
    "emit_plot",
    "load_config",
    "parse_config_text",
    "read_sweep_csv",
    "run_nrf_sweep",
    "run_partial_csi_sweep",
    "run_snr_sweep",
    "run_xi_sweep",
]
