"""hbfsim: simulator for the dual-switch low-power hybrid beamforming
transmitter.

Layers: `channel` (clustered mmWave channel generation, import/export, CSI
degradation), `hardware` (DAC/phase-shifter models, power budget),
`metrics` (precoder composition and rate/efficiency evaluation),
`precoding` (the block-descent solver and baselines), and `harness`
(configuration-driven Monte-Carlo sweeps with CSV/plot output and a CLI).
"""

from .channel import (
    ChannelRealization,
    PathSet,
    corrupt_csi,
    export_channel,
    generate_channel,
    import_channel,
    partial_csi_channel,
    reconstruct_channel,
    upa_response,
)
from .config import SystemConfig
from .hardware import (
    PowerParams,
    delta_gains,
    delta_matrix,
    fixed_rear_switch,
    quantize_phase,
    total_power,
)
from .metrics import (
    LinkBudget,
    PrecoderSolution,
    compose_analog,
    energy_efficiency,
    mutual_information,
    optimal_combiner,
    optimal_precoder,
    spectral_efficiency,
)
from .precoding import (
    SOLVER_NAMES,
    SolverConfig,
    SolverResult,
    backend_name,
    bcd_precoder,
    run_solver,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization",
    "LinkBudget",
    "PathSet",
    "PowerParams",
    "PrecoderSolution",
    "SOLVER_NAMES",
    "SolverConfig",
    "SolverResult",
    "SystemConfig",
    "backend_name",
    "bcd_precoder",
    "compose_analog",
    "corrupt_csi",
    "delta_gains",
    "delta_matrix",
    "energy_efficiency",
    "export_channel",
    "fixed_rear_switch",
    "generate_channel",
    "import_channel",
    "mutual_information",
    "optimal_combiner",
    "optimal_precoder",
    "partial_csi_channel",
    "quantize_phase",
    "reconstruct_channel",
    "run_solver",
    "spectral_efficiency",
    "total_power",
    "upa_response",
]
