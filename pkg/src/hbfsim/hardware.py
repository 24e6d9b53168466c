"""Hardware non-idealities and transmitter power accounting.

Covers the multiplicative DAC quantization gain (additive quantization noise
is negligible at practical resolutions and is not modeled), the q-bit phase
shifter grid, and the total power consumed by the switch/phase-shifter
transmitter front end.  All power bookkeeping is in mW.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import DimensionError, ParameterError

TWO_PI = 2.0 * math.pi

# coefficient of the 2^(-2b) quantization-distortion term
_DAC_COEFF = math.pi * math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class PowerParams:
    """Hardware power constants (mW unless noted).  Defaults are the
    measurement-based values used throughout the experiments."""

    p_bb: float = 200.0    # baseband processing
    p_ps: float = 30.0     # per adjustable phase shifter
    p_sw: float = 5.0      # per RF switch
    p_rfc: float = 40.0    # per active RF chain
    p_d: float = 0.39      # DAC power per 2^b unit (FoM x sampling rate)
    p_t: float = 20.0      # per-antenna-element transmit power
    rho_pa: float = 0.3    # power-amplifier conversion efficiency
    b_min: int = 4         # DAC resolution lower bound (bits)
    b_max: int = 16        # DAC resolution upper bound (bits)

    def validate(self) -> "PowerParams":
        for name in ("p_bb", "p_ps", "p_sw", "p_rfc", "p_d", "p_t"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0")
        if not 0.0 < self.rho_pa <= 1.0:
            raise ParameterError(f"rho_pa={self.rho_pa} must be in (0, 1]")
        if self.b_min > self.b_max:
            raise ParameterError(f"b_min={self.b_min} > b_max={self.b_max}")
        return self


def validate_dac_vector(b: np.ndarray, pp: PowerParams) -> np.ndarray:
    """Check a per-chain DAC resolution vector against the bounds."""
    b = np.asarray(b, dtype=np.int64)
    if b.ndim != 1:
        raise DimensionError("DAC resolution vector must be one-dimensional")
    if np.any(b < pp.b_min) or np.any(b > pp.b_max):
        raise ParameterError(
            f"DAC resolutions {b.tolist()} outside [{pp.b_min}, {pp.b_max}]"
        )
    return b


def delta_gains(b) -> np.ndarray:
    """Per-chain multiplicative quantization gain 1 - (pi*sqrt(3)/2) * 2^(-2 b)."""
    b = np.asarray(b, dtype=np.float64)
    return 1.0 - _DAC_COEFF * np.exp2(-2.0 * b)


def delta_matrix(b) -> np.ndarray:
    """Diagonal distortion matrix with delta_gains(b) on the diagonal."""
    return np.diag(delta_gains(b))


def quantize_phase(phi: float, q: int) -> float:
    """Snap a phase to the nearest member of {2*pi*k / 2^q : 0 <= k < 2^q}.

    Distance is circular (wrap-around), and exact midpoints resolve toward
    the smaller index k.
    """
    if q < 1:
        raise ParameterError(f"q={q} must be >= 1")
    return TWO_PI * quantize_phase_index(phi, q) / (1 << q)


def quantize_phase_index(phi: float, q: int) -> int:
    """Grid index k of the quantized phase; same rounding rule as quantize_phase."""
    m = 1 << q
    r = (float(phi) % TWO_PI) / (TWO_PI / m)
    k = math.floor(r + 0.5)
    if r + 0.5 == k:  # exact midpoint: prefer the smaller grid index
        k -= 1
    return k % m


def occupied_chains(s1: np.ndarray) -> np.ndarray:
    """Boolean mask of RF chains with at least one connected phase shifter."""
    return np.asarray(s1).sum(axis=0) > 0


def validate_front_switch(s1: np.ndarray, n_trf: int = None) -> np.ndarray:
    """Check the one-connection-per-phase-shifter structure of S1."""
    s1 = np.asarray(s1)
    if s1.ndim != 2:
        raise DimensionError("S1 must be a 2-D binary matrix")
    if n_trf is not None and s1.shape[1] != n_trf:
        raise DimensionError(f"S1 has {s1.shape[1]} columns, expected {n_trf}")
    if not np.all((s1 == 0) | (s1 == 1)):
        raise ParameterError("S1 entries must be 0/1")
    if not np.all(s1.sum(axis=1) == 1):
        raise ParameterError("every S1 row must select exactly one RF chain")
    return s1


def total_power(s1, s2, b, pp: PowerParams, cfg: SystemConfig,
                switch_planes: int = 2) -> float:
    """Total transmitter power in mW.

    Constant part: baseband plus every phase shifter plus `switch_planes`
    switches per shifter.  Chain-dependent part: one RF converter per
    occupied chain plus exponential DAC power on occupied chains only.
    Antenna-dependent part: PA draw for each connected antenna plus the
    normalized radiated power n_s * connected / n_t.
    """
    s1 = validate_front_switch(s1)
    s2 = np.asarray(s2)
    n_ps = s1.shape[0]
    if s2.ndim != 2 or s2.shape != (cfg.n_t, n_ps):
        raise DimensionError(
            f"S2 shape {getattr(s2, 'shape', None)} does not match "
            f"(n_t={cfg.n_t}, n_ps={n_ps})"
        )
    b = validate_dac_vector(b, pp)
    if b.shape[0] != s1.shape[1]:
        raise DimensionError(f"b has {b.shape[0]} entries for {s1.shape[1]} chains")

    active = occupied_chains(s1)
    n_antennas = int(np.count_nonzero(s2.sum(axis=1)))

    p_con = pp.p_bb + pp.p_ps * n_ps + switch_planes * pp.p_sw * n_ps
    p_chains = pp.p_rfc * int(np.count_nonzero(active)) \
        + pp.p_d * float(np.exp2(b[active].astype(np.float64)).sum())
    p_radiate = pp.p_t / pp.rho_pa * n_antennas + cfg.n_s * n_antennas / cfg.n_t
    return float(p_con + p_chains + p_radiate)


def fixed_rear_switch(n_t: int, n_ps: int) -> np.ndarray:
    """Default rear switch matrix: shifter i feeds antenna i, the remaining
    n_t - n_ps antennas stay dark."""
    if n_ps > n_t:
        raise DimensionError(f"n_ps={n_ps} exceeds n_t={n_t}")
    s2 = np.zeros((n_t, n_ps), dtype=np.int8)
    s2[:n_ps, :] = np.eye(n_ps, dtype=np.int8)
    return s2
