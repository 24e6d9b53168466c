"""System-level configuration shared by the channel, precoding, and harness
layers.

Defaults follow the reference experiment setup: a 64-antenna transmitter and
16-antenna receiver (both uniform planar arrays), 4 RF chains, 50 phase
shifters, 2 streams, 4-bit phase quantization.
"""

from dataclasses import dataclass, replace
from math import isqrt

from .errors import DimensionError, ParameterError

CSI_MODES = ("full", "partial", "corrupted")


def is_perfect_square(n: int) -> bool:
    return n > 0 and isqrt(n) ** 2 == n


@dataclass(frozen=True)
class SystemConfig:
    """Static system description plus sweep/solver controls.

    Antenna counts must be perfect squares (sqrt(N) x sqrt(N) planar grids)
    and the architecture requires n_s <= n_trf <= n_ps <= n_t.
    """

    n_t: int = 64          # transmit antennas
    n_r: int = 16          # receive antennas
    n_trf: int = 4         # transmit RF chains
    n_ps: int = 50         # phase shifters
    n_s: int = 2           # data streams
    q: int = 4             # phase-shifter resolution bits
    n_paths: int = 5       # multipath components of the generated channel
    snr_grid: tuple = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    snr_db: float = 20.0   # fixed SNR used by the non-SNR sweep axes
    nrf_grid: tuple = (2, 3, 4, 5, 6, 7, 8)
    xi_grid: tuple = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    trials: int = 50
    seed: int = 0
    csi_mode: str = "full"     # full | partial | corrupted
    xi: float = 1.0            # estimation accuracy for csi_mode=corrupted
    n_iter1: int = 10          # outer (block descent) iteration cap
    n_iter2: int = 20          # inner (alternating minimization) iteration cap
    tol: float = 1e-4          # relative-change stopping threshold
    channel_file: str = ""     # non-empty: import this channel instead of generating

    def validate(self) -> "SystemConfig":
        if not is_perfect_square(self.n_t):
            raise DimensionError(f"n_t={self.n_t} must be a perfect square")
        if not is_perfect_square(self.n_r):
            raise DimensionError(f"n_r={self.n_r} must be a perfect square")
        if not (1 <= self.n_s <= self.n_trf <= self.n_ps <= self.n_t):
            raise DimensionError(
                f"need n_s <= n_trf <= n_ps <= n_t, got "
                f"{self.n_s}/{self.n_trf}/{self.n_ps}/{self.n_t}"
            )
        if self.q < 1:
            raise ParameterError(f"q={self.q} must be >= 1")
        if self.n_paths < 1:
            raise ParameterError(f"n_paths={self.n_paths} must be >= 1")
        if self.trials < 1:
            raise ParameterError(f"trials={self.trials} must be >= 1")
        if self.n_iter1 < 1 or self.n_iter2 < 1:
            raise ParameterError("iteration caps must be >= 1")
        if self.tol <= 0:
            raise ParameterError("tol must be positive")
        if self.csi_mode not in CSI_MODES:
            raise ParameterError(f"csi_mode must be one of {CSI_MODES}")
        if not 0.0 <= self.xi <= 1.0:
            raise ParameterError(f"xi={self.xi} must be in [0, 1]")
        return self

    def with_overrides(self, **kw) -> "SystemConfig":
        return replace(self, **kw).validate()
