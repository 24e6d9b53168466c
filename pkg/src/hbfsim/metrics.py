"""Signal-model evaluation: analog precoder composition, mutual information,
spectral efficiency, and energy efficiency.

The analog precoder is assembled from the rear switch matrix, the diagonal
phase-shifter bank, and the front switch matrix; the DAC distortion enters
all rate expressions as a per-chain diagonal gain.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .config import SystemConfig
from .errors import (
    DegenerateChannelError,
    DimensionError,
    ParameterError,
    SingularCombinerError,
)
from .hardware import (
    PowerParams,
    delta_gains,
    fixed_rear_switch,
    total_power,
    validate_front_switch,
)

LOG2E = math.log2(math.e)


@dataclass(frozen=True)
class LinkBudget:
    """Average received power rho and noise variance sigma_n2 with
    rho / sigma_n2 = 10^(snr_db / 10)."""

    rho: float
    sigma_n2: float
    snr_db: float

    def __post_init__(self):
        if self.sigma_n2 <= 0:
            raise ParameterError("sigma_n2 must be positive")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "LinkBudget":
        # unit noise power; SNR fixes the received power
        return cls(rho=10.0 ** (snr_db / 10.0), sigma_n2=1.0, snr_db=float(snr_db))


@dataclass(frozen=True)
class PrecoderSolution:
    """The four transmit-side optimization variables plus the fixed rear
    switch matrix.

    f_bb : (n_trf, n_s) digital precoder
    s1   : (n_ps, n_trf) binary front switch, exactly one 1 per row
    f_ps : (n_ps,) unit-modulus diagonal of the phase-shifter bank
    s2   : (n_t, n_ps) binary rear switch
    b    : (n_trf,) per-chain DAC resolution in bits
    """

    f_bb: np.ndarray
    s1: np.ndarray
    f_ps: np.ndarray
    s2: np.ndarray
    b: np.ndarray

    @property
    def n_trf(self) -> int:
        return self.f_bb.shape[0]

    @property
    def n_s(self) -> int:
        return self.f_bb.shape[1]

    @property
    def n_ps(self) -> int:
        return self.f_ps.shape[0]

    @property
    def n_t(self) -> int:
        return self.s2.shape[0]

    def with_b(self, b) -> "PrecoderSolution":
        return replace(self, b=np.asarray(b, dtype=np.int64))

    def with_f_bb(self, f_bb) -> "PrecoderSolution":
        return replace(self, f_bb=np.asarray(f_bb, dtype=np.complex128))


def compose_analog(sol: PrecoderSolution) -> np.ndarray:
    """Analog precoding matrix: rear switches applied to the phase-shifted
    outputs of the front switches.  Every nonzero entry has unit modulus."""
    s1 = validate_front_switch(sol.s1)
    s2 = np.asarray(sol.s2)
    f_ps = np.asarray(sol.f_ps)
    if s2.shape[1] != f_ps.shape[0] or f_ps.shape[0] != s1.shape[0]:
        raise DimensionError(
            f"inconsistent analog dimensions: s2 {s2.shape}, f_ps {f_ps.shape}, s1 {s1.shape}"
        )
    return s2 @ (f_ps[:, None] * s1)


def effective_channel(h: np.ndarray, sol: PrecoderSolution) -> np.ndarray:
    """H * F_RF * Delta * F_BB, the end-to-end linear map seen by the streams."""
    d = delta_gains(sol.b)
    return h @ ((compose_analog(sol) * d) @ sol.f_bb)


def _capacity_from_singular_values(s: np.ndarray, c: float) -> float:
    return float(np.sum(np.log2(1.0 + c * s * s)))


def mutual_information(h: np.ndarray, sol: PrecoderSolution, link: LinkBudget,
                       cfg: SystemConfig) -> float:
    """Transmit-side rate surrogate log2 det(I + rho/(n_s sigma^2) * T T^H)
    with T the effective channel.  Evaluated through singular values, which
    keeps the determinant computation stable for any conditioning."""
    h = np.asarray(h)
    if not np.all(np.isfinite(h)):
        raise ParameterError("channel matrix contains non-finite entries")
    t = effective_channel(h, sol)
    s = np.linalg.svd(t, compute_uv=False)
    c = link.rho / (cfg.n_s * link.sigma_n2)
    return _capacity_from_singular_values(s, c)


def spectral_efficiency(h: np.ndarray, sol: PrecoderSolution, w: np.ndarray,
                        link: LinkBudget, cfg: SystemConfig) -> float:
    """Rate after the receive combiner w, including the combiner's noise
    coloring.  For orthonormal w the whitening term is the identity; the
    general case is handled through a Cholesky factor of w^H w rather than
    an explicit inverse."""
    w = np.asarray(w)
    t = effective_channel(h, sol)
    bt = w.conj().T @ t
    g = w.conj().T @ w
    n_s = g.shape[0]
    if np.linalg.norm(g - np.eye(n_s)) > 1e-10:
        try:
            chol = np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise SingularCombinerError("combiner columns are linearly dependent") from None
        # cast the whitened det(I + c G^{-1} B B^H) into singular-value form
        bt = np.linalg.solve(chol, bt)
    s = np.linalg.svd(bt, compute_uv=False)
    c = link.rho / (cfg.n_s * link.sigma_n2)
    return _capacity_from_singular_values(s, c)


def optimal_combiner(h: np.ndarray, sol: PrecoderSolution, cfg: SystemConfig) -> np.ndarray:
    """Orthonormal combiner spanning the dominant left singular directions of
    the effective channel (full-resolution digital receiver).

    If the effective channel has rank below n_s the remaining columns are an
    arbitrary orthonormal complement and a warning is emitted; the padded
    streams contribute zero rate."""
    t = effective_channel(h, sol)
    n_r = t.shape[0]
    if n_r < cfg.n_s:
        raise DimensionError(f"receiver dimension {n_r} below n_s={cfg.n_s}")
    u, s, _ = np.linalg.svd(t, full_matrices=True)
    rank = int(np.count_nonzero(s > max(t.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)))
    if rank < cfg.n_s:
        warnings.warn(
            f"effective channel rank {rank} < n_s={cfg.n_s}; padding combiner",
            RuntimeWarning,
        )
    return u[:, : cfg.n_s]


def optimal_precoder(h: np.ndarray, n_s: int) -> np.ndarray:
    """Unconstrained precoder: the n_s dominant right singular vectors of the
    channel (semi-unitary)."""
    h = np.asarray(h)
    if min(h.shape) < n_s:
        raise DegenerateChannelError(f"channel of shape {h.shape} supports < {n_s} streams")
    _, s, vh = np.linalg.svd(h)
    if s[n_s - 1] <= max(h.shape) * np.finfo(float).eps * s[0]:
        raise DegenerateChannelError(f"channel rank below n_s={n_s}")
    return vh[:n_s].conj().T


def energy_efficiency(h: np.ndarray, sol: PrecoderSolution, link: LinkBudget,
                      pp: PowerParams, cfg: SystemConfig,
                      switch_planes: int = 2) -> float:
    """Transmit-side energy efficiency in bits/Hz/J: mutual information over
    total consumed power converted to watts."""
    mi = mutual_information(h, sol, link, cfg)
    p_mw = total_power(sol.s1, sol.s2, sol.b, pp, cfg, switch_planes=switch_planes)
    return mi / (p_mw / 1000.0)


def power_constraint_target(cfg_or_sol) -> float:
    """Frobenius-norm-squared target for F_RF F_BB: n_s * n_ps / n_t."""
    return cfg_or_sol.n_s * cfg_or_sol.n_ps / cfg_or_sol.n_t


def make_solution(f_bb, s1, f_ps, s2, b) -> PrecoderSolution:
    return PrecoderSolution(
        f_bb=np.asarray(f_bb, dtype=np.complex128),
        s1=np.asarray(s1, dtype=np.int8),
        f_ps=np.asarray(f_ps, dtype=np.complex128),
        s2=np.asarray(s2, dtype=np.int8),
        b=np.asarray(b, dtype=np.int64),
    )


__all__ = [
    "LinkBudget",
    "PrecoderSolution",
    "compose_analog",
    "effective_channel",
    "energy_efficiency",
    "fixed_rear_switch",
    "make_solution",
    "mutual_information",
    "optimal_combiner",
    "optimal_precoder",
    "power_constraint_target",
    "spectral_efficiency",
]
