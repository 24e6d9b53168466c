"""Block-coordinate-descent hybrid precoder.

Two blocks are cycled: (i) the digital precoder, front switches, and phase
shifters, fitted to the unconstrained SVD precoder by alternating
minimization with the DAC gain approximated as identity; (ii) the per-chain
DAC resolutions, maximizing energy efficiency by a per-chain sweep.  Because
block (i) does not depend on the DAC setting and restarts from the same
seeded initialization, the outer loop reaches its fixed point after the
energy efficiency stops changing, typically in two outer iterations.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import SystemConfig
from ..errors import DegenerateAnalogError, DimensionError, ParameterError
from ..hardware import (
    PowerParams,
    delta_gains,
    fixed_rear_switch,
    occupied_chains,
    total_power,
)
from ..metrics import (
    LinkBudget,
    PrecoderSolution,
    compose_analog,
    make_solution,
    mutual_information,
    optimal_precoder,
    power_constraint_target,
)
from .altmin import altmin_inner, grid_phases, onehot_rows


@dataclass(frozen=True)
class SolverConfig:
    """Iteration caps, stopping tolerance, phase resolution, and seed."""

    n_iter1: int = 10
    n_iter2: int = 20
    tol: float = 1e-4
    q: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.n_iter1 < 1 or self.n_iter2 < 1:
            raise ParameterError("iteration caps must be >= 1")
        if self.tol <= 0:
            raise ParameterError("tol must be positive")

    @classmethod
    def from_system(cls, cfg: SystemConfig, seed: int = None) -> "SolverConfig":
        return cls(
            n_iter1=cfg.n_iter1,
            n_iter2=cfg.n_iter2,
            tol=cfg.tol,
            q=cfg.q,
            seed=cfg.seed if seed is None else seed,
        )


@dataclass(frozen=True)
class OuterRecord:
    """One outer iteration: final fit residual, rate, the efficiency before
    and after the DAC sweep, and the chosen resolutions."""

    residual: float
    mi: float
    ee_before_dac: float
    ee_after_dac: float
    b: tuple


@dataclass
class SolveTrace:
    """Per-iteration observability for convergence tests.

    inner[k] holds the residual after every digital update (`resid_fbb`)
    and after every switch/phase update (`resid_switch`) of outer
    iteration k; outer[k] the corresponding OuterRecord.
    """

    inner: list = field(default_factory=list)
    outer: list = field(default_factory=list)
    converged: bool = False

    @property
    def length(self) -> int:
        return sum(len(rec["resid_fbb"]) for rec in self.inner)


def normalize_fbb(sol: PrecoderSolution, cfg: SystemConfig = None) -> PrecoderSolution:
    """Rescale the digital precoder so ||F_RF F_BB||_F^2 equals the
    architecture target n_s * n_ps / n_t exactly."""
    f_rf = compose_analog(sol)
    norm = float(np.linalg.norm(f_rf @ sol.f_bb))
    if norm == 0.0:
        raise DegenerateAnalogError("F_RF F_BB is identically zero; cannot normalize")
    target = math.sqrt(power_constraint_target(sol))
    return sol.with_f_bb(sol.f_bb * (target / norm))


def search_dac_resolution(h: np.ndarray, sol: PrecoderSolution, link: LinkBudget,
                          pp: PowerParams, cfg: SystemConfig,
                          power_fn=None) -> np.ndarray:
    """Energy-efficiency-maximizing DAC resolutions for a fixed precoder.

    Each occupied chain is swept independently over [b_min, b_max] starting
    from sol.b ((b_max - b_min + 1) * n_trf rate evaluations in total);
    chains with no connected shifter are parked at b_min.  Ties prefer the
    lower resolution.
    """
    if power_fn is None:
        def power_fn(s1, s2, b):
            return total_power(s1, s2, b, pp, cfg)

    active = occupied_chains(sol.s1)
    b = np.clip(np.asarray(sol.b, dtype=np.int64), pp.b_min, pp.b_max)
    b[~active] = pp.b_min

    hf = h @ compose_analog(sol)
    c = link.rho / (cfg.n_s * link.sigma_n2)

    def ee_of(b_vec):
        t = (hf * delta_gains(b_vec)) @ sol.f_bb
        s = np.linalg.svd(t, compute_uv=False)
        mi = float(np.sum(np.log2(1.0 + c * s * s)))
        return mi / (power_fn(sol.s1, sol.s2, b_vec) / 1000.0)

    for chain in np.nonzero(active)[0]:
        best_v, best_ee = None, -np.inf
        for v in range(pp.b_min, pp.b_max + 1):
            b[chain] = v
            ee = ee_of(b)
            if ee > best_ee:
                best_ee, best_v = ee, v
        b[chain] = best_v
    return b


def bcd_precoder(h: np.ndarray, cfg: SystemConfig, link: LinkBudget,
                 pp: PowerParams, scfg: SolverConfig = None,
                 s2: np.ndarray = None, power_fn=None):
    """Run the full block-coordinate descent.  Returns (solution, trace).

    The precoder is designed against `h` (which may be an estimate or a
    partial-CSI matrix); the returned solution satisfies the one-hot switch
    rows, grid phases, DAC bounds, and the power constraint.
    """
    if cfg.n_s > cfg.n_trf:
        raise DimensionError(f"n_s={cfg.n_s} exceeds n_trf={cfg.n_trf}")
    h = np.asarray(h, dtype=np.complex128)
    if not np.all(np.isfinite(h)):
        raise ParameterError("channel matrix contains non-finite entries")
    if scfg is None:
        scfg = SolverConfig.from_system(cfg)
    if s2 is None:
        s2 = fixed_rear_switch(cfg.n_t, cfg.n_ps)
    if power_fn is None:
        def power_fn(s1, s2_, b):
            return total_power(s1, s2_, b, pp, cfg)

    rng = np.random.default_rng(scfg.seed)
    b = rng.integers(pp.b_min, pp.b_max + 1, cfg.n_trf)
    s1_init = rng.integers(0, cfg.n_trf, s2.shape[1])
    k_init = rng.integers(0, 1 << scfg.q, s2.shape[1])

    f_opt = optimal_precoder(h, cfg.n_s)
    delta_id = np.eye(cfg.n_trf)

    trace = SolveTrace()
    sol = None
    ee_prev = None
    for _ in range(scfg.n_iter1):
        f_bb, s1, f_ps, residual, inner = altmin_inner(
            f_opt, s2, delta_id, scfg, s1_init=s1_init, k_init=k_init,
            want_trace=True,
        )
        sol = make_solution(f_bb, s1, f_ps, s2, b)
        sol = normalize_fbb(sol, cfg)

        def ee_of(sol_):
            mi_ = mutual_information(h, sol_, link, cfg)
            return mi_, mi_ / (power_fn(sol_.s1, sol_.s2, sol_.b) / 1000.0)

        _, ee_before = ee_of(sol)
        b = search_dac_resolution(h, sol, link, pp, cfg, power_fn=power_fn)
        sol = sol.with_b(b)
        mi, ee_after = ee_of(sol)

        trace.inner.append(inner)
        trace.outer.append(OuterRecord(
            residual=residual, mi=mi, ee_before_dac=ee_before,
            ee_after_dac=ee_after, b=tuple(int(v) for v in b),
        ))
        if ee_prev is not None and abs(ee_after - ee_prev) <= scfg.tol * max(abs(ee_prev), 1e-30):
            trace.converged = True
            break
        ee_prev = ee_after
    return sol, trace


__all__ = [
    "OuterRecord",
    "SolveTrace",
    "SolverConfig",
    "bcd_precoder",
    "grid_phases",
    "normalize_fbb",
    "onehot_rows",
    "search_dac_resolution",
]
