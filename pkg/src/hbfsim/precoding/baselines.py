"""Reference precoders and the solver registry.

Baselines: unconstrained full-digital SVD precoding, orthogonal matching
pursuit over a steering-vector dictionary for the fully connected analog
architecture, and the dynamic-subarray scheme, which reuses the block
descent engine with an identity rear switch (one shifter per antenna, a
single switch plane).

Each solver reports mutual information, consumed power, and energy
efficiency; the spectral-efficiency column equals mutual information
because the receiver applies the optimal full-resolution combiner (the
dominant left singular basis of the effective channel captures every
nonzero singular value when the effective channel has at most n_s columns).
"""

import math
from dataclasses import dataclass, field
from math import isqrt

import numpy as np

from ..channel import PathSet, steering_matrix, upa_response
from ..config import SystemConfig
from ..errors import ParameterError
from ..hardware import PowerParams, delta_gains, total_power
from ..metrics import (
    LinkBudget,
    PrecoderSolution,
    compose_analog,
    optimal_precoder,
)
from .bcd import SolveTrace, SolverConfig, bcd_precoder

SOLVER_NAMES = ("proposed-bcd", "full-digital", "fc-omp", "dsa-altmin")


@dataclass
class SolverResult:
    """Uniform record returned by every solver."""

    solver: str
    mi: float
    se: float
    power_mw: float
    ee: float
    f_eff: np.ndarray                      # n_t x n_s effective transmit matrix
    sol: PrecoderSolution = None           # switched-architecture solutions only
    trace: SolveTrace = None
    extras: dict = field(default_factory=dict)


def _capacity(h_eval, f_eff, link, cfg) -> float:
    s = np.linalg.svd(h_eval @ f_eff, compute_uv=False)
    c = link.rho / (cfg.n_s * link.sigma_n2)
    return float(np.sum(np.log2(1.0 + c * s * s)))


def full_digital_power(pp: PowerParams, cfg: SystemConfig) -> float:
    """One maximum-resolution RF chain per antenna, no shifters or switches."""
    return (
        pp.p_bb
        + pp.p_rfc * cfg.n_t
        + pp.p_d * (2.0 ** pp.b_max) * cfg.n_t
        + pp.p_t / pp.rho_pa * cfg.n_t
        + cfg.n_s
    )


def fc_omp_power(pp: PowerParams, cfg: SystemConfig) -> float:
    """Fully connected network: n_t shifters per chain, every chain and
    antenna active, maximum-resolution DACs, no switches."""
    return (
        pp.p_bb
        + pp.p_ps * cfg.n_t * cfg.n_trf
        + pp.p_rfc * cfg.n_trf
        + pp.p_d * (2.0 ** pp.b_max) * cfg.n_trf
        + pp.p_t / pp.rho_pa * cfg.n_t
        + cfg.n_s
    )


def dsa_power(s1, s2, b, pp: PowerParams, cfg: SystemConfig) -> float:
    """Dynamic subarray: one shifter and one switch per antenna (a single
    switch plane), chain/DAC terms as in the dual-switch budget."""
    return total_power(s1, s2, b, pp, cfg, switch_planes=1)


def omp_dictionary(paths: PathSet, cfg: SystemConfig) -> np.ndarray:
    """Transmit steering dictionary: the true departure-angle vectors when
    paths are known, padded with (or replaced by, when no paths are
    available) a uniform 2*n_t angular grid."""
    cols = []
    if paths is not None and paths.L:
        cols.append(steering_matrix(paths.aod_az, paths.aod_el, cfg.n_t))
    if not cols or cols[0].shape[1] < cfg.n_trf:
        root = isqrt(cfg.n_t)
        n_az, n_el = 2 * root, root
        az = 2.0 * math.pi * np.arange(n_az) / n_az
        el = math.pi * (np.arange(n_el) + 0.5) / n_el
        grid = np.stack(
            [upa_response(a, e, cfg.n_t) for e in el for a in az], axis=1
        )
        cols.append(grid)
    return np.concatenate(cols, axis=1)


def full_digital_precoder(h: np.ndarray, n_s: int, cfg: SystemConfig):
    """Unconstrained SVD precoder with ||F||_F^2 = n_s (the dominant right
    singular vectors are orthonormal, so no rescaling is needed)."""
    return optimal_precoder(h, n_s)


def omp_fc_precoder(h: np.ndarray, paths: PathSet, cfg: SystemConfig):
    """Spatially sparse precoding: greedily pick the dictionary column most
    correlated with the residual, refit the digital precoder by least
    squares, and normalize to ||F_RF F_BB||_F^2 = n_s.

    Returns (f_rf, f_bb, residual_trace)."""
    f_opt = optimal_precoder(h, cfg.n_s)
    dictionary = omp_dictionary(paths, cfg)
    res = f_opt.copy()
    chosen = []
    resid_trace = []
    f_rf = f_bb = None
    for _ in range(cfg.n_trf):
        corr = dictionary.conj().T @ res
        chosen.append(int(np.argmax(np.sum(np.abs(corr) ** 2, axis=1))))
        f_rf = dictionary[:, chosen]
        f_bb = np.linalg.lstsq(f_rf, f_opt, rcond=None)[0]
        res = f_opt - f_rf @ f_bb
        resid_trace.append(float(np.linalg.norm(res)))
        nrm = np.linalg.norm(res)
        if nrm > 1e-12:
            res = res / nrm
    f_bb = f_bb * (math.sqrt(cfg.n_s) / np.linalg.norm(f_rf @ f_bb))
    return f_rf, f_bb, resid_trace


def dsa_altmin_precoder(h: np.ndarray, cfg: SystemConfig, link: LinkBudget,
                        pp: PowerParams, scfg: SolverConfig = None):
    """Dynamic-subarray precoder: the block descent engine run with an
    identity rear switch (n_ps = n_t) and the single-plane power model.

    Returns (solution, trace, dsa_cfg)."""
    dsa_cfg = cfg.with_overrides(n_ps=cfg.n_t)
    if scfg is None:
        scfg = SolverConfig.from_system(dsa_cfg)
    s2 = np.eye(cfg.n_t, dtype=np.int8)

    def power_fn(s1, s2_, b):
        return dsa_power(s1, s2_, b, pp, dsa_cfg)

    sol, trace = bcd_precoder(h, dsa_cfg, link, pp, scfg, s2=s2, power_fn=power_fn)
    return sol, trace, dsa_cfg


def run_solver(name: str, h_design: np.ndarray, cfg: SystemConfig,
               link: LinkBudget, pp: PowerParams, scfg: SolverConfig = None,
               paths: PathSet = None, h_eval: np.ndarray = None) -> SolverResult:
    """Design a precoder on `h_design` and score it on `h_eval` (defaults to
    the design channel).  `paths` feeds the OMP dictionary when available."""
    if name not in SOLVER_NAMES:
        raise ParameterError(f"unknown solver {name!r}; choose from {SOLVER_NAMES}")
    if h_eval is None:
        h_eval = h_design
    if scfg is None:
        scfg = SolverConfig.from_system(cfg)

    if name == "proposed-bcd":
        sol, trace = bcd_precoder(h_design, cfg, link, pp, scfg)
        f_eff = (compose_analog(sol) * delta_gains(sol.b)) @ sol.f_bb
        power = total_power(sol.s1, sol.s2, sol.b, pp, cfg)
        mi = _capacity(h_eval, f_eff, link, cfg)
        return SolverResult(name, mi, mi, power, mi / (power / 1000.0),
                            f_eff, sol=sol, trace=trace)

    if name == "full-digital":
        f = full_digital_precoder(h_design, cfg.n_s, cfg)
        power = full_digital_power(pp, cfg)
        mi = _capacity(h_eval, f, link, cfg)
        return SolverResult(name, mi, mi, power, mi / (power / 1000.0), f)

    if name == "fc-omp":
        f_rf, f_bb, resid = omp_fc_precoder(h_design, paths, cfg)
        d = delta_gains(np.full(cfg.n_trf, pp.b_max))
        f_eff = (f_rf * d) @ f_bb
        power = fc_omp_power(pp, cfg)
        mi = _capacity(h_eval, f_eff, link, cfg)
        return SolverResult(name, mi, mi, power, mi / (power / 1000.0), f_eff,
                            extras={"omp_residuals": resid})

    # dsa-altmin
    sol, trace, dsa_cfg = dsa_altmin_precoder(h_design, cfg, link, pp, scfg)
    f_eff = (compose_analog(sol) * delta_gains(sol.b)) @ sol.f_bb
    power = dsa_power(sol.s1, sol.s2, sol.b, pp, dsa_cfg)
    mi = _capacity(h_eval, f_eff, link, dsa_cfg)
    return SolverResult(name, mi, mi, power, mi / (power / 1000.0), f_eff,
                        sol=sol, trace=trace)
