"""Configuration-driven Monte-Carlo sweeps.

Each sweep fixes one axis (SNR, RF chain count, estimation accuracy, or
partial CSI over SNR), draws `trials` channel realizations per axis value
(trial t uses seed = base seed + t, the same channel for every solver), and
records one row per (axis value, trial, solver).  A failed solver run is
recorded with status "failed" and NaN metrics; the sweep continues.
"""

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..channel import corrupt_csi, generate_channel, import_channel, partial_csi_channel
from ..config import SystemConfig
from ..errors import ParameterError, UnsupportedModeError
from ..hardware import PowerParams
from ..metrics import LinkBudget
from ..precoding import SOLVER_NAMES, SolverConfig, run_solver

# offset separating the corruption noise stream from the channel stream
_CORRUPT_SEED_OFFSET = 1_000_003

AXES = ("snr", "nrf", "xi", "partial")

CSV_COLUMNS = (
    "solver", "axis", "axis_value", "trial",
    "se_bits_s_hz", "power_mw", "ee_bits_hz_j", "status",
)


@dataclass(frozen=True)
class TrialRow:
    solver: str
    axis: str
    axis_value: float
    trial: int
    se: float
    power_mw: float
    ee: float
    status: str = "ok"
    channel_digest: str = ""     # not emitted to CSV; cross-solver fairness check


@dataclass(frozen=True)
class AggregateRow:
    solver: str
    axis: str
    axis_value: float
    n_ok: int
    se_mean: float
    se_stderr: float
    power_mean: float
    ee_mean: float
    ee_stderr: float


@dataclass
class SweepResult:
    axis: str
    rows: list = field(default_factory=list)

    def sorted_rows(self):
        return sorted(self.rows, key=lambda r: (r.axis_value, r.trial, r.solver))

    def solvers(self):
        return sorted({r.solver for r in self.rows})

    def axis_values(self):
        return sorted({r.axis_value for r in self.rows})

    def rows_for(self, solver=None, axis_value=None, status="ok"):
        out = self.rows
        if solver is not None:
            out = [r for r in out if r.solver == solver]
        if axis_value is not None:
            out = [r for r in out if r.axis_value == axis_value]
        if status is not None:
            out = [r for r in out if r.status == status]
        return sorted(out, key=lambda r: (r.axis_value, r.trial, r.solver))

    def aggregates(self):
        """Per (solver, axis value) mean and standard error over ok trials;
        failed trials are excluded but counted through n_ok."""
        out = []
        for solver in self.solvers():
            for v in self.axis_values():
                ok = self.rows_for(solver=solver, axis_value=v)
                if not ok:
                    out.append(AggregateRow(solver, self.axis, v, 0,
                                            math.nan, math.nan, math.nan,
                                            math.nan, math.nan))
                    continue
                se = np.array([r.se for r in ok])
                ee = np.array([r.ee for r in ok])
                pw = np.array([r.power_mw for r in ok])
                n = len(ok)
                sem = lambda x: float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
                out.append(AggregateRow(
                    solver, self.axis, v, n,
                    float(se.mean()), sem(se),
                    float(pw.mean()),
                    float(ee.mean()), sem(ee),
                ))
        return out


def _channel_digest(h: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(h).tobytes()).hexdigest()[:16]


def _channel_for_trial(cfg: SystemConfig, trial: int):
    """Channel realization for a trial: generated from seed + trial, or the
    configured import file (identical across trials)."""
    if cfg.channel_file:
        ch = import_channel(cfg.channel_file)
        if ch.h.shape != (cfg.n_r, cfg.n_t):
            raise ParameterError(
                f"imported channel is {ch.h.shape}, config wants ({cfg.n_r}, {cfg.n_t})"
            )
        return ch
    return generate_channel(cfg, seed=cfg.seed + trial)


def _design_channel(cfg: SystemConfig, ch, trial: int, xi: float = None):
    """The matrix the solvers design against, per the CSI mode."""
    mode = cfg.csi_mode
    if xi is not None:
        mode = "corrupted"
    if mode == "full":
        return ch.h
    if mode == "corrupted":
        x = cfg.xi if xi is None else xi
        return corrupt_csi(ch.h, x, seed=cfg.seed + trial + _CORRUPT_SEED_OFFSET)
    if mode == "partial":
        if ch.paths.L == 0:
            raise UnsupportedModeError(
                "partial CSI needs generated channels with path parameters"
            )
        return partial_csi_channel(ch.paths, ch.gamma, cfg.n_t)
    raise ParameterError(f"unknown csi mode {mode!r}")


def _check_solvers(solvers):
    for name in solvers:
        base = name.split("@", 1)[0]
        if base not in SOLVER_NAMES:
            raise ParameterError(f"unknown solver {name!r}; choose from {SOLVER_NAMES}")


def _run_trials(axis, tasks, workers):
    """Execute per-trial closures, each returning a list of rows.  Order of
    execution does not matter: rows are sorted before use."""
    result = SweepResult(axis=axis)
    if workers <= 1:
        for task in tasks:
            result.rows.extend(task())
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for rows in pool.map(lambda t: t(), tasks):
                result.rows.extend(rows)
    result.rows = result.sorted_rows()
    return result


def _solve_rows(names, h_design, h_eval, paths, cfg, link, pp, scfg, axis,
                axis_value, trial, digest, label_suffix=""):
    rows = []
    for name in names:
        try:
            res = run_solver(name, h_design, cfg, link, pp, scfg,
                             paths=paths, h_eval=h_eval)
            rows.append(TrialRow(name + label_suffix, axis, axis_value, trial,
                                 res.se, res.power_mw, res.ee, "ok", digest))
        except Exception:
            rows.append(TrialRow(name + label_suffix, axis, axis_value, trial,
                                 math.nan, math.nan, math.nan, "failed", digest))
    return rows


def run_snr_sweep(cfg: SystemConfig, solvers, pp: PowerParams,
                  workers: int = 1) -> SweepResult:
    """SE/power/EE versus SNR.  The design channel follows cfg.csi_mode."""
    _check_solvers(solvers)

    def make_task(snr, trial):
        def task():
            link = LinkBudget.from_snr_db(snr)
            ch = _channel_for_trial(cfg, trial)
            h_design = _design_channel(cfg, ch, trial)
            scfg = SolverConfig.from_system(cfg, seed=cfg.seed + trial)
            return _solve_rows(solvers, h_design, ch.h, ch.paths, cfg, link,
                               pp, scfg, "snr", float(snr), trial,
                               _channel_digest(ch.h))
        return task

    tasks = [make_task(snr, t) for snr in cfg.snr_grid for t in range(cfg.trials)]
    return _run_trials("snr", tasks, workers)


def run_nrf_sweep(cfg: SystemConfig, solvers, pp: PowerParams,
                  workers: int = 1) -> SweepResult:
    """SE/power/EE versus RF chain count at the fixed SNR cfg.snr_db."""
    _check_solvers(solvers)

    def make_task(nrf, trial):
        def task():
            cfg_v = cfg.with_overrides(n_trf=int(nrf))
            link = LinkBudget.from_snr_db(cfg_v.snr_db)
            ch = _channel_for_trial(cfg_v, trial)
            h_design = _design_channel(cfg_v, ch, trial)
            scfg = SolverConfig.from_system(cfg_v, seed=cfg_v.seed + trial)
            return _solve_rows(solvers, h_design, ch.h, ch.paths, cfg_v, link,
                               pp, scfg, "nrf", float(nrf), trial,
                               _channel_digest(ch.h))
        return task

    tasks = [make_task(nrf, t) for nrf in cfg.nrf_grid for t in range(cfg.trials)]
    return _run_trials("nrf", tasks, workers)


def run_xi_sweep(cfg: SystemConfig, solvers, pp: PowerParams,
                 workers: int = 1) -> SweepResult:
    """SE/power/EE versus estimation accuracy xi at the fixed SNR
    cfg.snr_db.  Precoders are designed on the corrupted estimate and every
    metric is evaluated on the true channel."""
    _check_solvers(solvers)

    def make_task(xi, trial):
        def task():
            link = LinkBudget.from_snr_db(cfg.snr_db)
            ch = _channel_for_trial(cfg, trial)
            h_design = _design_channel(cfg, ch, trial, xi=float(xi))
            scfg = SolverConfig.from_system(cfg, seed=cfg.seed + trial)
            return _solve_rows(solvers, h_design, ch.h, ch.paths, cfg, link,
                               pp, scfg, "xi", float(xi), trial,
                               _channel_digest(ch.h))
        return task

    tasks = [make_task(xi, t) for xi in cfg.xi_grid for t in range(cfg.trials)]
    return _run_trials("xi", tasks, workers)


def run_partial_csi_sweep(cfg: SystemConfig, solvers, pp: PowerParams,
                          workers: int = 1) -> SweepResult:
    """Partial-CSI study over the SNR grid: each solver runs twice per
    trial, once designed from the path-parameter matrix (rows labeled
    `<solver>@partial`) and once from the full channel (`<solver>@full`),
    with identical seeds; metrics are always evaluated on the true channel.
    Requires generated channels (imported ones carry no paths)."""
    _check_solvers(solvers)
    if cfg.channel_file:
        raise UnsupportedModeError("partial-CSI sweep requires generated channels")

    def make_task(snr, trial):
        def task():
            link = LinkBudget.from_snr_db(snr)
            ch = _channel_for_trial(cfg, trial)
            h_partial = partial_csi_channel(ch.paths, ch.gamma, cfg.n_t)
            scfg = SolverConfig.from_system(cfg, seed=cfg.seed + trial)
            digest = _channel_digest(ch.h)
            rows = _solve_rows(solvers, h_partial, ch.h, ch.paths, cfg, link,
                               pp, scfg, "partial", float(snr), trial, digest,
                               label_suffix="@partial")
            rows += _solve_rows(solvers, ch.h, ch.h, ch.paths, cfg, link,
                                pp, scfg, "partial", float(snr), trial, digest,
                                label_suffix="@full")
            return rows
        return task

    tasks = [make_task(snr, t) for snr in cfg.snr_grid for t in range(cfg.trials)]
    return _run_trials("partial", tasks, workers)


SWEEPS = {
    "snr": run_snr_sweep,
    "nrf": run_nrf_sweep,
    "xi": run_xi_sweep,
    "partial": run_partial_csi_sweep,
}
