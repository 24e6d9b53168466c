"""Result emission (CSV, vector plots) and experiment-config parsing.

The results CSV has a fixed header regardless of sweep axis:

    solver,axis,axis_value,trial,se_bits_s_hz,power_mw,ee_bits_hz_j,status

preceded by comment lines (`#`), one of which carries a timestamp; byte
reproducibility is defined modulo comment lines.  Floats are written with
repr, which round-trips doubles exactly.
"""

import dataclasses
import math
from datetime import datetime, timezone

from ..config import SystemConfig
from ..errors import ConfigError, ParameterError
from ..hardware import PowerParams
from .sweep import CSV_COLUMNS, SweepResult, TrialRow


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def emit_csv(result: SweepResult, path, timestamp: bool = True) -> None:
    """Write trial rows (sorted by axis value, trial, solver)."""
    if not result.rows:
        raise ParameterError("refusing to emit an empty sweep result")
    with open(path, "w") as fh:
        fh.write(f"# hbfsim sweep axis={result.axis}\n")
        if timestamp:
            fh.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in result.sorted_rows():
            fh.write(",".join([
                r.solver, r.axis, _fmt(float(r.axis_value)), str(r.trial),
                _fmt(r.se), _fmt(r.power_mw), _fmt(r.ee), r.status,
            ]) + "\n")


def emit_aggregate_csv(result: SweepResult, path) -> None:
    """Write the per-(solver, axis value) aggregate table."""
    with open(path, "w") as fh:
        fh.write("solver,axis,axis_value,n_ok,se_mean,se_stderr,power_mean,"
                 "ee_mean,ee_stderr\n")
        for a in result.aggregates():
            fh.write(",".join([
                a.solver, a.axis, _fmt(float(a.axis_value)), str(a.n_ok),
                _fmt(a.se_mean), _fmt(a.se_stderr), _fmt(a.power_mean),
                _fmt(a.ee_mean), _fmt(a.ee_stderr),
            ]) + "\n")


def read_sweep_csv(path) -> SweepResult:
    """Parse a results CSV back into a SweepResult (aggregates recompute)."""
    rows = []
    axis = None
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    body = [ln for ln in lines if not ln.startswith("#")]
    if not body or body[0].split(",") != list(CSV_COLUMNS):
        raise ConfigError(f"{path}: missing or wrong results header")
    for ln in body[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ConfigError(f"{path}: bad row {ln!r}")
        solver, ax, axis_value, trial, se, power, ee, status = parts
        axis = ax
        rows.append(TrialRow(
            solver=solver, axis=ax, axis_value=float(axis_value),
            trial=int(trial), se=float(se), power_mw=float(power),
            ee=float(ee), status=status,
        ))
    return SweepResult(axis=axis or "unknown", rows=rows)


def build_plot_figure(result: SweepResult):
    """Mean SE and EE curves, one series per solver.  Returns the figure."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    aggs = result.aggregates()
    solvers = result.solvers()
    fig, (ax_se, ax_ee) = plt.subplots(1, 2, figsize=(11, 4.2))
    for solver in solvers:
        pts = sorted((a for a in aggs if a.solver == solver),
                     key=lambda a: a.axis_value)
        xs = [a.axis_value for a in pts]
        ax_se.plot(xs, [a.se_mean for a in pts], marker="o", label=solver)
        ax_ee.plot(xs, [a.ee_mean for a in pts], marker="s", label=solver)
    ax_se.set_xlabel(result.axis)
    ax_se.set_ylabel("spectral efficiency (bits/s/Hz)")
    ax_ee.set_xlabel(result.axis)
    ax_ee.set_ylabel("energy efficiency (bits/Hz/J)")
    for ax in (ax_se, ax_ee):
        ax.grid(True, alpha=0.4)
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def emit_plot(result: SweepResult, path) -> None:
    """Self-contained vector rendering (SVG/PDF by file suffix)."""
    if not result.rows:
        raise ParameterError("refusing to plot an empty sweep result")
    fig = build_plot_figure(result)
    fig.savefig(path)
    import matplotlib.pyplot as plt
    plt.close(fig)


# --- experiment config files -------------------------------------------------
# flat "key = value" lines, "#" comments; keys mirror SystemConfig and
# PowerParams field names; unknown keys are errors.

_LIST_FIELDS = {"snr_grid": float, "nrf_grid": int, "xi_grid": float}


def _parse_value(key, raw, target_type):
    raw = raw.strip()
    try:
        if key in _LIST_FIELDS:
            return tuple(_LIST_FIELDS[key](tok) for tok in raw.split(",") if tok.strip())
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None


def parse_config_text(text: str):
    """Parse config text into (SystemConfig, PowerParams)."""
    sys_fields = {f.name: f.type for f in dataclasses.fields(SystemConfig)}
    pow_fields = {f.name: f.type for f in dataclasses.fields(PowerParams)}
    sys_kw, pow_kw = {}, {}
    for lineno, ln in enumerate(text.splitlines(), start=1):
        stripped = ln.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {ln!r}")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key in sys_kw or key in pow_kw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key in sys_fields:
            hint = SystemConfig.__dataclass_fields__[key].default
            sys_kw[key] = _parse_value(key, raw, type(hint))
        elif key in pow_fields:
            hint = PowerParams.__dataclass_fields__[key].default
            pow_kw[key] = _parse_value(key, raw, type(hint))
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    cfg = SystemConfig(**sys_kw).validate()
    pp = PowerParams(**pow_kw).validate()
    return cfg, pp


def load_config(path):
    """Read an experiment config file; see parse_config_text."""
    with open(path) as fh:
        return parse_config_text(fh.read())


def dump_config(cfg: SystemConfig, pp: PowerParams) -> str:
    """Render a config back to the flat key = value format."""
    lines = ["# system"]
    for f in dataclasses.fields(SystemConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    lines.append("")
    lines.append("# power model")
    for f in dataclasses.fields(PowerParams):
        lines.append(f"{f.name} = {getattr(pp, f.name)}")
    return "\n".join(lines) + "\n"
