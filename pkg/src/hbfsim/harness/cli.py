"""Command-line interface.

    hbfsim sweep --axis {snr|nrf|xi|partial} --config cfg.txt
                 --solvers proposed-bcd,full-digital --out results/
                 [--plot] [--seed N] [--trials N] [--workers N]
    hbfsim channel gen --config cfg.txt --seed N --out h.csv [--paths L]
    hbfsim channel import --in h.csv
    hbfsim config show [--config cfg.txt]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from ..channel import export_channel, generate_channel, import_channel
from ..config import SystemConfig
from ..errors import SimulationError
from ..hardware import PowerParams
from ..precoding import SOLVER_NAMES, backend_name
from .io import dump_config, emit_aggregate_csv, emit_csv, emit_plot, load_config
from .sweep import AXES, SWEEPS


def _build_parser():
    p = argparse.ArgumentParser(
        prog="hbfsim",
        description="Dual-switch hybrid beamforming simulator",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run a Monte-Carlo parameter sweep")
    sw.add_argument("--axis", required=True, choices=AXES)
    sw.add_argument("--config", required=True, help="experiment config file")
    sw.add_argument("--solvers", default=",".join(SOLVER_NAMES),
                    help="comma-separated solver names")
    sw.add_argument("--out", required=True, help="output directory")
    sw.add_argument("--plot", action="store_true", help="also write an SVG plot")
    sw.add_argument("--seed", type=int, default=None, help="override base seed")
    sw.add_argument("--trials", type=int, default=None, help="override trial count")
    sw.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    sw.add_argument("--no-timestamp", action="store_true",
                    help="omit the timestamp comment from the CSV")

    ch = sub.add_parser("channel", help="generate or inspect channel files")
    chsub = ch.add_subparsers(dest="channel_command", required=True)
    gen = chsub.add_parser("gen", help="generate a channel and export it")
    gen.add_argument("--config", required=True)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--paths", type=int, default=None, help="override path count")
    gen.add_argument("--out", required=True, help="output CSV path")
    imp = chsub.add_parser("import", help="validate and summarize a channel file")
    imp.add_argument("--in", dest="infile", required=True)

    cf = sub.add_parser("config", help="configuration helpers")
    cfsub = cf.add_subparsers(dest="config_command", required=True)
    show = cfsub.add_parser("show", help="print the effective configuration")
    show.add_argument("--config", default=None)
    return p


def _cmd_sweep(args) -> int:
    cfg, pp = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if overrides:
        cfg = cfg.with_overrides(**overrides)
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = SWEEPS[args.axis](cfg, solvers, pp, workers=args.workers)

    csv_path = out / f"{args.axis}_sweep.csv"
    agg_path = out / f"{args.axis}_aggregate.csv"
    emit_csv(result, csv_path, timestamp=not args.no_timestamp)
    emit_aggregate_csv(result, agg_path)
    print(f"wrote {csv_path} ({len(result.rows)} rows) and {agg_path}")
    if args.plot:
        svg_path = out / f"{args.axis}_sweep.svg"
        emit_plot(result, svg_path)
        print(f"wrote {svg_path}")

    n_failed = sum(1 for r in result.rows if r.status != "ok")
    if n_failed:
        print(f"warning: {n_failed} failed solver runs recorded", file=sys.stderr)
    for a in result.aggregates():
        print(f"  {a.solver:24s} {result.axis}={a.axis_value:<8g} n={a.n_ok:<4d} "
              f"SE={a.se_mean:8.3f}  P={a.power_mean:10.2f} mW  EE={a.ee_mean:8.4f}")
    return 0


def _cmd_channel(args) -> int:
    if args.channel_command == "gen":
        cfg, _ = load_config(args.config)
        seed = cfg.seed if args.seed is None else args.seed
        ch = generate_channel(cfg, n_paths=args.paths, seed=seed)
        export_channel(ch.h, args.out)
        print(f"wrote {args.out}: nr={ch.n_r} nt={ch.n_t} paths={ch.paths.L} "
              f"frobenius={np.linalg.norm(ch.h):.6f}")
        return 0
    ch = import_channel(args.infile)
    print(f"{args.infile}: nr={ch.n_r} nt={ch.n_t} "
          f"frobenius={np.linalg.norm(ch.h):.6f} paths=none")
    return 0


def _cmd_config(args) -> int:
    if args.config:
        cfg, pp = load_config(args.config)
    else:
        cfg, pp = SystemConfig(), PowerParams()
    sys.stdout.write(dump_config(cfg, pp))
    print(f"# kernel backend: {backend_name()}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "channel":
            return _cmd_channel(args)
        return _cmd_config(args)
    except (SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
