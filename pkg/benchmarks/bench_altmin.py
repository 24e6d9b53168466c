#!/usr/bin/env python3
"""Benchmark the compiled inner-loop kernel against the numpy fallback.

Runs the alternating-minimization loop and the full block-descent solver at
several sizes and prints per-solve timings plus the speedup.  Requires the
compiled extension; build with `pip install -e . --no-build-isolation`.
"""

import argparse
import time

import numpy as np


def _semi_unitary(rng, m, n):
    a = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    q, _ = np.linalg.qr(a)
    return q[:, :n]


def time_fn(fn, min_seconds=1.0):
    fn()  # warm up
    t0 = time.perf_counter()
    n = 0
    while time.perf_counter() - t0 < min_seconds:
        fn()
        n += 1
    return (time.perf_counter() - t0) / n


def bench_altmin(sizes, min_seconds):
    from hbfsim.precoding import _altmin_py

    try:
        from hbfsim.precoding import _altmin_cy
    except ImportError:
        print("compiled kernel not available; build the extension first")
        return

    rng = np.random.default_rng(0)
    print(f"{'case':28s} {'python':>12s} {'compiled':>12s} {'speedup':>9s}")
    for (n_t, n_s, n_ps, n_trf, q) in sizes:
        f_opt = _semi_unitary(rng, n_t, n_s)
        ps_ant = np.arange(n_ps, dtype=np.int64)
        s1_init = rng.integers(0, n_trf, n_ps)
        k_init = rng.integers(0, 1 << q, n_ps)
        args = (f_opt, ps_ant, n_trf, q, 20, 1e-4, s1_init, k_init)

        t_py = time_fn(lambda: _altmin_py.altmin_loop(*args), min_seconds)
        t_cy = time_fn(lambda: _altmin_cy.altmin_loop(*args), min_seconds)
        label = f"nt={n_t} ns={n_s} nps={n_ps} nrf={n_trf}"
        print(f"{label:28s} {t_py * 1e3:10.3f}ms {t_cy * 1e3:10.3f}ms "
              f"{t_py / t_cy:8.1f}x")


def bench_bcd(min_seconds):
    import os

    import hbfsim
    from hbfsim.precoding import bcd_precoder, backend_name

    cfg = hbfsim.SystemConfig().validate()
    pp = hbfsim.PowerParams()
    link = hbfsim.LinkBudget.from_snr_db(10.0)
    ch = hbfsim.generate_channel(cfg, seed=0)

    print(f"\nfull block-descent solve at n_t={cfg.n_t}, n_ps={cfg.n_ps} "
          f"(active backend: {backend_name()})")
    t = time_fn(lambda: bcd_precoder(ch.h, cfg, link, pp), min_seconds)
    print(f"  {t * 1e3:.2f} ms per solve")
    if backend_name() == "c":
        print("  (set HBFSIM_BACKEND=python and rerun to time the fallback)")
    elif "HBFSIM_BACKEND" in os.environ:
        print("  (unset HBFSIM_BACKEND to time the compiled kernel)")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seconds", type=float, default=1.0,
                    help="minimum measurement window per case")
    args = ap.parse_args()
    sizes = [
        (16, 1, 8, 2, 4),
        (16, 2, 8, 4, 4),
        (64, 2, 50, 4, 4),    # reference experiment scale
        (64, 2, 64, 4, 4),    # dynamic-subarray scale
        (256, 4, 128, 8, 4),
    ]
    bench_altmin(sizes, args.seconds)
    bench_bcd(args.seconds)


if __name__ == "__main__":
    main()
