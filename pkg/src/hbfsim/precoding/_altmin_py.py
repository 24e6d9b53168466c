"""Pure numpy implementation of the alternating-minimization inner loop.

This is the fallback backend; `_altmin_cy` implements the same contract as a
compiled extension.  Both alternate two exact block updates:

  * digital precoder: semi-unitary minimizer of the fitting residual,
    found by majorization descent seeded with the closed-form polar
    solution, the unconstrained least-squares solution, and the previous
    iterate (the last guarantees the residual never increases);
  * switch/phase assignment: independent per-shifter maximization of the
    decoupled correlation objective over all chain x grid-phase choices.

The loop assumes each phase shifter drives its own antenna (`ps_ant`
injective), which covers the fixed rear switch layout and the
dynamic-subarray variant.  Rear switches that merge several shifters onto
one antenna go through the generic path in `altmin.py` instead.
"""

import math

import numpy as np
from scipy.linalg import svd as _svd

TWO_PI = 2.0 * math.pi

_MM_MAX_ITER = 60
_MM_RTOL = 1e-13


def _polar(z: np.ndarray) -> np.ndarray:
    """Closest matrix with orthonormal columns (thin-SVD polar factor)."""
    u, _, vh = _svd(z, full_matrices=False, lapack_driver="gesvd")
    return u @ vh


def _residual_direct(f_opt, ps_ant, phases, s1, f_bb):
    """|| f_opt - F_RF f_bb ||_F evaluated without cancellation tricks."""
    approx = np.zeros_like(f_opt)
    np.add.at(approx, ps_ant, phases[:, None] * f_bb[s1])
    return float(np.linalg.norm(f_opt - approx))


def _parking_family(ls, counts):
    """Semi-unitary candidates built from the least-squares fit.

    The residual cannot see rows of chains without shifters, so the
    semi-unitary norm surplus can be parked there: clip the k weakest
    singular values of the fit at one, keep the rest hard-normalized, and
    complete each parked direction on a dark chain.  k = 0 is the plain
    polar factor; when the fit's deficit has rank at most the number of
    dark chains, the matching k gives the exact minimizer."""
    n_s = ls.shape[1]
    dark = np.nonzero(counts == 0)[0]
    u, s, vh = _svd(ls, full_matrices=False, lapack_driver="gesvd")
    out = []
    for k in range(min(dark.shape[0], n_s) + 1):
        svec = np.ones(n_s)
        if k:
            svec[n_s - k:] = np.minimum(s[n_s - k:], 1.0)
        x = (u * svec) @ vh
        if k:
            pad = np.sqrt(np.maximum(0.0, 1.0 - svec[n_s - k:] ** 2))
            x[dark[:k]] += pad[:, None] * vh[n_s - k:]
        out.append(x)
    return out


def _fbb_step(gmat, counts, f_norm2, f_opt, ps_ant, phases, s1, x_prev):
    """Semi-unitary f_bb minimizing the residual for fixed switches/phases.

    gmat is F_RF^H f_opt and counts the per-chain shifter multiplicities, so
    residual^2(X) = f_norm2 - 2 Re<gmat, X> + sum_n counts[n] ||X_n||^2.
    Majorization descent on that quadratic keeps each candidate monotone.
    """
    cmax = float(counts.max())
    shift = (cmax - counts)[:, None]

    def resid_sq(x):
        corr = float(np.real(np.vdot(gmat, x)))
        quad = float((counts @ (np.abs(x) ** 2).sum(axis=1)).real)
        return f_norm2 - 2.0 * corr + quad

    inits = [_polar(gmat)]
    ls = np.zeros_like(gmat)
    nz = counts > 0
    ls[nz] = gmat[nz] / counts[nz, None]
    if np.linalg.norm(ls) > 1e-14:
        inits.extend(_parking_family(ls, counts))
    if x_prev is not None:
        inits.append(x_prev)

    endpoints = [] if x_prev is None else [x_prev]
    for x in inits:
        r = resid_sq(x)
        for _ in range(_MM_MAX_ITER):
            x_new = _polar(gmat + shift * x)
            r_new = resid_sq(x_new)
            if r - r_new <= _MM_RTOL * max(abs(r), 1e-30):
                if r_new < r:
                    x, r = x_new, r_new
                break
            x, r = x_new, r_new
        endpoints.append(x)

    # pick by the direct residual so monotonicity against x_prev is exact
    best_x, best_r = None, np.inf
    for x in endpoints:
        r = _residual_direct(f_opt, ps_ant, phases, s1, x)
        if r < best_r:
            best_x, best_r = x, r
    return best_x, best_r


def _switch_step(f_sel_conj, f_bb, q):
    """Per-shifter exact maximization of Re(e^{j phi} g) over chain and
    quantized phase; ties resolve to the smallest chain / grid index."""
    m = 1 << q
    step = TWO_PI / m
    g = f_sel_conj @ f_bb.T                      # (n_ps, n_chains)
    r = ((TWO_PI - np.angle(g)) % TWO_PI) / step
    k = np.floor(r + 0.5)
    k = np.where(r + 0.5 == k, k - 1.0, k)
    k = k.astype(np.int64) % m
    val = np.cos(step * k) * g.real - np.sin(step * k) * g.imag
    s1 = np.argmax(val, axis=1).astype(np.int64)
    return s1, k[np.arange(k.shape[0]), s1]


def altmin_loop(f_opt, ps_ant, n_chains, q, n_iter, tol, s1_init, k_init):
    """Alternate the two block updates until the end-of-iteration residual
    stalls (relative change <= tol) or n_iter sweeps complete.

    Each sweep updates the digital precoder first, then the switches and
    phases, so the returned assignment is exactly optimal for the returned
    digital precoder.  Returns (f_bb, s1, k, resid_fbb, resid_switch,
    n_done) with one entry per digital / switch update respectively.
    """
    f_opt = np.ascontiguousarray(f_opt, dtype=np.complex128)
    ps_ant = np.asarray(ps_ant, dtype=np.int64)
    n_ps = ps_ant.shape[0]
    m = 1 << q
    s1 = np.asarray(s1_init, dtype=np.int64).copy()
    k = np.asarray(k_init, dtype=np.int64).copy()

    f_sel = f_opt[ps_ant]
    f_sel_conj = f_sel.conj()
    f_norm2 = float(np.linalg.norm(f_opt) ** 2)

    def gmat_counts(s1, k):
        phases = np.exp(2j * math.pi * k / m)
        g = np.zeros((n_chains, f_opt.shape[1]), dtype=np.complex128)
        np.add.at(g, s1, phases.conj()[:, None] * f_sel)
        counts = np.bincount(s1, minlength=n_chains).astype(np.float64)
        return g, counts, phases

    resid_fbb, resid_switch = [], []
    f_bb = None
    r_prev = None
    n_done = 0
    for _ in range(n_iter):
        g, counts, phases = gmat_counts(s1, k)
        f_bb, r_a = _fbb_step(g, counts, f_norm2, f_opt, ps_ant, phases, s1, f_bb)
        resid_fbb.append(r_a)

        s1, k = _switch_step(f_sel_conj, f_bb, q)
        phases = np.exp(2j * math.pi * k / m)
        r_b = _residual_direct(f_opt, ps_ant, phases, s1, f_bb)
        resid_switch.append(r_b)
        n_done += 1
        if r_prev is not None and abs(r_prev - r_b) <= tol * max(r_prev, 1e-30):
            break
        r_prev = r_b

    return (
        f_bb,
        s1,
        k,
        np.asarray(resid_fbb),
        np.asarray(resid_switch),
        n_done,
    )


BACKEND = "python"
