"""Alternating minimization for the analog/digital precoder fit.

Public entry points:

  solve_fbb_procrustes  exact semi-unitary digital-precoder update
  solve_switch_phase    exact per-shifter switch and quantized-phase update
  altmin_inner          the full inner loop (dispatches to the fast kernel
                        when each shifter drives its own antenna)
"""

import math

import numpy as np
from scipy.linalg import svd as _svd

from ..errors import DegenerateAnalogError, DimensionError
from ._backend import altmin_loop

TWO_PI = 2.0 * math.pi

_MM_MAX_ITER = 60
_MM_RTOL = 1e-13


def _polar(z: np.ndarray) -> np.ndarray:
    u, _, vh = _svd(z, full_matrices=False, lapack_driver="gesvd")
    return u @ vh


def grid_phases(k, q: int) -> np.ndarray:
    """Unit-modulus phase-shifter values for grid indices k."""
    return np.exp(2j * math.pi * np.asarray(k) / (1 << q))


def _parking_family(ls, evals, evecs, lam):
    """Semi-unitary candidates from the least-squares fit, with its k
    weakest directions parked on the analog matrix's null space (invisible
    to the residual); k = 0 is the plain polar factor.  Mirrors the kernel
    construction for diagonal Gram matrices."""
    n_s = ls.shape[1]
    tol = max(lam, 1.0) * 1e-12
    null_dirs = evecs[:, evals <= tol]
    u, s, vh = _svd(ls, full_matrices=False, lapack_driver="gesvd")
    out = []
    for k in range(min(null_dirs.shape[1], n_s) + 1):
        svec = np.ones(n_s)
        if k:
            svec[n_s - k:] = np.minimum(s[n_s - k:], 1.0)
        x = (u * svec) @ vh
        if k:
            pad = np.sqrt(np.maximum(0.0, 1.0 - svec[n_s - k:] ** 2))
            x = x + null_dirs[:, :k] @ (pad[:, None] * vh[n_s - k:])
        out.append(x)
    return out


def onehot_rows(cols, n_trf: int) -> np.ndarray:
    """Front switch matrix with row i selecting chain cols[i]."""
    cols = np.asarray(cols, dtype=np.int64)
    s1 = np.zeros((cols.shape[0], n_trf), dtype=np.int8)
    s1[np.arange(cols.shape[0]), cols] = 1
    return s1


def solve_fbb_procrustes(f_opt: np.ndarray, f_rf: np.ndarray,
                         x_prev: np.ndarray = None) -> np.ndarray:
    """Semi-unitary digital precoder minimizing || f_opt - f_rf X ||_F.

    The classical closed form (polar factor of f_rf^H f_opt) is exact only
    when f_rf has orthogonal columns of equal norm; for the switched analog
    matrices here the chain loads differ, so that solution is refined by
    majorization descent on the true residual.  Candidates: the closed-form
    polar factor, the projected least-squares solution, and x_prev when
    given (which makes the step monotone for alternating callers).
    """
    f_opt = np.asarray(f_opt, dtype=np.complex128)
    f_rf = np.asarray(f_rf, dtype=np.complex128)
    if f_rf.ndim != 2 or f_opt.ndim != 2 or f_rf.shape[0] != f_opt.shape[0]:
        raise DimensionError(
            f"incompatible shapes f_opt {f_opt.shape}, f_rf {f_rf.shape}"
        )
    if not np.any(f_rf):
        raise DegenerateAnalogError("analog precoding matrix is identically zero")

    g = f_rf.conj().T @ f_opt
    m = f_rf.conj().T @ f_rf
    evals, evecs = np.linalg.eigh(m)
    lam = float(evals[-1])
    shift = lam * np.eye(m.shape[0]) - m
    f_norm2 = float(np.linalg.norm(f_opt) ** 2)

    def resid_sq(x):
        return (
            f_norm2
            - 2.0 * float(np.real(np.vdot(g, x)))
            + float(np.real(np.vdot(x, m @ x)))
        )

    inits = [_polar(g)]
    ls = np.linalg.lstsq(f_rf, f_opt, rcond=None)[0]
    if np.linalg.norm(ls) > 1e-14:
        inits.extend(_parking_family(ls, evals, evecs, lam))
    if x_prev is not None:
        inits.append(np.asarray(x_prev, dtype=np.complex128))

    endpoints = [] if x_prev is None else [np.asarray(x_prev, dtype=np.complex128)]
    for x in inits:
        r = resid_sq(x)
        for _ in range(_MM_MAX_ITER):
            x_new = _polar(g + shift @ x)
            r_new = resid_sq(x_new)
            if r - r_new <= _MM_RTOL * max(abs(r), 1e-30):
                if r_new < r:
                    x, r = x_new, r_new
                break
            x, r = x_new, r_new
        endpoints.append(x)

    best_x, best_r = None, np.inf
    for x in endpoints:
        r = float(np.linalg.norm(f_opt - f_rf @ x))
        if r < best_r:
            best_x, best_r = x, r
    return best_x


def solve_switch_phase(f_opt: np.ndarray, f_bb: np.ndarray, s2: np.ndarray,
                       q: int):
    """Exact per-shifter solve of the decoupled correlation objective.

    For shifter i with antenna group M_i (the nonzeros of rear-switch
    column i) and g_i = f_bb @ (sum of conj f_opt rows over M_i), pick the
    chain n and grid phase maximizing Re(e^{j phi} g_i[n]).  Ties resolve to
    the smallest chain then the smallest grid index; an identically zero
    g_i lands on chain 0 with phase 0.

    Returns (s1 one-hot matrix, f_ps phase vector).
    """
    f_opt = np.asarray(f_opt, dtype=np.complex128)
    f_bb = np.asarray(f_bb, dtype=np.complex128)
    s2 = np.asarray(s2)
    if s2.shape[0] != f_opt.shape[0]:
        raise DimensionError(f"s2 has {s2.shape[0]} rows for {f_opt.shape[0]} antennas")
    m = 1 << q
    step = TWO_PI / m
    f_sel = s2.T.astype(np.float64) @ f_opt          # (n_ps, n_s) group sums
    g = f_sel.conj() @ f_bb.T                         # (n_ps, n_trf)
    r = ((TWO_PI - np.angle(g)) % TWO_PI) / step
    k = np.floor(r + 0.5)
    k = np.where(r + 0.5 == k, k - 1.0, k)
    k = k.astype(np.int64) % m
    val = np.cos(step * k) * g.real - np.sin(step * k) * g.imag
    cols = np.argmax(val, axis=1).astype(np.int64)
    k_sel = k[np.arange(k.shape[0]), cols]
    return onehot_rows(cols, f_bb.shape[0]), grid_phases(k_sel, q)


def rear_switch_antenna_map(s2: np.ndarray):
    """Antenna index driven by each shifter, or None when the rear switch
    does not map every shifter to exactly one exclusive antenna."""
    s2 = np.asarray(s2)
    if s2.ndim != 2 or not np.all((s2 == 0) | (s2 == 1)):
        return None
    if not np.all(s2.sum(axis=0) == 1):
        return None
    ps_ant = np.argmax(s2, axis=0).astype(np.int64)
    if np.unique(ps_ant).shape[0] != ps_ant.shape[0]:
        return None
    return ps_ant


def altmin_inner(f_opt: np.ndarray, s2: np.ndarray, delta: np.ndarray, scfg,
                 s1_init=None, k_init=None, want_trace: bool = False):
    """Alternating minimization of || f_opt - S2 diag(f_ps) S1 F_BB ||_F.

    The DAC gain `delta` fixes the chain count; inside the fit it is
    approximated by the identity (its entries are within a percent of one at
    practical resolutions), and it re-enters all rate metrics outside.

    Starts from a seeded random switch/phase assignment unless explicit
    initial chain columns / phase-grid indices are supplied.  Every sweep
    ends on the switch/phase update, so the returned assignment is exactly
    optimal for the returned digital precoder.  Returns (f_bb, s1, f_ps,
    residual) and, with want_trace, a dict of per-step residual traces.
    """
    f_opt = np.ascontiguousarray(f_opt, dtype=np.complex128)
    n_trf = np.asarray(delta).shape[0]
    if f_opt.shape[1] > n_trf:
        raise DimensionError(
            f"need n_s <= n_trf, got {f_opt.shape[1]} > {n_trf}"
        )
    s2 = np.asarray(s2)
    n_ps = s2.shape[1]
    m = 1 << scfg.q
    if s1_init is None or k_init is None:
        rng = np.random.default_rng(scfg.seed)
        s1_init = rng.integers(0, n_trf, n_ps) if s1_init is None else s1_init
        k_init = rng.integers(0, m, n_ps) if k_init is None else k_init
    s1_init = np.asarray(s1_init, dtype=np.int64)
    k_init = np.asarray(k_init, dtype=np.int64)

    ps_ant = rear_switch_antenna_map(s2)
    if ps_ant is not None:
        f_bb, cols, k, resid_fbb, resid_switch, n_done = altmin_loop(
            f_opt, ps_ant, n_trf, scfg.q, scfg.n_iter2, scfg.tol, s1_init, k_init
        )
        s1 = onehot_rows(cols, n_trf)
        f_ps = grid_phases(k, scfg.q)
    else:
        f_bb, s1, f_ps, resid_fbb, resid_switch = _altmin_generic(
            f_opt, s2, n_trf, scfg, s1_init, k_init
        )
    residual = float(resid_switch[-1])

    if want_trace:
        return f_bb, s1, f_ps, residual, {
            "resid_fbb": np.asarray(resid_fbb),
            "resid_switch": np.asarray(resid_switch),
        }
    return f_bb, s1, f_ps, residual


def _altmin_generic(f_opt, s2, n_trf, scfg, s1_init, k_init):
    """Reference inner loop for arbitrary binary rear switches, composed
    from the public block solvers."""
    s1 = onehot_rows(s1_init, n_trf)
    f_ps = grid_phases(k_init, scfg.q)
    s2f = s2.astype(np.float64)

    def f_rf_of(s1m, ph):
        return s2f @ (ph[:, None] * s1m)

    resid_fbb, resid_switch = [], []
    f_bb = None
    r_prev = None
    for _ in range(scfg.n_iter2):
        f_rf = f_rf_of(s1, f_ps)
        f_bb = solve_fbb_procrustes(f_opt, f_rf, x_prev=f_bb)
        resid_fbb.append(float(np.linalg.norm(f_opt - f_rf @ f_bb)))
        s1, f_ps = solve_switch_phase(f_opt, f_bb, s2, scfg.q)
        f_rf = f_rf_of(s1, f_ps)
        r_b = float(np.linalg.norm(f_opt - f_rf @ f_bb))
        resid_switch.append(r_b)
        if r_prev is not None and abs(r_prev - r_b) <= scfg.tol * max(r_prev, 1e-30):
            break
        r_prev = r_b
    return f_bb, s1, f_ps, resid_fbb, resid_switch
