# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop for the alternating-minimization precoder fit.

Mirrors `_altmin_py.altmin_loop` step for step: a majorization-descent
digital-precoder update (small SVDs through LAPACK zgesvd) alternated with
the exact per-shifter switch/phase assignment.  Matrices here are a few
dozen rows at most, so the win over numpy comes from removing per-call
overhead, not from BLAS.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, atan2, cos, sin, floor, fmod, sqrt, M_PI
from scipy.linalg.cython_lapack cimport zgesvd

cnp.import_array()

ctypedef double complex zdouble

cdef double TWO_PI = 2.0 * M_PI
cdef int MM_MAX_ITER = 60
cdef double MM_RTOL = 1e-13

BACKEND = "c"


cdef struct SvdWork:
    zdouble *af      # fortran copy, nc x ns
    zdouble *u       # nc x ns
    zdouble *vt      # ns x ns
    double *sv       # ns
    zdouble *work
    double *rwork
    int lwork


cdef int _svd_into(zdouble[:, ::1] z, SvdWork *w) except -1:
    """Thin SVD of z into the workspace (u: m x n, sv: n, vt: n x n)."""
    cdef int m = z.shape[0], n = z.shape[1]
    cdef int i, j, info = 0
    cdef char jobs = b'S'
    for j in range(n):
        for i in range(m):
            w.af[i + j * m] = z[i, j]
    zgesvd(&jobs, &jobs, &m, &n, w.af, &m, w.sv, w.u, &m, w.vt, &n,
           w.work, &w.lwork, w.rwork, &info)
    if info != 0:
        raise RuntimeError(f"zgesvd failed with info={info}")
    return 0


cdef int _polar(zdouble[:, ::1] z, zdouble[:, ::1] out, SvdWork *w) except -1:
    """out <- polar factor (orthonormal columns) of z via zgesvd."""
    cdef int m = z.shape[0], n = z.shape[1]
    cdef int i, j, k
    cdef zdouble acc
    _svd_into(z, w)
    for i in range(m):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + w.u[i + k * m] * w.vt[k + j * n]
            out[i, j] = acc
    return 0


cdef double _residual_direct(zdouble[:, ::1] f_opt, long[::1] ps_ant,
                             zdouble[::1] phases, long[::1] s1,
                             zdouble[:, ::1] x, zdouble[:, ::1] approx):
    cdef int n_t = f_opt.shape[0], n_s = f_opt.shape[1], n_ps = ps_ant.shape[0]
    cdef int i, s
    cdef long a, c
    cdef double acc = 0.0
    cdef zdouble d
    for i in range(n_t):
        for s in range(n_s):
            approx[i, s] = 0
    for i in range(n_ps):
        a = ps_ant[i]
        c = s1[i]
        for s in range(n_s):
            approx[a, s] = approx[a, s] + phases[i] * x[c, s]
    for i in range(n_t):
        for s in range(n_s):
            d = f_opt[i, s] - approx[i, s]
            acc += d.real * d.real + d.imag * d.imag
    return sqrt(acc)


cdef double _resid_sq(zdouble[:, ::1] g, double[::1] counts, double f_norm2,
                      zdouble[:, ::1] x):
    cdef int nc = g.shape[0], ns = g.shape[1]
    cdef int n, s
    cdef double corr = 0.0, quad = 0.0
    for n in range(nc):
        for s in range(ns):
            corr += g[n, s].real * x[n, s].real + g[n, s].imag * x[n, s].imag
            quad += counts[n] * (x[n, s].real * x[n, s].real + x[n, s].imag * x[n, s].imag)
    return f_norm2 - 2.0 * corr + quad


cdef int _mm_descend(zdouble[:, ::1] g, double[::1] counts, double cmax,
                     double f_norm2, zdouble[:, ::1] x,
                     zdouble[:, ::1] scratch_z, zdouble[:, ::1] scratch_x,
                     SvdWork *w) except -1:
    """Majorization descent on the expanded residual, in place on x."""
    cdef int nc = g.shape[0], ns = g.shape[1]
    cdef int it, n, s
    cdef double r, r_new
    r = _resid_sq(g, counts, f_norm2, x)
    for it in range(MM_MAX_ITER):
        for n in range(nc):
            for s in range(ns):
                scratch_z[n, s] = g[n, s] + (cmax - counts[n]) * x[n, s]
        _polar(scratch_z, scratch_x, w)
        r_new = _resid_sq(g, counts, f_norm2, scratch_x)
        if r - r_new <= MM_RTOL * max(abs(r), 1e-30):
            if r_new < r:
                x[:, :] = scratch_x
            break
        x[:, :] = scratch_x
        r = r_new
    return 0


def altmin_loop(f_opt, ps_ant, n_chains, q, n_iter, tol, s1_init, k_init):
    """Same contract as the numpy fallback; see `_altmin_py.altmin_loop`."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] f_opt_a = \
        np.ascontiguousarray(f_opt, dtype=np.complex128)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ps_ant_a = \
        np.ascontiguousarray(ps_ant, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] s1 = \
        np.ascontiguousarray(s1_init, dtype=np.int64).copy()
    cdef cnp.ndarray[cnp.int64_t, ndim=1] kk = \
        np.ascontiguousarray(k_init, dtype=np.int64).copy()

    cdef int n_t = f_opt_a.shape[0], n_s = f_opt_a.shape[1]
    cdef int n_ps = ps_ant_a.shape[0]
    cdef int nc = int(n_chains), qq = int(q), cap = int(n_iter)
    cdef double ctol = float(tol)
    cdef int m_grid = 1 << qq

    if n_s > nc:
        raise ValueError(f"need n_s <= n_chains, got {n_s} > {nc}")

    # scratch
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] f_sel = f_opt_a[np.asarray(ps_ant_a)]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] g = np.zeros((nc, n_s), np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] counts = np.zeros(nc)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] phases = np.zeros(n_ps, np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] x_best = np.zeros((nc, n_s), np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] x_work = np.zeros((nc, n_s), np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] x_prev = np.zeros((nc, n_s), np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] x_park_b = np.zeros((n_s + 1, nc, n_s), np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] sz = np.zeros((nc, n_s), np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] sx = np.zeros((nc, n_s), np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] approx = np.zeros((n_t, n_s), np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] resid_fbb = np.zeros(cap)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] resid_switch = np.zeros(cap)

    cdef zdouble[:, ::1] f_opt_v = f_opt_a
    cdef zdouble[:, ::1] f_sel_v = f_sel
    cdef zdouble[:, ::1] g_v = g
    cdef double[::1] counts_v = counts
    cdef zdouble[::1] phases_v = phases
    cdef zdouble[:, ::1] x_best_v = x_best
    cdef zdouble[:, ::1] x_work_v = x_work
    cdef zdouble[:, ::1] x_prev_v = x_prev
    cdef zdouble[:, :, ::1] x_park_v = x_park_b
    cdef zdouble[:, ::1] sz_v = sz
    cdef zdouble[:, ::1] sx_v = sx
    cdef zdouble[:, ::1] approx_v = approx
    cdef long[::1] s1_v = s1
    cdef long[::1] k_v = kk
    cdef long[::1] ps_ant_v = ps_ant_a

    cdef SvdWork w
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w_af = np.zeros(nc * n_s, np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w_u = np.zeros(nc * n_s, np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w_vt = np.zeros(n_s * n_s, np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_s = np.zeros(n_s)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w_work = np.zeros(16 * (nc + n_s), np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_rwork = np.zeros(8 * n_s)
    w.af = <zdouble *> cnp.PyArray_DATA(w_af)
    w.u = <zdouble *> cnp.PyArray_DATA(w_u)
    w.vt = <zdouble *> cnp.PyArray_DATA(w_vt)
    w.sv = <double *> cnp.PyArray_DATA(w_s)
    w.work = <zdouble *> cnp.PyArray_DATA(w_work)
    w.rwork = <double *> cnp.PyArray_DATA(w_rwork)
    w.lwork = 16 * (nc + n_s)

    cdef double f_norm2 = 0.0
    cdef int i, s, n, it
    cdef long a
    for i in range(n_t):
        for s in range(n_s):
            f_norm2 += (f_opt_v[i, s].real * f_opt_v[i, s].real
                        + f_opt_v[i, s].imag * f_opt_v[i, s].imag)

    cdef bint has_prev = False
    cdef double r_prev = 0.0
    cdef bint have_r_prev = False
    cdef int n_done = 0
    cdef double r_a, r_b

    for it in range(cap):
        _gmat_counts(f_sel_v, s1_v, k_v, m_grid, g_v, counts_v, phases_v)
        r_a = _fbb_step(g_v, counts_v, f_norm2, f_opt_v, ps_ant_v, phases_v,
                        s1_v, has_prev, x_prev_v, x_best_v, x_work_v,
                        x_park_v, sz_v, sx_v, approx_v, &w)
        resid_fbb[it] = r_a
        x_prev_v[:, :] = x_best_v
        has_prev = True

        _switch_step(f_sel_v, x_best_v, qq, s1_v, k_v)
        for i in range(n_ps):
            phases_v[i] = _grid_phase(k_v[i], m_grid)
        r_b = _residual_direct(f_opt_v, ps_ant_v, phases_v, s1_v, x_best_v, approx_v)
        resid_switch[it] = r_b
        n_done += 1
        if have_r_prev and abs(r_prev - r_b) <= ctol * max(r_prev, 1e-30):
            break
        r_prev = r_b
        have_r_prev = True

    return (
        x_best.copy(),
        s1,
        kk,
        resid_fbb[:n_done].copy(),
        resid_switch[:n_done].copy(),
        n_done,
    )


cdef zdouble _grid_phase(long k, int m_grid):
    cdef double ang = 2.0 * M_PI * k / m_grid
    return cos(ang) + 1j * sin(ang)


cdef void _gmat_counts(zdouble[:, ::1] f_sel, long[::1] s1, long[::1] kk,
                       int m_grid, zdouble[:, ::1] g, double[::1] counts,
                       zdouble[::1] phases):
    cdef int n_ps = f_sel.shape[0], n_s = f_sel.shape[1], nc = g.shape[0]
    cdef int i, s
    cdef long c
    cdef zdouble ph
    for i in range(nc):
        counts[i] = 0.0
        for s in range(n_s):
            g[i, s] = 0
    for i in range(n_ps):
        ph = _grid_phase(kk[i], m_grid)
        phases[i] = ph
        c = s1[i]
        counts[c] += 1.0
        for s in range(n_s):
            g[c, s] = g[c, s] + ph.conjugate() * f_sel[i, s]


cdef double _fbb_step(zdouble[:, ::1] g, double[::1] counts, double f_norm2,
                      zdouble[:, ::1] f_opt, long[::1] ps_ant,
                      zdouble[::1] phases, long[::1] s1,
                      bint has_prev, zdouble[:, ::1] x_prev,
                      zdouble[:, ::1] x_best, zdouble[:, ::1] x_work,
                      zdouble[:, :, ::1] park_stack,
                      zdouble[:, ::1] sz, zdouble[:, ::1] sx,
                      zdouble[:, ::1] approx, SvdWork *w) except -1.0:
    """Best semi-unitary digital precoder.  Candidates (same order as the
    numpy fallback): the previous iterate, the descended polar factor of
    the correlation matrix, the descended least-squares parking family,
    and the descended previous iterate; ranked by the exact residual."""
    cdef int nc = g.shape[0], ns = g.shape[1]
    cdef int n, s
    cdef double cmax = 0.0, best_r, r
    cdef double ls_norm2 = 0.0
    cdef int n_dark = 0
    cdef int j, kdir, kpark, kmax
    cdef double sc, pad
    cdef zdouble acc
    for n in range(nc):
        if counts[n] > cmax:
            cmax = counts[n]

    best_r = INFINITY
    if has_prev:
        best_r = _residual_direct(f_opt, ps_ant, phases, s1, x_prev, approx)
        x_best[:, :] = x_prev

    # candidate 1: polar of the correlation matrix
    _polar(g, x_work, w)
    _mm_descend(g, counts, cmax, f_norm2, x_work, sz, sx, w)
    r = _residual_direct(f_opt, ps_ant, phases, s1, x_work, approx)
    if r < best_r:
        best_r = r
        x_best[:, :] = x_work

    # candidates 2..: least-squares fit with its k weakest directions
    # parked on dark chains (k = 0 is the plain polar of the fit)
    for n in range(nc):
        for s in range(ns):
            sz[n, s] = g[n, s] / counts[n] if counts[n] > 0 else 0
            ls_norm2 += sz[n, s].real * sz[n, s].real + sz[n, s].imag * sz[n, s].imag
    if sqrt(ls_norm2) > 1e-14:
        _svd_into(sz, w)
        for n in range(nc):
            if counts[n] == 0.0:
                n_dark += 1
        kmax = n_dark if n_dark < ns else ns
        for kpark in range(kmax + 1):   # materialize all before MM reuses w
            for n in range(nc):
                for s in range(ns):
                    acc = 0
                    for kdir in range(ns):
                        if kdir < ns - kpark:
                            sc = 1.0
                        else:
                            sc = w.sv[kdir] if w.sv[kdir] < 1.0 else 1.0
                        acc = acc + w.u[n + kdir * nc] * sc * w.vt[kdir + s * ns]
                    park_stack[kpark, n, s] = acc
            if kpark > 0:
                j = 0
                for kdir in range(ns - kpark, ns):
                    sc = w.sv[kdir] if w.sv[kdir] < 1.0 else 1.0
                    pad = sqrt(max(0.0, 1.0 - sc * sc))
                    while counts[j] != 0.0:
                        j += 1
                    for s in range(ns):
                        park_stack[kpark, j, s] = park_stack[kpark, j, s] \
                            + pad * w.vt[kdir + s * ns]
                    j += 1
        for kpark in range(kmax + 1):
            x_work[:, :] = park_stack[kpark]
            _mm_descend(g, counts, cmax, f_norm2, x_work, sz, sx, w)
            r = _residual_direct(f_opt, ps_ant, phases, s1, x_work, approx)
            if r < best_r:
                best_r = r
                x_best[:, :] = x_work

    # final candidate: previous iterate
    if has_prev:
        x_work[:, :] = x_prev
        _mm_descend(g, counts, cmax, f_norm2, x_work, sz, sx, w)
        r = _residual_direct(f_opt, ps_ant, phases, s1, x_work, approx)
        if r < best_r:
            best_r = r
            x_best[:, :] = x_work
    return best_r


cdef void _switch_step(zdouble[:, ::1] f_sel, zdouble[:, ::1] x, int q,
                       long[::1] s1, long[::1] kk):
    """Per shifter: chain and grid phase maximizing Re(e^{j phi} g)."""
    cdef int n_ps = f_sel.shape[0], n_s = f_sel.shape[1], nc = x.shape[0]
    cdef int m_grid = 1 << q
    cdef double step = TWO_PI / m_grid
    cdef int i, n, s
    cdef double gre, gim, ang, r, val, best_val, phk
    cdef long k, best_k, best_n
    for i in range(n_ps):
        best_val = -INFINITY
        best_n = 0
        best_k = 0
        for n in range(nc):
            gre = 0.0
            gim = 0.0
            for s in range(n_s):
                # g = sum_s x[n,s] * conj(f_sel[i,s])
                gre += x[n, s].real * f_sel[i, s].real + x[n, s].imag * f_sel[i, s].imag
                gim += x[n, s].imag * f_sel[i, s].real - x[n, s].real * f_sel[i, s].imag
            ang = atan2(gim, gre)
            r = fmod(TWO_PI - ang, TWO_PI) / step
            k = <long> floor(r + 0.5)
            if r + 0.5 == <double> k:
                k -= 1
            k = k % m_grid
            phk = step * k
            val = cos(phk) * gre - sin(phk) * gim
            if val > best_val:
                best_val = val
                best_n = n
                best_k = k
        s1[i] = best_n
        kk[i] = best_k

