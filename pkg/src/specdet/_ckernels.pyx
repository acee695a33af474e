# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, sin, fabs, log1p, sqrt, INFINITY

cnp.import_array()


def theta_sum(re, im, w, ts, double tol_rel, double tol_abs):
    cdef const double[::1] vre = np.ascontiguousarray(re, dtype=np.float64)
    cdef const double[::1] vim = np.ascontiguousarray(im, dtype=np.float64)
    cdef const double[::1] vw = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[::1] vts = np.ascontiguousarray(ts, dtype=np.float64)
    cdef Py_ssize_t m = vre.shape[0], nt = vts.shape[0]
    out_re = np.zeros(nt, dtype=np.float64)
    out_im = np.zeros(nt, dtype=np.float64)
    used = np.full(nt, -1, dtype=np.int64)
    cdef double[::1] ore = out_re
    cdef double[::1] oim = out_im
    cdef long long[::1] vused = used
    cdef Py_ssize_t i, n
    cdef double t, e, pr, pi, cr, ci, x, y, mag_next, d, r, tail, amp
    with nogil:
        for i in range(nt):
            t = vts[i]
            pr = 0.0
            pi = 0.0
            cr = 0.0
            ci = 0.0
            for n in range(m):
                e = vw[n] * exp(-t * vre[n])
                # Neumaier compensated accumulation of both components
                x = e * cos(t * vim[n])
                y = pr + x
                if fabs(pr) >= fabs(x):
                    cr = cr + ((pr - y) + x)
                else:
                    cr = cr + ((x - y) + pr)
                pr = y
                x = -e * sin(t * vim[n])
                y = pi + x
                if fabs(pi) >= fabs(x):
                    ci = ci + ((pi - y) + x)
                else:
                    ci = ci + ((x - y) + pi)
                pi = y
                if n + 1 < m:
                    mag_next = fabs(vw[n + 1]) * exp(-t * vre[n + 1])
                    if vw[n + 1] == 0.0:
                        tail = INFINITY
                    elif mag_next == 0.0:
                        tail = 0.0
                    else:
                        d = vre[n + 1] - vre[n]
                        if d > 0:
                            r = exp(-t * d)
                        else:
                            r = 1.0
                        if r < 1.0:
                            tail = mag_next / (1.0 - r)
                        else:
                            tail = INFINITY
                    amp = tol_rel * sqrt((pr + cr) * (pr + cr) + (pi + ci) * (pi + ci))
                    if amp < tol_abs:
                        amp = tol_abs
                    if tail <= amp or tail < 1e-300:
                        vused[i] = n + 1
                        break
            ore[i] = pr + cr
            oim[i] = pi + ci
    return out_re + 1j * out_im, used


def geodesic_log_sum(lengths, counts, double s, double tol_abs, long long n_max):
    cdef const double[::1] vl = np.ascontiguousarray(lengths, dtype=np.float64)
    cdef const double[::1] vc = np.ascontiguousarray(counts, dtype=np.float64)
    cdef Py_ssize_t p = vl.shape[0], i
    cdef double pdiv = p if p > 0 else 1
    cdef double total = 0.0, comp = 0.0, v, tt, q, x, xn, tail = 0.0, tail_total = 0.0
    cdef long long n, n_used = 0
    with nogil:
        for i in range(p):
            q = exp(-vl[i])
            x = exp(-s * vl[i])
            n = 0
            while True:
                v = vc[i] * log1p(-x)
                # Neumaier compensated summation
                tt = total + v
                if fabs(total) >= fabs(v):
                    comp = comp + ((total - tt) + v)
                else:
                    comp = comp + ((v - tt) + total)
                total = tt
                xn = x * q
                tail = vc[i] * xn / ((1.0 - xn) * (1.0 - q))
                n = n + 1
                if tail < tol_abs / pdiv or n >= n_max:
                    break
                x = xn
            tail_total = tail_total + tail
            if n > n_used:
                n_used = n
    return total + comp, tail_total, n_used
