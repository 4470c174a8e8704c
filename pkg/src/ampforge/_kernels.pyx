# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Omega-search kernels.

Hermitian N x N matrices are handled through their real 2N x 2N embedding
``[[Re, -Im], [Im, Re]]`` whose spectrum is the Hermitian spectrum doubled;
eigenvalues come from cyclic Jacobi rotations. The Nelder-Mead loop runs
without the GIL so restarts can be spread over threads.
"""

import numpy as np
from libc.math cimport fabs, sqrt, INFINITY

NAME = "cython"


cdef double _sym_min_eig(double[:, ::1] a, int m) noexcept nogil:
    cdef int sweep, p, q, k
    cdef double off, diag, apq, app, aqq, theta, t, c, s, akp, akq, lo
    for sweep in range(60):
        off = 0.0
        diag = 0.0
        for p in range(m):
            diag += a[p, p] * a[p, p]
            for q in range(p + 1, m):
                off += a[p, q] * a[p, q]
        if off <= 1e-34 * diag or off == 0.0:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(m):
                    if k != p and k != q:
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = c * akp - s * akq
                        a[p, k] = a[k, p]
                        a[k, q] = s * akp + c * akq
                        a[q, k] = a[k, q]
    lo = a[0, 0]
    for p in range(1, m):
        if a[p, p] < lo:
            lo = a[p, p]
    return lo


cdef void _embed(double[:, ::1] re, double[:, ::1] im, int n, double[:, ::1] out) noexcept nogil:
    cdef int i, j
    for i in range(n):
        for j in range(n):
            out[i, j] = re[i, j]
            out[i + n, j + n] = re[i, j]
            out[i, j + n] = -im[i, j]
            out[i + n, j] = im[i, j]


cdef class _Work:
    cdef double[:, ::1] gpi_re, gpi_im, gxi_re, gxi_im
    cdef double[:, ::1] o_re, o_im, k_re, k_im, emb
    cdef double[::1] p
    cdef int n
    cdef double margin

    def __init__(self, gpi_re, gpi_im, gxi_re, gxi_im, p, double margin):
        self.n = p.shape[0]
        self.gpi_re = np.array(gpi_re, dtype=np.float64, order="C")
        self.gpi_im = np.array(gpi_im, dtype=np.float64, order="C")
        self.gxi_re = np.array(gxi_re, dtype=np.float64, order="C")
        self.gxi_im = np.array(gxi_im, dtype=np.float64, order="C")
        self.p = np.array(p, dtype=np.float64, order="C")
        self.o_re = np.zeros((self.n, self.n))
        self.o_im = np.zeros((self.n, self.n))
        self.k_re = np.zeros((self.n, self.n))
        self.k_im = np.zeros((self.n, self.n))
        self.emb = np.zeros((2 * self.n, 2 * self.n))
        self.margin = margin


cdef double _penalty(_Work w, double* x) noexcept nogil:
    cdef int n = w.n
    cdef int i, j, k = 0
    cdef double lam_o, lam_k, a, b, xr, xi
    for i in range(n):
        w.o_re[i, i] = w.p[i]
        w.o_im[i, i] = 0.0
        for j in range(i + 1, n):
            xr = x[2 * k]
            xi = x[2 * k + 1]
            w.o_re[i, j] = xr
            w.o_im[i, j] = xi
            w.o_re[j, i] = xr
            w.o_im[j, i] = -xi
            k += 1
    for i in range(n):
        for j in range(n):
            w.k_re[i, j] = w.gpi_re[i, j] - (w.gxi_re[i, j] * w.o_re[i, j] - w.gxi_im[i, j] * w.o_im[i, j])
            w.k_im[i, j] = w.gpi_im[i, j] - (w.gxi_re[i, j] * w.o_im[i, j] + w.gxi_im[i, j] * w.o_re[i, j])
    _embed(w.o_re, w.o_im, n, w.emb)
    lam_o = _sym_min_eig(w.emb, 2 * n)
    _embed(w.k_re, w.k_im, n, w.emb)
    lam_k = _sym_min_eig(w.emb, 2 * n)
    a = w.margin - lam_o
    b = w.margin - lam_k
    if a < 0.0:
        a = 0.0
    if b < 0.0:
        b = 0.0
    return a * a + b * b


def min_eig_hermitian(re, im):
    cdef double[:, ::1] r = np.array(re, dtype=np.float64, order="C")
    cdef double[:, ::1] i = np.array(im, dtype=np.float64, order="C")
    cdef int n = r.shape[0]
    cdef double[:, ::1] emb = np.zeros((2 * n, 2 * n))
    _embed(r, i, n, emb)
    return _sym_min_eig(emb, 2 * n)


def penalty(x, gpi_re, gpi_im, gxi_re, gxi_im, p, double margin):
    cdef _Work w = _Work(gpi_re, gpi_im, gxi_re, gxi_im, p, margin)
    cdef double[::1] xv = np.array(x, dtype=np.float64, order="C")
    if xv.shape[0] == 0:
        return _penalty(w, NULL)
    return _penalty(w, &xv[0])


cdef inline void _copy(double* dst, double* src, int nv) noexcept nogil:
    cdef int i
    for i in range(nv):
        dst[i] = src[i]


cdef void _sort(double[:, ::1] sim, double[::1] fs, double[::1] tmp, int nv) noexcept nogil:
    # stable insertion sort of simplex rows by value
    cdef int i, j, c
    cdef double fkey
    for i in range(1, nv + 1):
        fkey = fs[i]
        for c in range(nv):
            tmp[c] = sim[i, c]
        j = i - 1
        while j >= 0 and fs[j] > fkey:
            fs[j + 1] = fs[j]
            for c in range(nv):
                sim[j + 1, c] = sim[j, c]
            j -= 1
        fs[j + 1] = fkey
        for c in range(nv):
            sim[j + 1, c] = tmp[c]


cdef int _nelder_mead(_Work w, double[::1] x, int nv, double step, int maxfev,
                      double xatol, double fatol, int inner_restarts,
                      double[:, ::1] sim, double[::1] fs, double[::1] xbar,
                      double[::1] xr, double[::1] xe, double[::1] xc,
                      double[::1] tmp, double* fbest_out) noexcept nogil:
    cdef double rho = 1.0
    cdef double chi = 1.0 + 2.0 / nv
    cdef double psi = 0.75 - 1.0 / (2.0 * nv)
    cdef double sigma = 1.0 - 1.0 / nv
    cdef int nfev = 0
    cdef double fbest = INFINITY
    cdef double fr, fe, fc, dmax
    cdef int r, i, j, c, i0
    cdef bint accepted
    for r in range(inner_restarts + 1):
        for i in range(nv + 1):
            for c in range(nv):
                sim[i, c] = x[c]
            if i > 0:
                sim[i, i - 1] += step
            fs[i] = _penalty(w, &sim[i, 0])
        nfev += nv + 1
        while nfev < maxfev:
            _sort(sim, fs, tmp, nv)
            if fs[0] <= 0.0:
                break
            dmax = 0.0
            for i in range(1, nv + 1):
                if fabs(fs[i] - fs[0]) > dmax:
                    dmax = fabs(fs[i] - fs[0])
            if dmax <= fatol:
                dmax = 0.0
                for i in range(1, nv + 1):
                    for c in range(nv):
                        if fabs(sim[i, c] - sim[0, c]) > dmax:
                            dmax = fabs(sim[i, c] - sim[0, c])
                if dmax <= xatol:
                    break
            for c in range(nv):
                xbar[c] = 0.0
                for i in range(nv):
                    xbar[c] += sim[i, c]
                xbar[c] /= nv
            for c in range(nv):
                xr[c] = xbar[c] + rho * (xbar[c] - sim[nv, c])
            fr = _penalty(w, &xr[0])
            nfev += 1
            if fr < fs[0]:
                for c in range(nv):
                    xe[c] = xbar[c] + rho * chi * (xbar[c] - sim[nv, c])
                fe = _penalty(w, &xe[0])
                nfev += 1
                if fe < fr:
                    _copy(&sim[nv, 0], &xe[0], nv)
                    fs[nv] = fe
                else:
                    _copy(&sim[nv, 0], &xr[0], nv)
                    fs[nv] = fr
                continue
            if fr < fs[nv - 1]:
                _copy(&sim[nv, 0], &xr[0], nv)
                fs[nv] = fr
                continue
            accepted = False
            if fr < fs[nv]:
                for c in range(nv):
                    xc[c] = xbar[c] + psi * rho * (xbar[c] - sim[nv, c])
                fc = _penalty(w, &xc[0])
                nfev += 1
                if fc <= fr:
                    accepted = True
            else:
                for c in range(nv):
                    xc[c] = xbar[c] - psi * (xbar[c] - sim[nv, c])
                fc = _penalty(w, &xc[0])
                nfev += 1
                if fc < fs[nv]:
                    accepted = True
            if accepted:
                _copy(&sim[nv, 0], &xc[0], nv)
                fs[nv] = fc
                continue
            for j in range(1, nv + 1):
                for c in range(nv):
                    sim[j, c] = sim[0, c] + sigma * (sim[j, c] - sim[0, c])
                fs[j] = _penalty(w, &sim[j, 0])
            nfev += nv
        i0 = 0
        for i in range(1, nv + 1):
            if fs[i] < fs[i0]:
                i0 = i
        if fs[i0] < fbest:
            fbest = fs[i0]
            _copy(&x[0], &sim[i0, 0], nv)
        if fbest <= 0.0 or nfev >= maxfev:
            break
    fbest_out[0] = fbest
    return nfev


def nelder_mead_penalty(x0, double step, gpi_re, gpi_im, gxi_re, gxi_im, p,
                        double margin, int maxfev, double xatol, double fatol,
                        int inner_restarts):
    """Adaptive Nelder-Mead on the eigenvalue penalty; same contract as the
    pure-Python fallback.

    Returns:
        (x_best, f_best, nfev)
    """
    cdef _Work w = _Work(gpi_re, gpi_im, gxi_re, gxi_im, p, margin)
    x_arr = np.array(x0, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef int nv = x.shape[0]
    cdef double[:, ::1] sim = np.zeros((nv + 1, nv))
    cdef double[::1] fs = np.zeros(nv + 1)
    cdef double[::1] xbar = np.zeros(nv)
    cdef double[::1] xr = np.zeros(nv)
    cdef double[::1] xe = np.zeros(nv)
    cdef double[::1] xc = np.zeros(nv)
    cdef double[::1] tmp = np.zeros(nv)
    cdef double fbest = 0.0
    cdef int nfev
    with nogil:
        nfev = _nelder_mead(w, x, nv, step, maxfev, xatol, fatol, inner_restarts,
                            sim, fs, xbar, xr, xe, xc, tmp, &fbest)
    return x_arr, fbest, nfev
