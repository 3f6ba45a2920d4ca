# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see _kernels_py for the reference semantics.

All kernels operate on a one-dimensional dyadic domain whose 2^J cells are
stored in position order (every dyadic block is contiguous).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def _levels(Py_ssize_t c):
    cdef int j = 0
    cdef Py_ssize_t m = 1
    while m < c:
        m <<= 1
        j += 1
    if m != c:
        raise ValueError("cell count must be a power of two")
    return j


def tree_max_avg(vals):
    cdef const double[:, ::1] v = np.ascontiguousarray(vals, dtype=np.float64)
    cdef Py_ssize_t c = v.shape[0]
    cdef Py_ssize_t k = v.shape[1]
    cdef int j = _levels(c)
    out_arr = np.array(v, dtype=np.float64, copy=True)
    sums_arr = np.array(v, dtype=np.float64, copy=True)
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] sums = sums_arr
    cdef Py_ssize_t lev, nblk, b, i, col, width, base
    cdef double mean
    for lev in range(1, j + 1):
        nblk = c >> lev
        width = 1 << lev
        for b in range(nblk):
            for col in range(k):
                sums[b, col] = sums[2 * b, col] + sums[2 * b + 1, col]
        for b in range(nblk):
            base = b * width
            for col in range(k):
                mean = sums[b, col] / width
                for i in range(base, base + width):
                    if mean > out[i, col]:
                        out[i, col] = mean
    return out_arr


cdef inline double _opnorm22(double a, double b, double c, double d) nogil:
    cdef double f = a * a + b * b + c * c + d * d
    cdef double det = a * d - b * c
    cdef double disc = f * f - 4.0 * det * det
    if disc < 0.0:
        disc = 0.0
    return sqrt(0.5 * (f + sqrt(disc)))


def pair_opnorm(a, b):
    cdef const double[:, :, ::1] am = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, :, ::1] bm = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t cx = am.shape[0]
    cdef Py_ssize_t cy = bm.shape[0]
    out_arr = np.empty((cx, cy), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t x, y
    cdef double p00, p01, p10, p11
    with nogil:
        for x in range(cx):
            for y in range(cy):
                p00 = am[x, 0, 0] * bm[y, 0, 0] + am[x, 0, 1] * bm[y, 1, 0]
                p01 = am[x, 0, 0] * bm[y, 0, 1] + am[x, 0, 1] * bm[y, 1, 1]
                p10 = am[x, 1, 0] * bm[y, 0, 0] + am[x, 1, 1] * bm[y, 1, 0]
                p11 = am[x, 1, 0] * bm[y, 0, 1] + am[x, 1, 1] * bm[y, 1, 1]
                out[x, y] = _opnorm22(p00, p01, p10, p11)
    return out_arr


def cg_values(a, b, f):
    cdef const double[:, :, ::1] am = np.ascontiguousarray(a, dtype=np.float64)
    g_arr = np.einsum("yij,yj->yi", np.asarray(b, dtype=np.float64), np.asarray(f, dtype=np.float64))
    cdef const double[:, ::1] g = np.ascontiguousarray(g_arr)
    cdef Py_ssize_t cx = am.shape[0]
    cdef Py_ssize_t cy = g.shape[0]
    out_arr = np.empty((cx, cy), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t x, y
    cdef double v0, v1
    with nogil:
        for x in range(cx):
            for y in range(cy):
                v0 = am[x, 0, 0] * g[y, 0] + am[x, 0, 1] * g[y, 1]
                v1 = am[x, 1, 0] * g[y, 0] + am[x, 1, 1] * g[y, 1]
                out[x, y] = sqrt(v0 * v0 + v1 * v1)
    return out_arr


def ancestor_max_mean_rows(g):
    cdef const double[:, ::1] gm = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t c = gm.shape[0]
    cdef int j = _levels(c)
    out_arr = np.empty(c, dtype=np.float64)
    cdef double[::1] out = out_arr
    pref_arr = np.empty(c + 1, dtype=np.float64)
    cdef double[::1] pref = pref_arr
    cdef Py_ssize_t x, y, lev, lo, width
    cdef double best, mean
    for x in range(c):
        pref[0] = 0.0
        for y in range(c):
            pref[y + 1] = pref[y] + gm[x, y]
        best = -1.0
        for lev in range(j + 1):
            width = 1 << lev
            lo = (x >> lev) << lev
            mean = (pref[lo + width] - pref[lo]) / width
            if mean > best:
                best = mean
        out[x] = best
    return out_arr


def ellip_max_norm(c, a, v, dirs, chunk=32):
    cdef const double[::1] cm = np.ascontiguousarray(c, dtype=np.float64)
    cdef const double[:, :, ::1] am = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, :, ::1] vm = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[:, ::1] dm = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef Py_ssize_t cc = cm.shape[0]
    cdef Py_ssize_t k = dm.shape[0]
    cdef int j = _levels(cc)
    out_arr = np.empty(cc, dtype=np.float64)
    cdef double[::1] out = out_arr
    pref_arr = np.empty((cc + 1, k), dtype=np.float64)
    cdef double[:, ::1] pref = pref_arr
    zbuf_arr = np.empty((k, 2), dtype=np.float64)
    cdef double[:, ::1] zbuf = zbuf_arr
    cdef Py_ssize_t x, y, kk, lev, lo, width
    cdef double t0, t1, best, mean
    with nogil:
        for x in range(cc):
            for kk in range(k):
                zbuf[kk, 0] = vm[x, 0, 0] * dm[kk, 0] + vm[x, 0, 1] * dm[kk, 1]
                zbuf[kk, 1] = vm[x, 1, 0] * dm[kk, 0] + vm[x, 1, 1] * dm[kk, 1]
                pref[0, kk] = 0.0
            for y in range(cc):
                for kk in range(k):
                    t0 = am[y, 0, 0] * zbuf[kk, 0] + am[y, 0, 1] * zbuf[kk, 1]
                    t1 = am[y, 1, 0] * zbuf[kk, 0] + am[y, 1, 1] * zbuf[kk, 1]
                    pref[y + 1, kk] = pref[y, kk] + cm[y] * sqrt(t0 * t0 + t1 * t1)
            best = -1.0
            for lev in range(j + 1):
                width = 1 << lev
                lo = (x >> lev) << lev
                for kk in range(k):
                    mean = (pref[lo + width, kk] - pref[lo, kk]) / width
                    if mean > best:
                        best = mean
            out[x] = best
    return out_arr
