# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the simulation hot kernels.

Mirrors the contract of ``gpplab._fallback`` (see there for docs); selected
at import time by ``gpplab.backend``.
"""
from libc.math cimport exp, fabs as c_fabs, floor

import numpy as np

KIND_LAPLACE = 0
KIND_GAUSSIAN = 1

cdef double INV_SQRT_2PI = 0.3989422804014327


cdef inline double _pdf(int kind, double x) nogil:
    if kind == 0:
        return 0.5 * exp(-c_fabs(x))
    return INV_SQRT_2PI * exp(-0.5 * x * x)


def kernel_pdf(int kind, x):
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    out = np.empty(x.shape[0], dtype=np.float64)
    cdef double[::1] xv = x
    cdef double[::1] ov = out
    cdef Py_ssize_t j
    with nogil:
        for j in range(xv.shape[0]):
            ov[j] = _pdf(kind, xv[j])
    return out


def sup_inf_grid(int kind, s, fabs, t, double beta):
    s = np.ascontiguousarray(s, dtype=np.float64)
    cdef double[::1] sv = s
    cdef double[::1] fv = np.ascontiguousarray(fabs, dtype=np.float64)
    # precomputed shifts keep the rounding identical to the fallback
    cdef double[::1] shift = beta * np.ascontiguousarray(t, dtype=np.float64)
    out_sup = np.empty(sv.shape[0], dtype=np.float64)
    out_inf = np.empty(sv.shape[0], dtype=np.float64)
    cdef double[::1] osv = out_sup
    cdef double[::1] oiv = out_inf
    cdef Py_ssize_t j, i, nt = fv.shape[0]
    cdef double hi, lo, v
    with nogil:
        for j in range(sv.shape[0]):
            hi = fv[0] * _pdf(kind, sv[j] - shift[0])
            lo = hi
            for i in range(1, nt):
                v = fv[i] * _pdf(kind, sv[j] - shift[i])
                if v > hi:
                    hi = v
                elif v < lo:
                    lo = v
            osv[j] = hi
            oiv[j] = lo
    return out_sup, out_inf


def sup_inf_const(int kind, s, t, double beta):
    s = np.ascontiguousarray(s, dtype=np.float64)
    cdef double[::1] sv = s
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef Py_ssize_t n = tv.shape[0] - 1
    out_sup = np.empty(sv.shape[0], dtype=np.float64)
    out_inf = np.empty(sv.shape[0], dtype=np.float64)
    cdef double[::1] osv = out_sup
    cdef double[::1] oiv = out_inf
    cdef Py_ssize_t j, pos
    cdef double p0, p1, a, b, x
    with nogil:
        for j in range(sv.shape[0]):
            p0 = _pdf(kind, sv[j])
            p1 = _pdf(kind, sv[j] - beta * tv[n])
            oiv[j] = p0 if p0 < p1 else p1
            x = floor(sv[j] / beta * n)
            if x < 0:
                pos = 0
            elif x > n - 1:
                pos = n - 1
            else:
                pos = <Py_ssize_t> x
            a = _pdf(kind, sv[j] - beta * tv[pos])
            b = _pdf(kind, sv[j] - beta * tv[pos + 1])
            osv[j] = a if a > b else b
    return out_sup, out_inf


def paths_matrix(int kind, s, t, double beta, inv_g):
    s = np.ascontiguousarray(s, dtype=np.float64)
    cdef double[::1] sv = s
    cdef double[::1] shift = beta * np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] gv = np.ascontiguousarray(inv_g, dtype=np.float64)
    out = np.empty((sv.shape[0], shift.shape[0]), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t j, i
    with nogil:
        for j in range(sv.shape[0]):
            for i in range(shift.shape[0]):
                ov[j, i] = _pdf(kind, sv[j] - shift[i]) * gv[j]
    return out
