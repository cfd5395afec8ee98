# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled WENO5-JS reconstruction kernels."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

IMPL = "cython"

cdef double D0 = 0.3
cdef double D1 = 0.6
cdef double D2 = 0.1
cdef double C1312 = 13.0 / 12.0


cdef inline double _recon(double a, double b, double c, double d, double e,
                          double eps) nogil:
    cdef double p0, p1, p2, b0, b1, b2, a0, a1, a2, t
    p0 = (2.0 * c + 5.0 * d - e) / 6.0
    p1 = (-b + 5.0 * c + 2.0 * d) / 6.0
    p2 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0

    t = c - 2.0 * d + e
    b0 = C1312 * t * t
    t = 3.0 * c - 4.0 * d + e
    b0 += 0.25 * t * t

    t = b - 2.0 * c + d
    b1 = C1312 * t * t
    t = b - d
    b1 += 0.25 * t * t

    t = a - 2.0 * b + c
    b2 = C1312 * t * t
    t = a - 4.0 * b + 3.0 * c
    b2 += 0.25 * t * t

    a0 = D0 / ((b0 + eps) * (b0 + eps))
    a1 = D1 / ((b1 + eps) * (b1 + eps))
    a2 = D2 / ((b2 + eps) * (b2 + eps))
    return (a0 * p0 + a1 * p1 + a2 * p2) / (a0 + a1 + a2)


def weno5_lines(v, double eps, int side):
    """Interface reconstruction along the last axis; see the NumPy twin."""
    cdef double[:, ::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t m = vv.shape[0]
    cdef Py_ssize_t L = vv.shape[1]
    cdef Py_ssize_t nout = L - 5
    out_arr = np.empty((m, nout), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, q
    with nogil:
        if side > 0:
            for i in range(m):
                for q in range(nout):
                    out[i, q] = _recon(vv[i, q], vv[i, q + 1], vv[i, q + 2],
                                       vv[i, q + 3], vv[i, q + 4], eps)
        else:
            for i in range(m):
                for q in range(nout):
                    out[i, q] = _recon(vv[i, q + 5], vv[i, q + 4], vv[i, q + 3],
                                       vv[i, q + 2], vv[i, q + 1], eps)
    return out_arr


def weno5_points(s, double eps, int side):
    """Pointwise reconstruction from (npoints, 5) stencils; see the NumPy twin."""
    cdef double[:, ::1] ss = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t n = ss.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        if side > 0:
            for i in range(n):
                out[i] = _recon(ss[i, 0], ss[i, 1], ss[i, 2], ss[i, 3],
                                ss[i, 4], eps)
        else:
            for i in range(n):
                out[i] = _recon(ss[i, 4], ss[i, 3], ss[i, 2], ss[i, 1],
                                ss[i, 0], eps)
    return out_arr
