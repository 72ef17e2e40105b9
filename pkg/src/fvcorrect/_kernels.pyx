# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: tridiagonal elimination and the five-point matvec."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def thomas(const double[::1] sub, const double[::1] diag, const double[::1] sup,
           const double[::1] rhs):
    cdef Py_ssize_t n = diag.shape[0], i
    cdef double denom
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.empty(n)
    cdef double[::1] c = np.empty(n)
    cdef double[::1] d = np.empty(n)
    cdef double[::1] xv = x
    if n == 0:
        return x
    denom = diag[0]
    if denom == 0.0:
        raise ZeroDivisionError("zero pivot at row 0")
    c[0] = sup[0] / denom if n > 1 else 0.0
    d[0] = rhs[0] / denom
    for i in range(1, n):
        denom = diag[i] - sub[i - 1] * c[i - 1]
        if denom == 0.0:
            raise ZeroDivisionError(f"zero pivot at row {i}")
        c[i] = sup[i] / denom if i < n - 1 else 0.0
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / denom
    xv[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        xv[i] = d[i] - c[i] * xv[i + 1]
    return x


def five_point_apply(const double[:, ::1] center, const double[:, ::1] west,
                     const double[:, ::1] east, const double[:, ::1] south,
                     const double[:, ::1] north, const double[:, ::1] x,
                     double[:, ::1] out):
    cdef Py_ssize_t m = center.shape[0], n = center.shape[1], i, j
    cdef double acc
    for i in range(m):
        for j in range(n):
            acc = center[i, j] * x[i, j]
            if i > 0:
                acc -= west[i, j] * x[i - 1, j]
            if i < m - 1:
                acc -= east[i, j] * x[i + 1, j]
            if j > 0:
                acc -= south[i, j] * x[i, j - 1]
            if j < n - 1:
                acc -= north[i, j] * x[i, j + 1]
            out[i, j] = acc
    return np.asarray(out)
