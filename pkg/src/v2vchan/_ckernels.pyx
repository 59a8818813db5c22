# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, tan, floor, sqrt, M_PI

cnp.import_array()

cdef double SNAP = 1e-15  # see _pykernels.SNAP


cdef inline double _sin_pi_offset(long j, double f) nogil:
    cdef double r = f if f <= 0.5 else 1.0 - f
    if j % 2 == 0:
        return -sin(M_PI * r)
    return sin(M_PI * r)


def accumulate_lanczos(double complex[:, ::1] out, const double[:, ::1] x,
                       const double complex[:, ::1] g, int support):
    cdef Py_ssize_t n = out.shape[0], m = out.shape[1], npath = x.shape[1]
    cdef Py_ssize_t i, l
    cdef long j, b, base
    cdef double f, d, w, a = support
    cdef double complex gain
    with nogil:
        for i in range(n):
            for l in range(npath):
                gain = g[i, l]
                if gain == 0:
                    continue
                base = <long>floor(x[i, l])
                f = x[i, l] - base
                if f < SNAP:
                    b = base % m
                    if b < 0:
                        b += m
                    out[i, b] += gain
                    continue
                for j in range(1 - support, support + 1):
                    d = j - f
                    w = (_sin_pi_offset(j, f) / (M_PI * d)) * (sin(M_PI * d / a) / (M_PI * d / a))
                    b = (base + j) % m
                    if b < 0:
                        b += m
                    out[i, b] += gain * w


def accumulate_dirichlet(double complex[:, ::1] out, const double[:, ::1] x,
                         const double complex[:, ::1] g):
    cdef Py_ssize_t n = out.shape[0], m = out.shape[1], npath = x.shape[1]
    cdef Py_ssize_t i, l, k
    cdef long j, base, half = m // 2
    cdef double f, d, w
    cdef double complex gain
    cdef bint odd = m % 2
    with nogil:
        for i in range(n):
            for l in range(npath):
                gain = g[i, l]
                if gain == 0:
                    continue
                base = <long>floor(x[i, l])
                f = x[i, l] - base
                if f < SNAP:
                    f = 0.0
                for k in range(m):
                    j = ((k - base + half) % m + m) % m - half
                    d = j - f
                    if d == 0.0:
                        w = 1.0
                    elif odd:
                        w = _sin_pi_offset(j, f) / (m * sin(M_PI * d / m))
                    else:
                        w = _sin_pi_offset(j, f) / (m * tan(M_PI * d / m))
                    out[i, k] += gain * w


def row_spread(power, axis):
    cdef const double[:, ::1] p = np.ascontiguousarray(power, dtype=np.float64)
    cdef const double[::1] a = np.ascontiguousarray(axis, dtype=np.float64)
    cdef Py_ssize_t rows = p.shape[0], cols = p.shape[1], i, k
    sigma_arr = np.zeros(rows, dtype=np.float64)
    total_arr = np.zeros(rows, dtype=np.float64)
    cdef double[::1] sigma = sigma_arr
    cdef double[::1] total = total_arr
    cdef double t, mu, var, dev
    with nogil:
        for i in range(rows):
            t = 0.0
            mu = 0.0
            for k in range(cols):
                t += p[i, k]
                mu += p[i, k] * a[k]
            total[i] = t
            if t <= 0.0:
                continue
            mu /= t
            var = 0.0
            for k in range(cols):
                dev = a[k] - mu
                var += p[i, k] * dev * dev
            var /= t
            sigma[i] = sqrt(var) if var > 0.0 else 0.0
    return sigma_arr, total_arr
