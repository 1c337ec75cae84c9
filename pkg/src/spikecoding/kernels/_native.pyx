# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels, mirroring ``_pure`` operation for operation.

Floating point recurrences keep the exact operation order of the pure
backend so both produce bit identical output.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def isc_encode(z_in, double gain, uniforms_in):
    cdef double[::1] z = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef double[::1] u = np.ascontiguousarray(uniforms_in, dtype=np.float64)
    cdef Py_ssize_t n = z.shape[0]
    out = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] w = out
    cdef Py_ssize_t t
    for t in range(n):
        if u[t] < z[t] * gain:
            w[t] = 1
    return out


def sod_encode(z_in, double delta):
    cdef double[::1] z = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef Py_ssize_t n = z.shape[0]
    out = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] w = out
    if n == 0:
        return out
    cdef double z0 = z[0]
    cdef long long count = 0
    cdef double baseline
    cdef Py_ssize_t t
    for t in range(1, n):
        baseline = z0 + count * delta
        if z[t] - baseline > delta:
            w[t] = 1
            count += 1
        elif z[t] - baseline < -delta:
            w[t] = -1
            count -= 1
    return out


def bsa_encode(z_in, taps_in, double theta):
    cdef double[::1] z = np.array(z_in, dtype=np.float64)  # private copy
    cdef double[::1] taps = np.ascontiguousarray(taps_in, dtype=np.float64)
    cdef Py_ssize_t m = taps.shape[0]
    cdef Py_ssize_t n = z.shape[0]
    out = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] w = out
    cdef Py_ssize_t t, k
    cdef double err_sub, err_keep, v
    for t in range(m - 1, n):
        err_sub = 0.0
        err_keep = 0.0
        for k in range(m):
            v = z[t - k]
            err_sub += fabs(v - taps[m - 1 - k])
            err_keep += fabs(v)
        if err_sub <= err_keep - theta:
            w[t] = 1
            for k in range(m):
                z[t - k] -= taps[m - 1 - k]
    return out


def lif_encode(z_in, double decay, double theta):
    cdef double[::1] z = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef Py_ssize_t n = z.shape[0]
    out = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] w = out
    if n == 0:
        return out
    cdef double u = z[0]
    cdef Py_ssize_t t
    for t in range(n):
        u = u * decay + z[t]
        if u >= theta:
            w[t] = 1
            u = 0.0
    return out


def delay_block_counts(x_in, w_in, Py_ssize_t n_x, Py_ssize_t n_w,
                       Py_ssize_t delay, Py_ssize_t skip_x, Py_ssize_t skip_w,
                       Py_ssize_t n_blocks):
    cdef cnp.int64_t[::1] x = np.ascontiguousarray(x_in, dtype=np.int64)
    cdef cnp.int64_t[::1] w = np.ascontiguousarray(w_in, dtype=np.int64)
    out = np.zeros((n_blocks, n_x, n_w), dtype=np.int64)
    cdef cnp.int64_t[:, :, ::1] counts = out
    cdef Py_ssize_t t_lo = skip_w if skip_w > skip_x - delay else skip_x - delay
    cdef Py_ssize_t t_hi = w.shape[0]
    if x.shape[0] - delay < t_hi:
        t_hi = x.shape[0] - delay
    cdef Py_ssize_t size = (t_hi - t_lo) // n_blocks if t_hi > t_lo else 0
    if size <= 0:
        return out
    cdef Py_ssize_t b, i, t
    for b in range(n_blocks):
        for i in range(size):
            t = t_lo + b * size + i
            counts[b, x[t + delay], w[t]] += 1
    return out
