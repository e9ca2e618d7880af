# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan kernel: fused inclusion-exclusion sums, contrasts, and norms.

Mirrors ``_scan_np.window_norms`` box for box, accumulating the 2^d signed
corner values in the same order, and releases the GIL so calibration
replications can scan in parallel threads.
"""

from libc.math cimport fabs, sqrt, pow, isinf
from libc.stdlib cimport malloc, free

import numpy as np


def window_norms(cums, origins, sizes, total_vol, p, want_l=False):
    """See ``fieldscan._scan_np.window_norms`` for the contract."""
    cdef double[::1] flat = np.ascontiguousarray(cums, dtype=np.float64).reshape(-1)
    cdef long long[:, ::1] org = np.ascontiguousarray(origins, dtype=np.int64)
    cdef long long[:, ::1] siz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef Py_ssize_t n_windows = org.shape[0]
    cdef Py_ssize_t d = org.shape[1]
    cdef Py_ssize_t n = cums.shape[len(cums.shape) - 1]

    # site-axis strides of the padded table, in units of float64
    strides_np = np.empty(d, dtype=np.int64)
    cdef Py_ssize_t axis
    stride = n
    for axis in range(d - 1, -1, -1):
        strides_np[axis] = stride
        stride *= cums.shape[axis]
    cdef long long[::1] strides = strides_np

    norms_np = np.empty(n_windows, dtype=np.float64)
    cdef double[::1] norms = norms_np
    contrasts_np = np.empty((n_windows, n), dtype=np.float64) if want_l else None
    cdef double[:, ::1] contrasts = contrasts_np if want_l else None

    cdef double total_volume = <double> total_vol
    cdef double p_val = <double> p
    cdef bint p_inf = isinf(p_val)
    cdef bint keep_l = 1 if want_l else 0

    # component totals sit at the all-upper corner of the padded table
    cdef Py_ssize_t tot_off = flat.shape[0] - n

    cdef double *acc = <double *> malloc(n * sizeof(double))
    if acc == NULL:
        raise MemoryError()

    cdef Py_ssize_t b, c, comp, corner_count
    cdef long long corner, coord, off
    cdef double vol_in, vol_out, sign, val, norm, best
    corner_count = 1 << d

    try:
        with nogil:
            for b in range(n_windows):
                for comp in range(n):
                    acc[comp] = 0.0
                vol_in = 1.0
                for axis in range(d):
                    vol_in *= <double> siz[b, axis]
                vol_out = total_volume - vol_in
                for corner in range(corner_count):
                    off = 0
                    sign = 1.0 if (d - _popcount(corner)) % 2 == 0 else -1.0
                    for axis in range(d):
                        coord = org[b, axis]
                        if (corner >> axis) & 1:
                            coord += siz[b, axis]
                        off += coord * strides[axis]
                    for comp in range(n):
                        acc[comp] += sign * flat[off + comp]
                norm = 0.0
                best = 0.0
                for comp in range(n):
                    val = acc[comp] / vol_in \
                        - (flat[tot_off + comp] - acc[comp]) / vol_out
                    if keep_l:
                        contrasts[b, comp] = val
                    val = fabs(val)
                    if p_inf:
                        if val > best:
                            best = val
                    elif p_val == 1.0:
                        norm += val
                    elif p_val == 2.0:
                        norm += val * val
                    else:
                        norm += pow(val, p_val)
                if p_inf:
                    norms[b] = best
                elif p_val == 1.0:
                    norms[b] = norm
                elif p_val == 2.0:
                    norms[b] = sqrt(norm)
                else:
                    norms[b] = pow(norm, 1.0 / p_val)
    finally:
        free(acc)

    return norms_np, contrasts_np


cdef inline int _popcount(long long v) noexcept nogil:
    cdef int count = 0
    while v:
        count += v & 1
        v >>= 1
    return count
