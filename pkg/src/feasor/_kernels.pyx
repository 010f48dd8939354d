# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled segment projectors.

A *layout* is a flat index array ``idx`` plus ``offsets`` delimiting
disjoint segments; segment ``s`` is ``idx[offsets[s]:offsets[s+1]]`` in
order.  Entries of ``x`` outside every segment are copied unchanged.
"""

from libc.stdlib cimport malloc, free

import numpy as np


def segment_sums(const double[::1] x, const Py_ssize_t[::1] idx,
                 const Py_ssize_t[::1] offsets, double m, bint at_most):
    """Project every segment onto ``{sum = m}`` (or ``{sum <= m}``)."""
    cdef Py_ssize_t nseg = offsets.shape[0] - 1
    cdef Py_ssize_t s, j, a, b
    cdef double total, shift
    out_arr = np.array(x, dtype=np.float64, copy=True)
    cdef double[::1] out = out_arr
    for s in range(nseg):
        a = offsets[s]
        b = offsets[s + 1]
        total = 0.0
        for j in range(a, b):
            total += x[idx[j]]
        shift = (m - total) / (b - a)
        if at_most and shift > 0.0:
            shift = 0.0
        for j in range(a, b):
            out[idx[j]] = x[idx[j]] + shift
    return out_arr


def segment_binary(const double[::1] x, const Py_ssize_t[::1] idx,
                   const Py_ssize_t[::1] offsets, Py_ssize_t m, bint at_most):
    """Nearest 0/1 vector with exactly (or at most) ``m`` ones per segment.

    Ones go to the ``m`` largest entries; among equal values the later
    position wins.  With ``at_most`` a selected entry is kept only if it
    exceeds 0.5.
    """
    cdef Py_ssize_t nseg = offsets.shape[0] - 1
    cdef Py_ssize_t s, j, a, b, c, i, cap
    cdef double v
    out_arr = np.array(x, dtype=np.float64, copy=True)
    cdef double[::1] out = out_arr
    if m <= 0:
        for s in range(nseg):
            for j in range(offsets[s], offsets[s + 1]):
                out[idx[j]] = 0.0
        return out_arr
    cdef double *bv = <double *> malloc(m * sizeof(double))
    cdef Py_ssize_t *bp = <Py_ssize_t *> malloc(m * sizeof(Py_ssize_t))
    if bv == NULL or bp == NULL:
        free(bv)
        free(bp)
        raise MemoryError()
    try:
        for s in range(nseg):
            a = offsets[s]
            b = offsets[s + 1]
            cap = m if m < b - a else b - a
            c = 0
            # bv/bp hold the current winners in ascending (value, position)
            for j in range(a, b):
                v = x[idx[j]]
                out[idx[j]] = 0.0
                if c < cap:
                    i = c
                    c += 1
                elif v >= bv[0]:
                    i = 0
                    while i + 1 < c and v >= bv[i + 1]:
                        bv[i] = bv[i + 1]
                        bp[i] = bp[i + 1]
                        i += 1
                    bv[i] = v
                    bp[i] = j
                    continue
                else:
                    continue
                while i > 0 and v < bv[i - 1]:
                    bv[i] = bv[i - 1]
                    bp[i] = bp[i - 1]
                    i -= 1
                bv[i] = v
                bp[i] = j
            for i in range(c):
                if not at_most or bv[i] > 0.5:
                    out[idx[bp[i]]] = 1.0
    finally:
        free(bv)
        free(bp)
    return out_arr
