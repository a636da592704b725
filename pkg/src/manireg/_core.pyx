# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: subset enumeration, sweep scans, kNN selection.

Mirrors ``_purecore``; see there for the contracts.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline int _ctz(unsigned long long x) nogil:
    cdef int c = 0
    while (x & 1ULL) == 0:
        x >>= 1
        c += 1
    return c


def cheeger_enumerate(W):
    cdef const double[:, ::1] w = np.ascontiguousarray(W, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t m = n - 1
    cdef double[::1] deg = np.ascontiguousarray(np.asarray(w).sum(1))
    cdef double[::1] conn = np.zeros(n)
    cdef unsigned char[::1] ins = np.zeros(n, dtype=np.uint8)
    cdef unsigned long long total = 1ULL << m
    cdef unsigned long long i, gray = 0, best_mask = 0
    cdef double boundary = 0.0, ratio, best_ratio = 1e308, best_boundary = 0.0
    cdef long size = 0, best_size = 0, denom
    cdef Py_ssize_t v, u
    with nogil:
        for i in range(1, total):
            v = _ctz(i)
            gray ^= (1ULL << v)
            if ins[v]:
                for u in range(n):
                    conn[u] -= w[u, v]
                boundary -= deg[v] - 2.0 * conn[v]
                ins[v] = 0
                size -= 1
            else:
                boundary += deg[v] - 2.0 * conn[v]
                for u in range(n):
                    conn[u] += w[u, v]
                ins[v] = 1
                size += 1
            denom = size if size < n - size else n - size
            ratio = boundary / denom
            if ratio < best_ratio or (ratio == best_ratio and gray < best_mask):
                best_ratio = ratio
                best_boundary = boundary
                best_size = size
                best_mask = gray
    return best_boundary, int(best_size), int(best_mask)


def sweep_scan(W, order):
    cdef const double[:, ::1] w = np.ascontiguousarray(W, dtype=np.float64)
    cdef const Py_ssize_t[::1] o = np.ascontiguousarray(order, dtype=np.intp)
    cdef Py_ssize_t n = w.shape[0]
    cdef double[::1] conn = np.zeros(n)
    cdef double[::1] deg = np.ascontiguousarray(np.asarray(w).sum(1))
    out = np.empty(n - 1)
    cdef double[::1] bnd = out
    cdef double b = 0.0, ratio, best = 1e308
    cdef Py_ssize_t i, u, v, best_i = 1, denom
    with nogil:
        for i in range(n - 1):
            v = o[i]
            b += deg[v] - 2.0 * conn[v]
            for u in range(n):
                conn[u] += w[u, v]
            bnd[i] = b
            denom = i + 1 if i + 1 < n - i - 1 else n - i - 1
            ratio = b / denom
            if ratio < best:
                best = ratio
                best_i = i + 1
    return int(best_i), out


def knn_select(D2, Py_ssize_t k):
    cdef const double[:, ::1] d = np.ascontiguousarray(D2, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    idx = np.empty((n, k), dtype=np.intp)
    cdef Py_ssize_t[:, ::1] out = idx
    cdef double[::1] bd = np.empty(k)
    cdef Py_ssize_t i, j, p, filled
    cdef double x
    with nogil:
        for i in range(n):
            filled = 0
            for j in range(n):
                if j == i:
                    continue
                x = d[i, j]
                if filled == k and x >= bd[k - 1]:
                    continue
                # insertion keeps earlier (lower) indices ahead on equal distance
                p = filled if filled < k else k - 1
                while p > 0 and bd[p - 1] > x:
                    if p < k:
                        bd[p] = bd[p - 1]
                        out[i, p] = out[i, p - 1]
                    p -= 1
                bd[p] = x
                out[i, p] = j
                if filled < k:
                    filled += 1
    return idx
