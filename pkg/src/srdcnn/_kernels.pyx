# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: same-padded 1D convolution and banded DTW.

Convolution is im2col in C followed by BLAS ``dgemm`` per batch item;
DTW is a banded two-row dynamic program.

Every function mirrors the numpy version in ``_fallback.py`` argument for
argument. Reductions run in a fixed loop order so results are reproducible.
"""

import numpy as np
from libc.math cimport INFINITY
from scipy.linalg.cython_blas cimport dgemm


cdef inline void _gemm(bint trans_a, bint trans_b, int m, int n, int k,
                       const double* a, const double* b, double beta,
                       double* c) noexcept nogil:
    # row-major C[m, n] = op(A) @ op(B) + beta * C, via column-major BLAS on
    # the transposed problem
    cdef char ta = b'T' if trans_b else b'N'
    cdef char tb = b'T' if trans_a else b'N'
    cdef int lda = k if trans_b else n
    cdef int ldb = m if trans_a else k
    cdef double one = 1.0
    dgemm(&ta, &tb, &n, &m, &k, &one, <double*>b, &lda, <double*>a, &ldb,
          &beta, c, &n)


cdef void _im2col(const double[:, ::1] x, Py_ssize_t K, double* cols) noexcept nogil:
    # x: [Cin, T] -> cols: [Cin * K, T], zero outside the padded window
    cdef Py_ssize_t Cin = x.shape[0], T = x.shape[1]
    cdef Py_ssize_t pl = (K - 1) // 2
    cdef Py_ssize_t c, k, t, shift, lo, hi
    cdef double* row
    for c in range(Cin):
        for k in range(K):
            row = cols + (c * K + k) * T
            shift = k - pl
            lo = 0 if shift >= 0 else -shift
            hi = T - shift if shift > 0 else T
            for t in range(lo):
                row[t] = 0.0
            for t in range(lo, hi):
                row[t] = x[c, t + shift]
            for t in range(hi, T):
                row[t] = 0.0


def conv1d_forward(const double[:, :, ::1] x, const double[:, :, ::1] w,
                   const double[::1] bias):
    cdef Py_ssize_t B = x.shape[0], Cin = x.shape[1], T = x.shape[2]
    cdef Py_ssize_t Cout = w.shape[0], K = w.shape[2]
    cdef Py_ssize_t b, o, t
    out_arr = np.empty((B, Cout, T), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef double[::1] cols = np.empty(Cin * K * T, dtype=np.float64)
    with nogil:
        for b in range(B):
            for o in range(Cout):
                for t in range(T):
                    out[b, o, t] = bias[o]
            _im2col(x[b], K, &cols[0])
            _gemm(False, False, Cout, T, Cin * K, &w[0, 0, 0], &cols[0], 1.0,
                  &out[b, 0, 0])
    return out_arr


def conv1d_backward(const double[:, :, ::1] x, const double[:, :, ::1] w,
                    const double[:, :, ::1] grad_out):
    cdef Py_ssize_t B = x.shape[0], Cin = x.shape[1], T = x.shape[2]
    cdef Py_ssize_t Cout = w.shape[0], K = w.shape[2]
    cdef Py_ssize_t pl = (K - 1) // 2
    cdef Py_ssize_t b, o, c, k, t, lo, hi, shift
    cdef double acc
    gx_arr = np.zeros((B, Cin, T), dtype=np.float64)
    gw_arr = np.zeros((Cout, Cin, K), dtype=np.float64)
    gb_arr = np.empty(Cout, dtype=np.float64)
    cdef double[:, :, ::1] gx = gx_arr
    cdef double[:, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef double[::1] cols = np.empty(Cin * K * T, dtype=np.float64)
    cdef double[::1] gcols = np.empty(Cin * K * T, dtype=np.float64)
    cdef double* row
    with nogil:
        for o in range(Cout):
            acc = 0.0
            for b in range(B):
                for t in range(T):
                    acc = acc + grad_out[b, o, t]
            gb[o] = acc
        for b in range(B):
            _im2col(x[b], K, &cols[0])
            # grad_w += g_b @ cols_b^T, accumulated in batch order
            _gemm(False, True, Cout, Cin * K, T, &grad_out[b, 0, 0], &cols[0],
                  1.0, &gw[0, 0, 0])
            # col2im of W^T @ g_b
            _gemm(True, False, Cin * K, T, Cout, &w[0, 0, 0], &grad_out[b, 0, 0],
                  0.0, &gcols[0])
            for c in range(Cin):
                for k in range(K):
                    row = &gcols[(c * K + k) * T]
                    shift = k - pl
                    lo = 0 if shift >= 0 else -shift
                    hi = T - shift if shift > 0 else T
                    for t in range(lo, hi):
                        gx[b, c, t + shift] += row[t]
    return gx_arr, gw_arr, gb_arr


cdef double _dtw(const double[::1] a, const double[::1] b, Py_ssize_t band,
                 double* prev, double* cur) noexcept nogil:
    # prev/cur hold len(b) + 1 cells; column 0 is the virtual boundary
    cdef Py_ssize_t m = a.shape[0], n = b.shape[0]
    cdef Py_ssize_t i, j, jlo, jhi
    cdef double d, best
    cdef double* tmp
    for j in range(n + 1):
        prev[j] = INFINITY
    prev[0] = 0.0
    for i in range(1, m + 1):
        for j in range(n + 1):
            cur[j] = INFINITY
        jlo = i - band if i - band > 1 else 1
        jhi = i + band if i + band < n else n
        for j in range(jlo, jhi + 1):
            d = a[i - 1] - b[j - 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = d * d + best
        tmp = prev
        prev = cur
        cur = tmp
    return prev[n]


def dtw_distance(const double[::1] a, const double[::1] b, Py_ssize_t band):
    cdef double[::1] buf = np.empty(2 * (b.shape[0] + 1), dtype=np.float64)
    cdef double out
    with nogil:
        out = _dtw(a, b, band, &buf[0], &buf[b.shape[0] + 1])
    return out


def dtw_many(const double[::1] query, const double[:, ::1] refs, Py_ssize_t band):
    cdef Py_ssize_t r, N = refs.shape[0]
    cdef Py_ssize_t n1 = refs.shape[1] + 1
    cdef double[::1] buf = np.empty(2 * n1, dtype=np.float64)
    out_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for r in range(N):
            out[r] = _dtw(query, refs[r], band, &buf[0], &buf[n1])
    return out_arr
