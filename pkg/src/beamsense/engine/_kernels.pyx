# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled data-movement kernels: im2col / col2im / 2x2 max pooling."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

NAME = "cython"


def im2col(cnp.ndarray x_arr, int kh, int kw):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef int n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef int oh = h - kh + 1, ow = w - kw + 1
    out_arr = np.empty((n * oh * ow, c * kh * kw), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t b, ci, i, j, ki, kj, row, col
    for b in range(n):
        for i in range(oh):
            for j in range(ow):
                row = (b * oh + i) * ow + j
                col = 0
                for ci in range(c):
                    for ki in range(kh):
                        for kj in range(kw):
                            out[row, col] = x[b, ci, i + ki, j + kj]
                            col += 1
    return out_arr


def col2im(cnp.ndarray cols_arr, int n, int c, int h, int w, int kh, int kw):
    cdef double[:, ::1] cols = np.ascontiguousarray(cols_arr, dtype=np.float64)
    cdef int oh = h - kh + 1, ow = w - kw + 1
    out_arr = np.zeros((n, c, h, w), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, ci, i, j, ki, kj, row, col
    for b in range(n):
        for i in range(oh):
            for j in range(ow):
                row = (b * oh + i) * ow + j
                col = 0
                for ci in range(c):
                    for ki in range(kh):
                        for kj in range(kw):
                            out[b, ci, i + ki, j + kj] += cols[row, col]
                            col += 1
    return out_arr


def maxpool2_forward(cnp.ndarray x_arr):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef int n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef int h2 = h // 2, w2 = w // 2
    out_arr = np.empty((n, c, h2, w2), dtype=np.float64)
    arg_arr = np.empty((n, c, h2, w2), dtype=np.int64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef long long[:, :, :, ::1] arg = arg_arr
    cdef Py_ssize_t b, ci, i, j, k
    cdef double best, v
    cdef long long besta
    for b in range(n):
        for ci in range(c):
            for i in range(h2):
                for j in range(w2):
                    best = x[b, ci, 2 * i, 2 * j]
                    besta = 0
                    for k in range(1, 4):
                        v = x[b, ci, 2 * i + k // 2, 2 * j + k % 2]
                        if v > best:
                            best = v
                            besta = k
                    out[b, ci, i, j] = best
                    arg[b, ci, i, j] = besta
    return out_arr, arg_arr


def maxpool2_backward(cnp.ndarray grad_arr, cnp.ndarray arg_arr, int h, int w):
    cdef double[:, :, :, ::1] g = np.ascontiguousarray(grad_arr, dtype=np.float64)
    cdef long long[:, :, :, ::1] arg = np.ascontiguousarray(arg_arr, dtype=np.int64)
    cdef int n = g.shape[0], c = g.shape[1], h2 = g.shape[2], w2 = g.shape[3]
    out_arr = np.zeros((n, c, h, w), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, ci, i, j
    cdef long long a
    for b in range(n):
        for ci in range(c):
            for i in range(h2):
                for j in range(w2):
                    a = arg[b, ci, i, j]
                    out[b, ci, 2 * i + a // 2, 2 * j + a % 2] = g[b, ci, i, j]
    return out_arr
