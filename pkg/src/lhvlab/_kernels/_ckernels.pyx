# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the sampling kernels; semantics mirror _pykernels."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def abs2_overlaps(const double complex[:, ::1] lam, const double complex[:, ::1] vecs):
    cdef Py_ssize_t n = lam.shape[0], d = lam.shape[1], k = vecs.shape[0]
    cdef Py_ssize_t i, j, t
    cdef double re, im, vr, vi, lr, li
    out = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            for j in range(k):
                re = 0.0
                im = 0.0
                for t in range(d):
                    vr = vecs[j, t].real
                    vi = vecs[j, t].imag
                    lr = lam[i, t].real
                    li = lam[i, t].imag
                    # conj(v) * lam
                    re = re + vr * lr + vi * li
                    im = im + vr * li - vi * lr
                o[i, j] = re * re + im * im
    return out


def sample_categorical(const double[:, :] probs, const double[:] u):
    cdef Py_ssize_t n = probs.shape[0], k = probs.shape[1]
    cdef Py_ssize_t i, j
    cdef double c
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[:] o = out
    with nogil:
        for i in range(n):
            c = 0.0
            j = 0
            while j < k:
                c = c + probs[i, j]
                if c > u[i]:
                    break
                j = j + 1
            o[i] = j
    return out


def argext_onehot(const double[:, :] x, bint maximize):
    cdef Py_ssize_t n = x.shape[0], k = x.shape[1]
    cdef Py_ssize_t i, j, best
    out = np.zeros((n, k), dtype=np.float64)
    cdef double[:, :] o = out
    with nogil:
        for i in range(n):
            best = 0
            for j in range(1, k):
                if maximize:
                    if x[i, j] > x[i, best]:
                        best = j
                elif x[i, j] < x[i, best]:
                    best = j
            o[i, best] = 1.0
    return out


def joint_histogram(const cnp.int64_t[:, :] idx, shape):
    cdef Py_ssize_t n = idx.shape[0], m = idx.shape[1]
    cdef Py_ssize_t i, j, flat
    dims = np.asarray(shape, dtype=np.int64)
    cdef cnp.int64_t[:] dv = dims
    total = int(np.prod(dims))
    counts = np.zeros(total, dtype=np.int64)
    cdef cnp.int64_t[:] c = counts
    with nogil:
        for i in range(n):
            flat = 0
            for j in range(m):
                flat = flat * dv[j] + idx[i, j]
            c[flat] += 1
    return counts.reshape(tuple(shape))


def simplex_moments(const double[:, :] e):
    cdef Py_ssize_t n = e.shape[0], d = e.shape[1]
    cdef Py_ssize_t i, j
    cdef double s, u1, mn, mx, v, inv_d = 1.0 / d
    cdef double acc[4][2]
    cdef double vals[4]
    for j in range(4):
        acc[j][0] = 0.0
        acc[j][1] = 0.0
    with nogil:
        for i in range(n):
            s = 0.0
            for j in range(d):
                s = s + e[i, j]
            u1 = e[i, 0] / s
            mn = 2.0
            mx = -1.0
            for j in range(1, d):
                v = e[i, j] / s
                if v < mn:
                    mn = v
                if v > mx:
                    mx = v
            vals[0] = u1 if u1 <= mn else 0.0
            vals[1] = u1 if u1 >= inv_d else 0.0
            vals[2] = u1 * u1 if u1 >= inv_d else 0.0
            vals[3] = u1 if u1 >= mx else 0.0
            for j in range(4):
                acc[j][0] += vals[j]
                acc[j][1] += vals[j] * vals[j]
    out = np.empty((4, 2), dtype=np.float64)
    for j in range(4):
        out[j, 0] = acc[j][0]
        out[j, 1] = acc[j][1]
    return out
