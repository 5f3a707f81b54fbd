# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels (same contracts as ``_kernels_py``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log2, sqrt

cnp.import_array()

cdef double DISCRIMINANT_ULPS = 32.0


def block_moments(data, Py_ssize_t n_blocks):
    cdef const double[:, ::1] x = np.ascontiguousarray(data, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k = x.shape[1]
    cdef Py_ssize_t size = n // n_blocks
    if size < 2:
        raise ValueError("each block needs at least two samples")

    means_arr = np.zeros((n_blocks, k), dtype=np.float64)
    covs_arr = np.zeros((n_blocks, k, k), dtype=np.float64)
    cdef double[:, ::1] means = means_arr
    cdef double[:, :, ::1] covs = covs_arr
    cdef double[::1] dev = np.empty(k, dtype=np.float64)
    cdef Py_ssize_t b, s, i, j, start
    cdef double norm = 1.0 / (size - 1)

    with nogil:
        for b in range(n_blocks):
            start = b * size
            for s in range(start, start + size):
                for i in range(k):
                    means[b, i] += x[s, i]
            for i in range(k):
                means[b, i] /= size
            for s in range(start, start + size):
                for i in range(k):
                    dev[i] = x[s, i] - means[b, i]
                for i in range(k):
                    for j in range(i, k):
                        covs[b, i, j] += dev[i] * dev[j]
            for i in range(k):
                for j in range(i, k):
                    covs[b, i, j] *= norm
                    covs[b, j, i] = covs[b, i, j]
    return means_arr, covs_arr


def entropy_g(nu):
    cdef const double[::1] v = np.ascontiguousarray(nu, dtype=np.float64).ravel()
    out_arr = np.empty(v.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double a, plus, minus
    with nogil:
        for i in range(v.shape[0]):
            a = v[i] if v[i] > 1.0 else 1.0
            plus = (a + 1.0) / 2.0
            minus = (a - 1.0) / 2.0
            out[i] = plus * log2(plus)
            if minus > 0.0:
                out[i] -= minus * log2(minus)
    return out_arr


def one_mode_nu(covs):
    cdef const double[:, :, ::1] c = np.ascontiguousarray(covs, dtype=np.float64)
    out_arr = np.empty(c.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t m
    cdef double det
    with nogil:
        for m in range(c.shape[0]):
            det = c[m, 0, 0] * c[m, 1, 1] - c[m, 0, 1] * c[m, 1, 0]
            out[m] = sqrt(det) if det > 0.0 else 0.0
    return out_arr


cdef inline double _det4(const double[:, :, ::1] c, Py_ssize_t m) noexcept nogil:
    # Laplace expansion along the first two rows (2x2 minors).
    cdef double s0 = c[m, 0, 0] * c[m, 1, 1] - c[m, 1, 0] * c[m, 0, 1]
    cdef double s1 = c[m, 0, 0] * c[m, 1, 2] - c[m, 1, 0] * c[m, 0, 2]
    cdef double s2 = c[m, 0, 0] * c[m, 1, 3] - c[m, 1, 0] * c[m, 0, 3]
    cdef double s3 = c[m, 0, 1] * c[m, 1, 2] - c[m, 1, 1] * c[m, 0, 2]
    cdef double s4 = c[m, 0, 1] * c[m, 1, 3] - c[m, 1, 1] * c[m, 0, 3]
    cdef double s5 = c[m, 0, 2] * c[m, 1, 3] - c[m, 1, 2] * c[m, 0, 3]
    cdef double c5 = c[m, 2, 2] * c[m, 3, 3] - c[m, 3, 2] * c[m, 2, 3]
    cdef double c4 = c[m, 2, 1] * c[m, 3, 3] - c[m, 3, 1] * c[m, 2, 3]
    cdef double c3 = c[m, 2, 1] * c[m, 3, 2] - c[m, 3, 1] * c[m, 2, 2]
    cdef double c2 = c[m, 2, 0] * c[m, 3, 3] - c[m, 3, 0] * c[m, 2, 3]
    cdef double c1 = c[m, 2, 0] * c[m, 3, 2] - c[m, 3, 0] * c[m, 2, 2]
    cdef double c0 = c[m, 2, 0] * c[m, 3, 1] - c[m, 3, 0] * c[m, 2, 1]
    return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0


def two_mode_spectra(covs):
    cdef const double[:, :, ::1] c = np.ascontiguousarray(covs, dtype=np.float64)
    cdef Py_ssize_t count = c.shape[0]
    nu_plus_arr = np.empty(count, dtype=np.float64)
    nu_minus_arr = np.empty(count, dtype=np.float64)
    ppt_arr = np.empty(count, dtype=np.float64)
    cdef double[::1] nu_plus = nu_plus_arr
    cdef double[::1] nu_minus = nu_minus_arr
    cdef double[::1] ppt = ppt_arr
    cdef Py_ssize_t m, i, j
    cdef double det_a, det_b, det_c, det_v, delta, gamma, rd, rg, t, big, scale, floor
    cdef double eps = np.finfo(np.float64).eps
    with nogil:
        for m in range(count):
            scale = 0.0
            for i in range(4):
                for j in range(4):
                    if fabs(c[m, i, j]) > scale:
                        scale = fabs(c[m, i, j])
            floor = DISCRIMINANT_ULPS * eps * scale * scale * scale * scale
            det_a = c[m, 0, 0] * c[m, 1, 1] - c[m, 0, 1] * c[m, 1, 0]
            det_b = c[m, 2, 2] * c[m, 3, 3] - c[m, 2, 3] * c[m, 3, 2]
            det_c = c[m, 0, 2] * c[m, 1, 3] - c[m, 0, 3] * c[m, 1, 2]
            det_v = _det4(c, m)
            delta = det_a + det_b + 2.0 * det_c
            gamma = det_a + det_b - 2.0 * det_c
            t = delta * delta - 4.0 * det_v
            rd = sqrt(t) if t > floor else 0.0
            t = gamma * gamma - 4.0 * det_v
            rg = sqrt(t) if t > floor else 0.0
            if det_v < 0.0:
                det_v = 0.0
            big = (delta + rd) / 2.0
            if big > 0.0:
                nu_plus[m] = sqrt(big)
                nu_minus[m] = sqrt(det_v / big)
            else:
                nu_plus[m] = 0.0
                nu_minus[m] = 0.0
            big = (gamma + rg) / 2.0
            ppt[m] = sqrt(det_v / big) if big > 0.0 else 0.0
    return nu_plus_arr, nu_minus_arr, ppt_arr
