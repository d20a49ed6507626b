# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as ``_core_py``."""

from libc.math cimport sqrt, fabs


cdef int _one(double[:, ::1] w, double[:, ::1] v,
              const long[::1] pp, const long[::1] qq,
              double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t m = w.shape[1]
    cdef Py_ssize_t n = v.shape[1]
    cdef Py_ssize_t npairs = pp.shape[0]
    cdef Py_ssize_t k, i, p, q
    cdef double alpha, beta, gamma, zeta, t, c, s, a, b
    cdef int sweeps = 0
    cdef bint rotated
    while sweeps < max_sweeps:
        sweeps += 1
        rotated = False
        for k in range(npairs):
            p = pp[k]
            q = qq[k]
            alpha = 0.0
            beta = 0.0
            gamma = 0.0
            for i in range(m):
                a = w[p, i]
                b = w[q, i]
                alpha += a * a
                beta += b * b
                gamma += a * b
            if gamma == 0.0 or fabs(gamma) <= tol * sqrt(alpha * beta):
                continue
            rotated = True
            zeta = (beta - alpha) / (2.0 * gamma)
            t = (1.0 if zeta >= 0.0 else -1.0) / (fabs(zeta) + sqrt(1.0 + zeta * zeta))
            c = 1.0 / sqrt(1.0 + t * t)
            s = c * t
            for i in range(m):
                a = w[p, i]
                b = w[q, i]
                w[p, i] = c * a - s * b
                w[q, i] = s * a + c * b
            for i in range(n):
                a = v[p, i]
                b = v[q, i]
                v[p, i] = c * a - s * b
                v[q, i] = s * a + c * b
        if not rotated:
            break
    return sweeps


def jacobi_sweeps(double[:, :, ::1] wt, double[:, :, ::1] vt,
                  const long[::1] pairs_p, const long[::1] pairs_q,
                  Py_ssize_t round_len, double tol, int max_sweeps):
    cdef Py_ssize_t b
    cdef int used, worst = 0
    if pairs_p.shape[0] == 0:
        return 0
    with nogil:
        for b in range(wt.shape[0]):
            used = _one(wt[b], vt[b], pairs_p, pairs_q, tol, max_sweeps)
            if used > worst:
                worst = used
    return worst


def fnv1a64_update(unsigned long long h, const unsigned char[::1] data):
    cdef Py_ssize_t i
    cdef unsigned long long prime = 0x100000001B3ULL
    with nogil:
        for i in range(data.shape[0]):
            h = (h ^ data[i]) * prime
    return h
