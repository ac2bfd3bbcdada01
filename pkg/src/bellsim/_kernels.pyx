# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernel.

Same slot layout and arithmetic as ``bellsim._fallback``; complex products are
spelled out in real arithmetic so both kernels round identically.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, cos, sin
from libc.stdint cimport uint64_t

cnp.import_array()

NAME = "cython"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef uint64_t SEED_SALT = 0x2545F4914F6CDD1DULL
cdef double U53 = 1.1102230246251565e-16
cdef double TWO_PI = 6.283185307179586


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline double uniform(uint64_t key, uint64_t slot) noexcept nogil:
    cdef uint64_t bits = mix64(key + (slot + 1) * GOLDEN)
    return (<double>(bits >> 11) + 0.5) * U53


cdef inline double gamma_int(uint64_t key, uint64_t slot, int shape) noexcept nogil:
    cdef double total = 0.0
    cdef int i
    for i in range(shape):
        total += -log(uniform(key, slot + i))
    return total


cdef inline void complex_normal(uint64_t key, uint64_t slot, double* re, double* im) noexcept nogil:
    cdef double r = sqrt(-log(uniform(key, slot)))
    cdef double phi = TWO_PI * uniform(key, slot + 1)
    re[0] = r * cos(phi)
    im[0] = r * sin(phi)


cdef inline void direction(uint64_t key, uint64_t slot, double* d) noexcept nogil:
    # d = (re1, im1, re2, im2), unit norm in C^2
    cdef double norm
    complex_normal(key, slot, &d[0], &d[1])
    complex_normal(key, slot + 2, &d[2], &d[3])
    norm = sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3])
    d[0] = d[0] / norm
    d[1] = d[1] / norm
    d[2] = d[2] / norm
    d[3] = d[3] / norm


cdef void plus_exact(uint64_t key, uint64_t slot, int n, double* p) noexcept nogil:
    # p = 8 doubles: (re, im) of mu_A+, mu_A-, mu_B+, mu_B-
    cdef double e[4]
    cdef double radius, zr, phi, z_re, z_im, w_re, w_im
    radius = sqrt(gamma_int(key, slot, n + 2))
    slot += n + 2
    direction(key, slot, e)
    slot += 4
    zr = sqrt(gamma_int(key, slot, n + 1))
    slot += n + 1
    phi = TWO_PI * uniform(key, slot)
    slot += 1
    z_re = zr * cos(phi)
    z_im = zr * sin(phi)
    complex_normal(key, slot, &w_re, &w_im)
    p[0] = radius * e[0]
    p[1] = radius * e[1]
    p[2] = radius * e[2]
    p[3] = radius * e[3]
    # z * conj(e1) - w * e2
    p[4] = (z_re * e[0] - z_im * (-e[1])) - (w_re * e[2] - w_im * e[3])
    p[5] = (z_re * (-e[1]) + z_im * e[0]) - (w_re * e[3] + w_im * e[2])
    # z * conj(e2) + w * e1
    p[6] = (z_re * e[2] - z_im * (-e[3])) + (w_re * e[0] - w_im * e[1])
    p[7] = (z_re * (-e[3]) + z_im * e[2]) + (w_re * e[1] + w_im * e[0])


cdef void plus_rejection(uint64_t key, uint64_t slot, int n, double* p) noexcept nogil:
    cdef double a[4]
    cdef double b[4]
    cdef double ra, rb, o_re, o_im, ratio, base
    cdef uint64_t s
    cdef int i
    while True:
        s = slot
        ra = sqrt(gamma_int(key, s, n + 2))
        s += n + 2
        direction(key, s, a)
        s += 4
        rb = sqrt(gamma_int(key, s, n + 2))
        s += n + 2
        direction(key, s, b)
        s += 4
        o_re = (a[0] * b[0] - a[1] * b[1]) + (a[2] * b[2] - a[3] * b[3])
        o_im = (a[0] * b[1] + a[1] * b[0]) + (a[2] * b[3] + a[3] * b[2])
        base = o_re * o_re + o_im * o_im
        ratio = 1.0
        for i in range(n):
            ratio = ratio * base
        if uniform(key, s) < ratio:
            for i in range(4):
                p[i] = ra * a[i]
                p[4 + i] = rb * b[i]
            return
        slot += 2 * n + 13


def sample_block(uint64_t seed, uint64_t start, Py_ssize_t count, int n, bint rejection):
    """Return ``(alpha, beta)`` arrays of shape ``(count, 4)``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] alpha = np.empty((count, 8), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] beta = np.empty((count, 8), dtype=np.float64)
    cdef double[:, ::1] av = alpha
    cdef double[:, ::1] bv = beta
    cdef double plus[8]
    cdef double minus[8]
    cdef uint64_t seed_part = mix64(seed ^ SEED_SALT)
    cdef uint64_t key
    cdef Py_ssize_t k
    cdef int m
    with nogil:
        for k in range(count):
            key = mix64(seed_part ^ mix64(start + <uint64_t>k + 1))
            for m in range(4):
                complex_normal(key, 2 * m, &minus[2 * m], &minus[2 * m + 1])
            if rejection:
                plus_rejection(key, 8, n, plus)
            else:
                plus_exact(key, 8, n, plus)
            for m in range(4):
                av[k, 2 * m] = plus[2 * m] + minus[2 * m]
                av[k, 2 * m + 1] = plus[2 * m + 1] + minus[2 * m + 1]
                # beta = conj(plus - minus)
                bv[k, 2 * m] = plus[2 * m] - minus[2 * m]
                bv[k, 2 * m + 1] = -(plus[2 * m + 1] - minus[2 * m + 1])
    return alpha.view(np.complex128), beta.view(np.complex128)
