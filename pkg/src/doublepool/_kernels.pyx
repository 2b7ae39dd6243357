# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``."""

from libc.math cimport expm1, log1p, pow, INFINITY
from libc.stdlib cimport calloc, free

cimport cython


def scan_min_cost(double p, int k, long s_lo, long s_hi):
    cdef double log_q = log1p(-p)
    cdef double q = 1.0 - p
    cdef long best_s = s_lo
    cdef double best = INFINITY
    cdef double tail, cost
    cdef long s
    for s in range(s_lo, s_hi + 1):
        tail = q * pow(-expm1((s - 1.0) * log_q), k)
        cost = <double>k / <double>s + p + tail
        if cost < best:
            best = cost
            best_s = s
        elif p + tail >= best:
            break
    return best_s, best


def count_retests(const unsigned char[::1] infected,
                  const long long[:, ::1] perms,
                  const unsigned char[:, ::1] pool_ok,
                  long s):
    cdef Py_ssize_t n = infected.shape[0]
    cdef Py_ssize_t n_pools = pool_ok.shape[1]
    cdef Py_ssize_t rounds = perms.shape[0]
    cdef Py_ssize_t r, j, i, pool, filled
    cdef long long retests = 0, detected = 0
    cdef const long long *order
    cdef unsigned char *has_pos = <unsigned char *> calloc(n_pools, 1)
    cdef unsigned char *cleared = <unsigned char *> calloc(n, 1)
    if has_pos == NULL or cleared == NULL:
        free(has_pos)
        free(cleared)
        raise MemoryError()
    try:
        with nogil:
            for r in range(rounds):
                order = &perms[r, 0]
                # Pool i holds positions [i*s, (i+1)*s) of this round's order.
                pool = 0
                filled = 0
                has_pos[0] = 0
                for j in range(n):
                    if filled == s:
                        pool += 1
                        filled = 0
                        has_pos[pool] = 0
                    has_pos[pool] |= infected[order[j]]
                    filled += 1
                for i in range(n_pools):
                    has_pos[i] &= pool_ok[r, i]
                pool = 0
                filled = 0
                for j in range(n):
                    if filled == s:
                        pool += 1
                        filled = 0
                    if not has_pos[pool]:
                        cleared[order[j]] = 1
                    filled += 1
            for j in range(n):
                if not cleared[j]:
                    retests += 1
                    detected += infected[j]
    finally:
        free(has_pos)
        free(cleared)
    return retests, detected, retests - detected
