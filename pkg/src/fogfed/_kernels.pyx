# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as ``_kernels_py``."""

from libc.math cimport INFINITY
from libc.stdlib cimport malloc, free


def select_index(t_r, price, avail, ids, energy, double max_price, double min_avail,
                 bint energy_aware, double eps):
    cdef Py_ssize_t n = len(t_r)
    cdef Py_ssize_t i
    cdef Py_ssize_t chosen = -1
    cdef double best_t = INFINITY
    cdef double limit, e_i, e_c
    cdef double *t = <double *> malloc(n * sizeof(double)) if n else NULL
    cdef char *ok = <char *> malloc(n * sizeof(char)) if n else NULL
    try:
        for i in range(n):
            t[i] = t_r[i]
            ok[i] = price[i] <= max_price and avail[i] >= min_avail
            if ok[i] and t[i] < best_t:
                best_t = t[i]
        if best_t == INFINITY:
            return -1
        limit = best_t + eps if energy_aware else best_t
        for i in range(n):
            if not ok[i] or t[i] > limit:
                continue
            if chosen < 0:
                chosen = i
            elif energy_aware:
                e_i = energy[i]
                e_c = energy[chosen]
                if e_i < e_c or (e_i == e_c and ids[i] < ids[chosen]):
                    chosen = i
            elif ids[i] < ids[chosen]:
                chosen = i
        return chosen
    finally:
        free(t)
        free(ok)


def failure_product(probs):
    cdef double y = 1.0
    cdef double p
    for p in probs:
        y *= p
    return y


def harmonic_sum(times):
    cdef double s = 0.0
    cdef double t
    for t in times:
        s += 1.0 / t
    return s


def fifo_sojourn(arrivals, services, int servers):
    cdef Py_ssize_t n = len(arrivals)
    cdef Py_ssize_t i
    cdef int k, j
    cdef double a, s, start, earliest
    cdef double *freeat = <double *> malloc(servers * sizeof(double))
    out = [0.0] * n
    try:
        for k in range(servers):
            freeat[k] = 0.0
        for i in range(n):
            a = arrivals[i]
            s = services[i]
            j = 0
            earliest = freeat[0]
            for k in range(1, servers):
                if freeat[k] < earliest:
                    earliest = freeat[k]
                    j = k
            start = a if a > earliest else earliest
            freeat[j] = start + s
            out[i] = start + s - a
        return out
    finally:
        free(freeat)
