# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled evaluation kernels. Same contract as ``_kernels_py``."""

from libc.math cimport exp, fabs
import numpy as np

DFQUAD = 0
QE = 1
REB = 2


cdef inline double _influence(int sem, double base, double e) noexcept nogil:
    cdef double v, sq
    if sem == 0:
        if e <= 0.0:
            v = base - base * fabs(e)
        else:
            v = base + (1.0 - base) * e
    elif sem == 1:
        sq = e * e / (1.0 + e * e)
        if e <= 0.0:
            v = base - base * sq
        else:
            v = base + (1.0 - base) * sq
    elif e == 0.0:
        v = base
    else:
        v = 1.0 - (1.0 - base * base) / (1.0 + base * exp(e))
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


cdef inline double _node(int sem, Py_ssize_t j, const double[::1] tau, const long long[::1] ptr,
                         const long long[::1] src, const signed char[::1] sign,
                         const double[::1] cur) noexcept nogil:
    cdef Py_ssize_t k
    cdef double pa = 1.0, ps = 1.0, e = 0.0
    if sem == 0:
        for k in range(ptr[j], ptr[j + 1]):
            if sign[k] < 0:
                pa *= 1.0 - cur[src[k]]
            else:
                ps *= 1.0 - cur[src[k]]
        e = pa - ps
    else:
        for k in range(ptr[j], ptr[j + 1]):
            e += cur[src[k]] * sign[k]
    return _influence(sem, tau[j], e)


def aggregate(int sem, att, sup):
    cdef double pa = 1.0, ps = 1.0, s
    if sem == 0:
        for s in att:
            pa *= 1.0 - s
        for s in sup:
            ps *= 1.0 - s
        return pa - ps
    return float(sum(sup) - sum(att))


def influence(int sem, double base, double e):
    return _influence(sem, base, e)


def propagate_acyclic(int sem, const double[::1] tau, const long long[::1] order,
                      const long long[::1] in_ptr, const long long[::1] in_src,
                      const signed char[::1] in_sign, const unsigned char[::1] active,
                      double[::1] out):
    cdef Py_ssize_t n = tau.shape[0], i, j
    with nogil:
        for i in range(n):
            out[i] = 0.0
        for i in range(order.shape[0]):
            j = order[i]
            if active[j]:
                out[j] = _node(sem, j, tau, in_ptr, in_src, in_sign, out)


def propagate_fixed_point(int sem, const double[::1] tau, const long long[::1] in_ptr,
                          const long long[::1] in_src, const signed char[::1] in_sign,
                          const unsigned char[::1] active, double tol, long long max_iter,
                          double[::1] out):
    cdef Py_ssize_t n = tau.shape[0], j
    cdef long long it = 0
    cdef double diff = 0.0, v, d
    nxt_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] nxt = nxt_arr
    cdef double[::1] cur = out
    cdef double[::1] tmp
    with nogil:
        for j in range(n):
            cur[j] = tau[j] if active[j] else 0.0
            nxt[j] = cur[j]
        while it < max_iter:
            diff = 0.0
            for j in range(n):
                if active[j]:
                    v = _node(sem, j, tau, in_ptr, in_src, in_sign, cur)
                    d = fabs(v - cur[j])
                    if d > diff:
                        diff = d
                    nxt[j] = v
                else:
                    nxt[j] = 0.0
            tmp = cur
            cur = nxt
            nxt = tmp
            it += 1
            if diff <= tol:
                break
        if n > 0 and &cur[0] != &out[0]:
            for j in range(n):
                out[j] = cur[j]
    return it, diff


def residual(int sem, const double[::1] tau, const long long[::1] in_ptr,
             const long long[::1] in_src, const signed char[::1] in_sign,
             const unsigned char[::1] active, const double[::1] strengths):
    cdef Py_ssize_t n = tau.shape[0], j
    cdef double worst = 0.0, d
    with nogil:
        for j in range(n):
            if active[j]:
                d = fabs(_node(sem, j, tau, in_ptr, in_src, in_sign, strengths) - strengths[j])
                if d > worst:
                    worst = d
    return worst
