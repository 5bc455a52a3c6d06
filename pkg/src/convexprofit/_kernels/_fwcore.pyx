# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Frank-Wolfe kernel; mirrors fallback.fw_maximize exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, pow

cnp.import_array()

DEF COST_POWER = 0
DEF COST_QUAD = 1
DEF COST_EXP = 2

DEF MAT_FREE = 0
DEF MAT_UNIFORM = 1
DEF MAT_PARTITION = 2


cdef double _cost_value(double[::1] z, int code, double[::1] ca, double[::1] cb,
                        double[:, ::1] Q) noexcept:
    cdef Py_ssize_t d = z.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    if code == COST_POWER:
        for i in range(d):
            acc += ca[i] * pow(z[i], cb[i])
    elif code == COST_QUAD:
        for i in range(d):
            for j in range(d):
                acc += z[i] * Q[i, j] * z[j]
    else:
        for i in range(d):
            acc += ca[i] * (exp(cb[i] * z[i]) - 1.0)
    return acc


cdef void _cost_grad(double[::1] z, int code, double[::1] ca, double[::1] cb,
                     double[:, ::1] Q, double[::1] out) noexcept:
    cdef Py_ssize_t d = z.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc
    if code == COST_POWER:
        for i in range(d):
            out[i] = ca[i] * cb[i] * pow(z[i], cb[i] - 1.0)
    elif code == COST_QUAD:
        for i in range(d):
            acc = 0.0
            for j in range(d):
                acc += Q[i, j] * z[j]
            out[i] = 2.0 * acc
    else:
        for i in range(d):
            out[i] = ca[i] * cb[i] * exp(cb[i] * z[i])


cdef void _greedy_select(double[::1] w, cnp.uint8_t[::1] active, int mat_code,
                         long rank, long[::1] block_of, long[::1] caps,
                         long[::1] used, long[::1] order, double[::1] y) noexcept:
    """Fill y with the greedy 0/1 vertex (positive weights, descending,
    ties to lower index). `used` and `order` are scratch buffers."""
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i, j, m, e
    cdef long taken = 0
    cdef long tmp
    for i in range(n):
        y[i] = 0.0
    m = 0
    for i in range(n):
        if active[i] and w[i] > 0.0:
            order[m] = i
            m += 1
    if m == 0:
        return
    if mat_code == MAT_FREE:
        for i in range(m):
            y[order[i]] = 1.0
        return
    # insertion sort by descending weight, stable (ties keep lower index)
    for i in range(1, m):
        tmp = order[i]
        j = i - 1
        while j >= 0 and w[order[j]] < w[tmp]:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = tmp
    if mat_code == MAT_UNIFORM:
        for i in range(m):
            if taken >= rank:
                break
            y[order[i]] = 1.0
            taken += 1
        return
    # partition
    for i in range(caps.shape[0]):
        used[i] = 0
    for i in range(m):
        e = order[i]
        if used[block_of[e]] < caps[block_of[e]]:
            used[block_of[e]] += 1
            y[e] = 1.0


def fw_maximize(double[::1] v, double[:, ::1] S, int cost_code,
                double[::1] ca, double[::1] cb, double[:, ::1] Q,
                int mat_code, long rank, long[::1] block_of, long[::1] caps,
                cnp.uint8_t[::1] active, double tol, long max_iter):
    """Returns (x, value, gap, iterations); see fallback module for contract."""
    cdef Py_ssize_t n = S.shape[0]
    cdef Py_ssize_t d = S.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef double[::1] z = np.zeros(d)
    cdef double[::1] gz = np.zeros(d)
    cdef double[::1] w = np.zeros(n)
    cdef double[::1] y = np.zeros(n)
    cdef long[::1] order = np.zeros(n, dtype=np.int64)
    cdef long n_used = caps.shape[0] if caps.shape[0] > 0 else 1
    cdef long[::1] used = np.zeros(n_used, dtype=np.int64)
    cdef double vx = 0.0, gap = 0.0, value = 0.0, gamma, acc, vy
    cdef Py_ssize_t it, i, k
    cdef long done = 0

    for it in range(max_iter):
        _cost_grad(z, cost_code, ca, cb, Q, gz)
        for i in range(n):
            acc = v[i]
            for k in range(d):
                acc -= S[i, k] * gz[k]
            w[i] = acc
        _greedy_select(w, active, mat_code, rank, block_of, caps, used, order, y)
        gap = 0.0
        for i in range(n):
            gap += w[i] * (y[i] - x[i])
        value = vx - _cost_value(z, cost_code, ca, cb, Q)
        if gap <= tol * (1.0 + fabs(value)):
            return x_arr, value, max(gap, 0.0), done
        gamma = 2.0 / (it + 2.0)
        vy = 0.0
        for i in range(n):
            x[i] += gamma * (y[i] - x[i])
            vy += v[i] * y[i]
        for k in range(d):
            acc = 0.0
            for i in range(n):
                acc += S[i, k] * y[i]
            z[k] += gamma * (acc - z[k])
        vx += gamma * (vy - vx)
        done = it + 1
    value = vx - _cost_value(z, cost_code, ca, cb, Q)
    return x_arr, value, max(gap, 0.0), done
