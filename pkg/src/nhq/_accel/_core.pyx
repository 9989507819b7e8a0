# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernels.

Mirrors :mod:`nhq._accel._fallback` (same signatures, same fixed-step
fourth-order scheme); the loops run without the GIL on C complex arrays.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


cdef void _matmul(const cplx[:, ::1] a, const cplx[:, ::1] b,
                  cplx[:, ::1] out, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef cplx acc
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc


cdef void _rhs(const cplx[:, ::1] m, const cplx[:, ::1] h, const cplx[:, ::1] g,
               cplx[:, ::1] out, cplx[:, ::1] t1, cplx[:, ::1] t2,
               Py_ssize_t n, bint nonlinear) noexcept nogil:
    # out = -i(h m - m h) - (g m + m g) [+ 2 tr(m g) m]
    cdef Py_ssize_t i, j
    cdef cplx minus_i = -1j
    cdef cplx feedback = 0
    _matmul(h, m, t1, n)
    _matmul(m, h, t2, n)
    for i in range(n):
        for j in range(n):
            out[i, j] = minus_i * (t1[i, j] - t2[i, j])
    _matmul(g, m, t1, n)
    _matmul(m, g, t2, n)
    for i in range(n):
        for j in range(n):
            out[i, j] = out[i, j] - t1[i, j] - t2[i, j]
    if nonlinear:
        for i in range(n):
            for j in range(n):
                feedback = feedback + m[i, j] * g[j, i]
        feedback = 2.0 * feedback
        for i in range(n):
            for j in range(n):
                out[i, j] = out[i, j] + feedback * m[i, j]


cdef void _rk4_loop(cplx[:, ::1] y, const cplx[:, ::1] h,
                    const cplx[:, ::1] g,
                    double span, int nsteps, bint nonlinear,
                    cplx[:, ::1] k1, cplx[:, ::1] k2, cplx[:, ::1] k3,
                    cplx[:, ::1] k4, cplx[:, ::1] yt,
                    cplx[:, ::1] t1, cplx[:, ::1] t2,
                    Py_ssize_t n) noexcept nogil:
    cdef double dt = span / nsteps
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef Py_ssize_t i, j
    cdef int step
    for step in range(nsteps):
        _rhs(y, h, g, k1, t1, t2, n, nonlinear)
        for i in range(n):
            for j in range(n):
                yt[i, j] = y[i, j] + half * k1[i, j]
        _rhs(yt, h, g, k2, t1, t2, n, nonlinear)
        for i in range(n):
            for j in range(n):
                yt[i, j] = y[i, j] + half * k2[i, j]
        _rhs(yt, h, g, k3, t1, t2, n, nonlinear)
        for i in range(n):
            for j in range(n):
                yt[i, j] = y[i, j] + dt * k3[i, j]
        _rhs(yt, h, g, k4, t1, t2, n, nonlinear)
        for i in range(n):
            for j in range(n):
                y[i, j] = y[i, j] + sixth * (
                    k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])


def _run(y0, h_op, g_op, double span, int nsteps, bint nonlinear):
    if nsteps < 1:
        raise ValueError("nsteps must be >= 1")
    y = np.array(y0, dtype=np.complex128, order="C")
    h = np.ascontiguousarray(h_op, dtype=np.complex128)
    g = np.ascontiguousarray(g_op, dtype=np.complex128)
    cdef Py_ssize_t n = y.shape[0]
    if y.shape[1] != n or h.shape[0] != n or h.shape[1] != n \
            or g.shape[0] != n or g.shape[1] != n:
        raise ValueError("state and operators must be square with equal dims")
    scratch = [np.empty((n, n), dtype=np.complex128) for _ in range(7)]
    cdef cplx[:, ::1] yv = y
    cdef const cplx[:, ::1] hv = h
    cdef const cplx[:, ::1] gv = g
    cdef cplx[:, ::1] k1 = scratch[0]
    cdef cplx[:, ::1] k2 = scratch[1]
    cdef cplx[:, ::1] k3 = scratch[2]
    cdef cplx[:, ::1] k4 = scratch[3]
    cdef cplx[:, ::1] yt = scratch[4]
    cdef cplx[:, ::1] t1 = scratch[5]
    cdef cplx[:, ::1] t2 = scratch[6]
    with nogil:
        _rk4_loop(yv, hv, gv, span, nsteps, nonlinear,
                  k1, k2, k3, k4, yt, t1, t2, n)
    return y


def rk4_linear(y0, h_op, g_op, double span, int nsteps):
    return _run(y0, h_op, g_op, span, nsteps, False)


def rk4_nonlinear(y0, h_op, g_op, double span, int nsteps):
    return _run(y0, h_op, g_op, span, nsteps, True)
