"""Pure-numpy reference implementation of the integration kernels.

``rk4_linear`` integrates the trace-decaying flow

    dm/dt = -i [h, m] - {g, m}

and ``rk4_nonlinear`` the trace-feedback flow

    dm/dt = -i [h, m] - {g, m} + 2 tr(m g) m

with the classic fixed-step fourth-order scheme.  Matrices are complex and
square; ``h`` and ``g`` are rate operators (any global constant has already
been divided out by the caller).
"""

import numpy as np


def _linear_rhs(m, h, g):
    return -1j * (h @ m - m @ h) - (g @ m + m @ g)


def _nonlinear_rhs(m, h, g):
    feedback = 2.0 * np.einsum("ij,ji->", m, g)
    return _linear_rhs(m, h, g) + feedback * m


def _rk4(rhs, y0, h_op, g_op, span, nsteps):
    dt = span / nsteps
    y = np.array(y0, dtype=complex)
    for _ in range(nsteps):
        k1 = rhs(y, h_op, g_op)
        k2 = rhs(y + 0.5 * dt * k1, h_op, g_op)
        k3 = rhs(y + 0.5 * dt * k2, h_op, g_op)
        k4 = rhs(y + dt * k3, h_op, g_op)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def rk4_linear(y0, h_op, g_op, span: float, nsteps: int) -> np.ndarray:
    return _rk4(_linear_rhs, y0, h_op, g_op, span, nsteps)


def rk4_nonlinear(y0, h_op, g_op, span: float, nsteps: int) -> np.ndarray:
    return _rk4(_nonlinear_rhs, y0, h_op, g_op, span, nsteps)
