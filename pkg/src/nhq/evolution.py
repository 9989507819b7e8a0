"""State propagation under a non-Hermitian Hamiltonian.

A general Hamiltonian splits uniquely as ``H = H+ - i G`` with both ``H+``
(the energy part) and ``G`` (the decay-rate operator) Hermitian.  Two flows
follow from it:

* the *linear* flow for the non-normalized operator, whose trace decays at
  a rate set by ``G``;
* the *nonlinear*, trace-preserving flow for the normalized density matrix,
  which adds a trace-feedback term.

For unit-trace inputs the nonlinear solution is the linear solution divided
by its trace, and the nonlinear propagator exploits exactly that.  Inputs
whose trace is not one cannot use the shortcut and are integrated directly.

All operations are pure functions; the value types are frozen and safe to
share across threads.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import SingularTraceError
from .kernel import as_complex_matrix, mat_exp, require_hermitian

HBAR = 1.0

# |tr - 1| below this means "unit trace" (normalization shortcut applies).
UNIT_TRACE_TOL = 1e-10
# |tr| below this makes normalization meaningless.
SINGULAR_TRACE_TOL = 1e-14

METHOD_EXACT = "exact-exponential"
METHOD_RK4 = "rk4"


@dataclass(frozen=True)
class HamiltonianSplit:
    """The pair ``(H+, G)`` of Hermitian matrices defining ``H = H+ - i G``."""

    h_plus: np.ndarray
    gamma: np.ndarray
    hbar: float = HBAR

    def __post_init__(self):
        hp = require_hermitian(self.h_plus)
        g = require_hermitian(self.gamma)
        if hp.shape != g.shape:
            raise ValueError(f"dimension mismatch: {hp.shape} vs {g.shape}")
        if self.hbar <= 0.0:
            raise ValueError("hbar must be positive")
        hp.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "h_plus", hp)
        object.__setattr__(self, "gamma", g)

    @property
    def dim(self) -> int:
        return self.h_plus.shape[0]

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.h_plus - 1j * self.gamma


def split_hamiltonian(h) -> HamiltonianSplit:
    """Split an arbitrary square matrix into its Hermitian energy part and
    Hermitian decay operator, ``h = h_plus - i gamma``."""
    m = as_complex_matrix(h)
    h_plus = 0.5 * (m + m.conj().T)
    gamma = 0.5j * (m - m.conj().T)
    return HamiltonianSplit(h_plus=h_plus, gamma=gamma)


@dataclass(frozen=True, eq=False)
class StateMatrix:
    """A complex square matrix acting as a density-like operator.

    ``normalized=True`` asserts unit trace; non-normalized instances hold
    trace-decaying states or evolved operator products (generally
    non-Hermitian).
    """

    matrix: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        m = as_complex_matrix(self.matrix)
        if self.normalized:
            tr = np.trace(m)
            if abs(tr - 1.0) > UNIT_TRACE_TOL:
                raise ValueError(
                    f"state flagged normalized but tr = {tr:.12g}"
                )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


@dataclass(frozen=True)
class PropagationConfig:
    """Integration controls: ``method`` is the exact-exponential propagator
    or fixed-step rk4 with step ``dt``; trajectories record every
    ``record_stride``-th step."""

    method: str = METHOD_EXACT
    dt: float = 1e-3
    record_stride: int = 1

    def __post_init__(self):
        if self.method not in (METHOD_EXACT, METHOD_RK4):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.dt > 0.0):
            raise ValueError("dt must be positive")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


DEFAULT_CONFIG = PropagationConfig()


def _rate_operators(ham: HamiltonianSplit):
    return ham.h_plus / ham.hbar, ham.gamma / ham.hbar


def linear_rhs(omega: StateMatrix, ham: HamiltonianSplit) -> np.ndarray:
    """Time derivative of the non-normalized state:
    ``-(i/hbar) [H+, m] - (1/hbar) {G, m}``."""
    m = omega.matrix
    if m.shape != ham.h_plus.shape:
        raise ValueError(f"dimension mismatch: {m.shape} vs {ham.h_plus.shape}")
    h, g = _rate_operators(ham)
    return -1j * (h @ m - m @ h) - (g @ m + m @ g)


def nonlinear_rhs(rho: StateMatrix, ham: HamiltonianSplit) -> np.ndarray:
    """Time derivative of the trace-feedback flow:
    the linear right-hand side plus ``(2/hbar) tr(m G) m``.

    No unit-trace requirement: the same functional form is applied to
    arbitrary operator products when correlation inputs are integrated
    directly.
    """
    m = rho.matrix
    if m.shape != ham.h_plus.shape:
        raise ValueError(f"dimension mismatch: {m.shape} vs {ham.h_plus.shape}")
    h, g = _rate_operators(ham)
    feedback = 2.0 * np.einsum("ij,ji->", m, g)
    return -1j * (h @ m - m @ h) - (g @ m + m @ g) + feedback * m


def _check_span(t0: float, t1: float) -> float:
    span = t1 - t0
    if span < 0.0:
        raise ValueError(
            f"backward evolution requested (t1={t1} < t0={t0}); only "
            "forward-ordered propagation is defined"
        )
    return span


def _exact_step_operator(ham: HamiltonianSplit, span: float) -> np.ndarray:
    return mat_exp(-1j * ham.hamiltonian * span / ham.hbar)


def _propagate_linear_matrix(m, ham, span, cfg) -> np.ndarray:
    if span == 0.0:
        return np.array(m, dtype=complex)
    if cfg.method == METHOD_EXACT:
        u = _exact_step_operator(ham, span)
        return u @ m @ u.conj().T
    h, g = _rate_operators(ham)
    nsteps = max(1, math.ceil(span / cfg.dt - 1e-12))
    return _accel.rk4_linear(m, h, g, span, nsteps)


def propagate_linear(omega0: StateMatrix, ham: HamiltonianSplit,
                     t0: float, t1: float,
                     cfg: PropagationConfig = DEFAULT_CONFIG) -> StateMatrix:
    """Evolve a state from ``t0`` to ``t1 >= t0`` with the linear flow.

    The exact-exponential method conjugates with ``exp(-i H span / hbar)``
    (and its adjoint), which solves the flow exactly; rk4 integrates the
    right-hand side with fixed step ``cfg.dt``.  The result is flagged
    non-normalized: the linear flow does not preserve the trace.
    """
    span = _check_span(t0, t1)
    out = _propagate_linear_matrix(omega0.matrix, ham, span, cfg)
    return StateMatrix(out, normalized=False)


def propagate_linear_trajectory(omega0: StateMatrix, ham: HamiltonianSplit,
                                t0: float, t1: float,
                                cfg: PropagationConfig = DEFAULT_CONFIG):
    """Evolve with the linear flow, recording intermediate states.

    Steps with ``cfg.dt`` from ``t0``; every ``cfg.record_stride``-th point
    is recorded, and the first and final points always are.  Returns
    ``(times, states)`` as a float array and a stacked complex array.
    """
    span = _check_span(t0, t1)
    nsteps = max(1, math.ceil(span / cfg.dt - 1e-12)) if span > 0.0 else 0
    times = [t0]
    mats = [np.array(omega0.matrix, dtype=complex)]
    if nsteps == 0:
        return np.array(times), np.array(mats)

    if cfg.method == METHOD_EXACT:
        dt = span / nsteps
        u = _exact_step_operator(ham, dt)
        ud = u.conj().T
        step = lambda m: u @ m @ ud
    else:
        h, g = _rate_operators(ham)
        dt = span / nsteps
        step = lambda m: _accel.rk4_linear(m, h, g, dt, 1)

    m = mats[0]
    for k in range(1, nsteps + 1):
        m = step(m)
        if k % cfg.record_stride == 0 or k == nsteps:
            times.append(t0 + k * dt)
            mats.append(m)
    return np.array(times), np.array(mats)


def propagate_nonlinear_direct(x0: StateMatrix, ham: HamiltonianSplit,
                               t0: float, t1: float,
                               cfg: PropagationConfig = DEFAULT_CONFIG) -> StateMatrix:
    """Integrate the trace-feedback flow itself with rk4, regardless of the
    input trace.  This is the only defined route for non-unit-trace inputs;
    for unit-trace inputs it cross-checks the normalization shortcut."""
    span = _check_span(t0, t1)
    if span == 0.0:
        return StateMatrix(x0.matrix, normalized=x0.normalized)
    h, g = _rate_operators(ham)
    nsteps = max(1, math.ceil(span / cfg.dt - 1e-12))
    out = _accel.rk4_nonlinear(x0.matrix, h, g, span, nsteps)
    return StateMatrix(out, normalized=False)


def propagate_nonlinear(x0: StateMatrix, ham: HamiltonianSplit,
                        t0: float, t1: float,
                        cfg: PropagationConfig = DEFAULT_CONFIG) -> StateMatrix:
    """Evolve a state from ``t0`` to ``t1 >= t0`` with the nonlinear flow.

    Unit-trace inputs take the normalization shortcut: propagate linearly,
    then divide by the trace (raising :class:`SingularTraceError` if the
    trace has decayed to numerical zero).  Anything else is integrated
    directly with rk4 and comes back flagged non-normalized.
    """
    tr0 = np.trace(x0.matrix)
    if abs(tr0 - 1.0) <= UNIT_TRACE_TOL:
        span = _check_span(t0, t1)
        out = _propagate_linear_matrix(x0.matrix, ham, span, cfg)
        tr = np.trace(out)
        if abs(tr) < SINGULAR_TRACE_TOL:
            raise SingularTraceError(t1, tr)
        return StateMatrix(out / tr, normalized=True)
    return propagate_nonlinear_direct(x0, ham, t0, t1, cfg)


def normalize(omega: StateMatrix) -> StateMatrix:
    """Divide a state by its trace."""
    tr = np.trace(omega.matrix)
    if abs(tr) < SINGULAR_TRACE_TOL:
        raise SingularTraceError(math.nan, tr)
    return StateMatrix(omega.matrix / tr, normalized=True)


def expectation(state: StateMatrix, obs) -> complex:
    """Statistical average ``tr(rho obs)`` with ``rho`` the trace-normalized
    state; normalizes internally when the flag is unset."""
    o = as_complex_matrix(obs)
    if o.shape != state.matrix.shape:
        raise ValueError(f"dimension mismatch: {o.shape} vs {state.matrix.shape}")
    value = complex(np.einsum("ij,ji->", state.matrix, o))
    if state.normalized:
        return value
    tr = np.trace(state.matrix)
    if abs(tr) < SINGULAR_TRACE_TOL:
        raise SingularTraceError(math.nan, tr)
    return value / tr
