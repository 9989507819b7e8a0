"""Two-time and multi-time correlation functions.

Two rival definitions coexist for dynamics with a decay operator:

* the *nonlinear* kind propagates operator products with the
  trace-normalizing flow, so every evolution segment is self-normalized;
* the *linear* kind propagates with the trace-decaying flow and divides the
  final trace by the trace of the separately evolved bare state.

Both reduce to the plain statistical average when the inserted operator is
the identity, and to the ordinary Heisenberg-picture correlation when the
decay operator vanishes.  For autocorrelations, the relative difference
between the two kinds is a positivity diagnostic: it vanishes exactly when
the initial density matrix is positive semi-definite.

Multi-time correlations alternate evolution segments over the time-ordered
union of the insertion times with left (xi) / right (chi) operator
insertions; coincident times collapse to a single two-sided insertion.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import SingularTraceError
from .evolution import (
    DEFAULT_CONFIG,
    METHOD_EXACT,
    SINGULAR_TRACE_TOL,
    UNIT_TRACE_TOL,
    HamiltonianSplit,
    PropagationConfig,
    StateMatrix,
    _exact_step_operator,
    _rate_operators,
    propagate_linear,
    propagate_nonlinear,
)
from . import _accel
from .kernel import as_complex_matrix

KIND_NONLINEAR = "nonlinear"
KIND_LINEAR = "linear"
KINDS = (KIND_NONLINEAR, KIND_LINEAR)

SIDE_LEFT = "left-xi"
SIDE_RIGHT = "right-chi"
SIDE_BOTH = "both"

# Two insertion times within this distance are the same time slot.
TIME_MERGE_TOL = 1e-12
# |denominator| below this makes a ratio an undefined sample, not a value.
RATIO_SINGULAR_TOL = 1e-14


@dataclass(frozen=True)
class OperatorEvent:
    """A measurement operator bound to a time and an insertion side."""

    operator: np.ndarray
    time: float
    side: str

    def __post_init__(self):
        op = as_complex_matrix(self.operator)
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)
        if self.side not in (SIDE_LEFT, SIDE_RIGHT, SIDE_BOTH):
            raise ValueError(f"unknown side {self.side!r}")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing time-ordered union of insertion times."""

    tau: tuple
    t0: float = 0.0

    def __post_init__(self):
        taus = tuple(float(t) for t in self.tau)
        if any(t < self.t0 for t in taus):
            raise ValueError("grid times must not precede t0")
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("grid times must be strictly increasing")
        object.__setattr__(self, "tau", taus)


def _check_ordered(times: Sequence[float], t0: float, label: str) -> None:
    if any(t < t0 for t in times):
        raise ValueError(f"{label} times must not precede t0={t0}")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError(f"{label} times must be strictly increasing")


def merge_times(t_list: Sequence[float], s_list: Sequence[float],
                t0: float = 0.0) -> TimeGrid:
    """Sorted deduplicated union of the left and right insertion times;
    times closer than ``TIME_MERGE_TOL`` collapse into one slot."""
    _check_ordered(t_list, t0, "left-insertion")
    _check_ordered(s_list, t0, "right-insertion")
    merged = []
    for t in sorted(list(t_list) + list(s_list)):
        if not merged or t - merged[-1] > TIME_MERGE_TOL:
            merged.append(float(t))
    return TimeGrid(tau=tuple(merged), t0=t0)


@dataclass(frozen=True)
class InsertionSlot:
    """Operators to apply at one grid time: left factor, right factor, or both."""

    time: float
    left: Optional[np.ndarray] = None
    right: Optional[np.ndarray] = None


def apply_insertion(slot: InsertionSlot, d: StateMatrix) -> StateMatrix:
    """Apply the slot's insertion rule to ``d``: left operators multiply from
    the left, right operators from the right.  The product is generally not
    trace-normalized."""
    if slot.left is None and slot.right is None:
        raise ValueError(f"no insertion registered at t={slot.time}")
    m = d.matrix
    if slot.left is not None:
        m = slot.left @ m
    if slot.right is not None:
        m = m @ slot.right
    return StateMatrix(m, normalized=False)


def _slots_from_events(events: Sequence[OperatorEvent], t0: float = 0.0):
    lefts = [e for e in events if e.side in (SIDE_LEFT, SIDE_BOTH)]
    rights = [e for e in events if e.side in (SIDE_RIGHT, SIDE_BOTH)]
    grid = merge_times([e.time for e in lefts], [e.time for e in rights], t0)
    slots = []
    for tau in grid.tau:
        left = [e for e in lefts if abs(e.time - tau) <= TIME_MERGE_TOL]
        right = [e for e in rights if abs(e.time - tau) <= TIME_MERGE_TOL]
        slots.append(InsertionSlot(
            time=tau,
            left=left[0].operator if left else None,
            right=right[0].operator if right else None,
        ))
    return slots


def _require_unit_trace(initial: StateMatrix) -> None:
    if not initial.normalized and abs(initial.trace - 1.0) > UNIT_TRACE_TOL:
        raise ValueError(
            f"correlations are defined for unit-trace initial states; "
            f"tr = {initial.trace:.12g}"
        )


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"unknown correlation kind {kind!r}")


def correlate_two_time(kind: str, chi, xi, t1: float, t2: float,
                       initial: StateMatrix, ham: HamiltonianSplit,
                       cfg: PropagationConfig = DEFAULT_CONFIG) -> complex:
    """Two-time correlation with ``xi`` inserted at ``t1`` and ``chi``
    measured at ``t2``, for ``0 <= t1 <= t2`` and a unit-trace initial state.

    ``kind="nonlinear"``: evolve the state to ``t1`` with the normalized
    flow, left-multiply by ``xi``, evolve the product to ``t2`` with the same
    flow, trace against ``chi``.

    ``kind="linear"``: same insertions with the trace-decaying flow, with the
    final trace divided by the trace of the bare state evolved to ``t2``.
    """
    _check_kind(kind)
    chi_m = as_complex_matrix(chi)
    xi_m = as_complex_matrix(xi)
    if not (0.0 <= t1 <= t2):
        raise ValueError(f"need 0 <= t1 <= t2, got t1={t1}, t2={t2}")
    _require_unit_trace(initial)

    if kind == KIND_NONLINEAR:
        rho1 = propagate_nonlinear(initial, ham, 0.0, t1, cfg)
        product = StateMatrix(xi_m @ rho1.matrix, normalized=False)
        out = propagate_nonlinear(product, ham, t1, t2, cfg)
        return complex(np.einsum("ij,ji->", chi_m, out.matrix))

    omega1 = propagate_linear(initial, ham, 0.0, t1, cfg)
    product = StateMatrix(xi_m @ omega1.matrix, normalized=False)
    evolved = propagate_linear(product, ham, t1, t2, cfg)
    omega2 = propagate_linear(omega1, ham, t1, t2, cfg)
    denom = np.trace(omega2.matrix)
    if abs(denom) < SINGULAR_TRACE_TOL:
        raise SingularTraceError(t2, denom)
    return complex(np.einsum("ij,ji->", chi_m, evolved.matrix) / denom)


def autocorrelate(kind: str, chi, t: float, initial: StateMatrix,
                  ham: HamiltonianSplit,
                  cfg: PropagationConfig = DEFAULT_CONFIG) -> complex:
    """Autocorrelation of ``chi`` between times 0 and ``t``."""
    return correlate_two_time(kind, chi, chi, 0.0, t, initial, ham, cfg)


def correlate_multitime(kind: str, events: Sequence[OperatorEvent],
                        initial: StateMatrix, ham: HamiltonianSplit,
                        cfg: PropagationConfig = DEFAULT_CONFIG) -> complex:
    """Multi-time correlation over an arbitrary set of insertion events.

    Builds the time-ordered union of the event times, then alternates
    evolution segments (per ``kind``) with operator insertions.  The
    nonlinear kind needs no final division (its segments self-normalize
    whenever their input has unit trace; other inputs are integrated
    directly); the linear kind divides by the trace of the bare state
    evolved to the last insertion time.
    """
    _check_kind(kind)
    if not events:
        raise ValueError("at least one operator event is required")
    _require_unit_trace(initial)

    slots = _slots_from_events(events, t0=0.0)
    propagate = propagate_nonlinear if kind == KIND_NONLINEAR else propagate_linear

    d = initial
    now = 0.0
    for slot in slots:
        d = propagate(d, ham, now, slot.time, cfg)
        d = apply_insertion(slot, d)
        now = slot.time
    value = complex(np.trace(d.matrix))

    if kind == KIND_LINEAR:
        bare = propagate_linear(initial, ham, 0.0, now, cfg)
        denom = np.trace(bare.matrix)
        if abs(denom) < SINGULAR_TRACE_TOL:
            raise SingularTraceError(now, denom)
        value /= denom
    return value


def relative_difference(c: complex, cl: complex) -> Optional[complex]:
    """Relative difference ``1 - c/cl`` between the two correlation kinds.

    Returns ``None`` (an undefined sample, not an exception) when ``cl`` is
    numerically zero, so that series containing isolated zeros of the linear
    kind survive with flagged points.
    """
    if abs(cl) <= RATIO_SINGULAR_TOL:
        return None
    return 1.0 - c / cl


# ---------------------------------------------------------------------------
# Series evaluation on increasing time grids.
#
# Between consecutive grid times both the evolved product and the bare state
# advance by one segment, so a whole series costs one evolution pass instead
# of one evolution per (0, t) pair.  Exact-exponential segments reuse the
# step operator for repeated segment lengths (uniform grids build it once).
#
# A trace zero at an isolated grid point does not break the evolution (the
# state advance never divides), so series functions emit a flagged undefined
# sample there and continue; only the point-evaluation APIs raise.
# ---------------------------------------------------------------------------


class _SegmentStepper:
    def __init__(self, ham: HamiltonianSplit, cfg: PropagationConfig):
        self._ham = ham
        self._cfg = cfg
        self._cache = {}

    def advance(self, m: np.ndarray, span: float) -> np.ndarray:
        if span == 0.0:
            return m
        if self._cfg.method == METHOD_EXACT:
            ops = self._cache.get(span)
            if ops is None:
                u = _exact_step_operator(self._ham, span)
                ops = (u, u.conj().T)
                self._cache[span] = ops
            return ops[0] @ m @ ops[1]
        h, g = _rate_operators(self._ham)
        nsteps = max(1, math.ceil(span / self._cfg.dt - 1e-12))
        return _accel.rk4_linear(m, h, g, span, nsteps)


def _check_grid(times) -> np.ndarray:
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise ValueError("time grid must be a non-empty 1-d array")
    if ts[0] < 0.0 or np.any(np.diff(ts) < 0.0):
        raise ValueError("time grid must be non-decreasing and start at t >= 0")
    return ts


def average_series(times, initial: StateMatrix, ham: HamiltonianSplit,
                   observables: Sequence[np.ndarray],
                   cfg: PropagationConfig = DEFAULT_CONFIG):
    """Normalized averages of each observable along one evolution.

    Returns ``(values, defined)``: an array of shape
    ``(len(observables), len(times))`` plus a per-time flag that is False
    where the state trace is numerically zero (undefined sample).
    """
    ts = _check_grid(times)
    obs = [as_complex_matrix(o) for o in observables]
    stepper = _SegmentStepper(ham, cfg)
    out = np.zeros((len(obs), ts.size), dtype=complex)
    defined = np.ones(ts.size, dtype=bool)
    m = np.array(initial.matrix, dtype=complex)
    prev = 0.0
    for i, t in enumerate(ts):
        m = stepper.advance(m, t - prev)
        prev = t
        tr = np.trace(m)
        if abs(tr) < SINGULAR_TRACE_TOL:
            defined[i] = False
            continue
        for j, o in enumerate(obs):
            out[j, i] = np.einsum("ij,ji->", m, o) / tr
    return out, defined


def correlation_series(kind: str, xi, chi, times, initial: StateMatrix,
                       ham: HamiltonianSplit,
                       cfg: PropagationConfig = DEFAULT_CONFIG):
    """Two-time correlation values for ``t1 = 0`` and each ``t2`` in
    ``times``; returns ``(values, defined)``.

    The nonlinear kind takes the segment-stepping shortcut only when the
    inserted product has unit trace (the normalization ansatz); otherwise
    each point is integrated directly.
    """
    _check_kind(kind)
    ts = _check_grid(times)
    xi_m = as_complex_matrix(xi)
    chi_m = as_complex_matrix(chi)
    _require_unit_trace(initial)

    out = np.zeros(ts.size, dtype=complex)
    defined = np.ones(ts.size, dtype=bool)

    y0 = xi_m @ initial.matrix
    if kind == KIND_NONLINEAR and abs(np.trace(y0) - 1.0) > UNIT_TRACE_TOL:
        for i, t in enumerate(ts):
            try:
                out[i] = correlate_two_time(kind, chi_m, xi_m, 0.0, float(t),
                                            initial, ham, cfg)
            except SingularTraceError:
                defined[i] = False
        return out, defined

    stepper = _SegmentStepper(ham, cfg)
    y = y0
    om = np.array(initial.matrix, dtype=complex)
    prev = 0.0
    for i, t in enumerate(ts):
        span = t - prev
        y = stepper.advance(y, span)
        if kind == KIND_LINEAR:
            om = stepper.advance(om, span)
            denom = np.trace(om)
        else:
            denom = np.trace(y)
        prev = t
        if abs(denom) < SINGULAR_TRACE_TOL:
            defined[i] = False
            continue
        out[i] = np.einsum("ij,ji->", chi_m, y) / denom
    return out, defined


def relative_difference_series(c_values, cl_values):
    """Element-wise relative difference between the two kinds.

    Returns ``(values, defined)``; undefined points (linear kind numerically
    zero) carry value 0 and a False flag.
    """
    c = np.asarray(c_values, dtype=complex)
    cl = np.asarray(cl_values, dtype=complex)
    if c.shape != cl.shape:
        raise ValueError("series length mismatch")
    defined = np.abs(cl) > RATIO_SINGULAR_TOL
    values = np.zeros_like(c)
    values[defined] = 1.0 - c[defined] / cl[defined]
    return values, defined
