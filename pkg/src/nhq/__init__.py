"""Density-matrix propagation and two-time correlation functions for
non-Hermitian Hamiltonians, with closed-form two-level benchmarks."""

from ._accel import BACKEND
from .correlators import (
    KIND_LINEAR,
    KIND_NONLINEAR,
    OperatorEvent,
    SIDE_BOTH,
    SIDE_LEFT,
    SIDE_RIGHT,
    TimeGrid,
    apply_insertion,
    autocorrelate,
    average_series,
    correlate_multitime,
    correlate_two_time,
    correlation_series,
    merge_times,
    relative_difference,
    relative_difference_series,
)
from .errors import ConfigError, DegenerateLimitError, SingularTraceError
from .evolution import (
    HamiltonianSplit,
    PropagationConfig,
    StateMatrix,
    METHOD_EXACT,
    METHOD_RK4,
    expectation,
    linear_rhs,
    nonlinear_rhs,
    normalize,
    propagate_linear,
    propagate_linear_trajectory,
    propagate_nonlinear,
    propagate_nonlinear_direct,
    split_hamiltonian,
)
from .kernel import (
    IDENTITY2,
    PAULI,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    anticommutator,
    commutator,
    hermitian_eigenvalues,
    mat_exp,
    psd_check,
)
from .tls import (
    OracleSample,
    TlsScenario,
    build_model,
    erratum_fields,
    initial_state,
    oracle_asymptote,
    oracle_sample,
    scenario_state,
)

__version__ = "0.1.0"
