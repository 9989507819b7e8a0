"""Integration kernels with an optional compiled core.

The fixed-step integrators are the only hot loops in the package: a single
trajectory at the default step size runs thousands of small-matrix
right-hand-side evaluations.  A Cython extension provides them when it was
built; otherwise (or when ``NHQ_BACKEND=python`` is set) the pure-numpy
implementation in :mod:`nhq._accel._fallback` is used.  Both backends share
call signatures and semantics.
"""

import os

from . import _fallback

if os.environ.get("NHQ_BACKEND", "").strip().lower() == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

rk4_linear = _impl.rk4_linear
rk4_nonlinear = _impl.rk4_nonlinear

__all__ = ["BACKEND", "rk4_linear", "rk4_nonlinear"]
