"""Backend equivalence: the compiled core and the numpy fallback must be
interchangeable."""

import subprocess
import sys

import numpy as np
import pytest

from conftest import random_density, random_hermitian
from nhq import _accel
from nhq._accel import _fallback

try:
    from nhq._accel import _core
except ImportError:
    _core = None

needs_compiled = pytest.mark.skipif(_core is None,
                                    reason="compiled core not built")


def _random_system(rng, n):
    return (random_density(rng, n), random_hermitian(rng, n),
            random_hermitian(rng, n))


@needs_compiled
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("func", ["rk4_linear", "rk4_nonlinear"])
def test_backends_agree(rng, n, func):
    for _ in range(5):
        y0, h, g = _random_system(rng, n)
        a = getattr(_fallback, func)(y0, h, g, 1.0, 500)
        b = getattr(_core, func)(y0, h, g, 1.0, 500)
        assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


@pytest.mark.parametrize("impl", [_fallback, _core])
def test_nonlinear_kernel_preserves_unit_trace(rng, impl):
    if impl is None:
        pytest.skip("compiled core not built")
    y0, h, g = _random_system(rng, 2)
    out = impl.rk4_nonlinear(y0, h, g, 2.0, 2000)
    assert abs(np.trace(out) - 1.0) <= 1e-9


@pytest.mark.parametrize("impl", [_fallback, _core])
def test_linear_kernel_trace_decay(rng, impl):
    # d tr/dt = -2 tr(m g): for g = c*I the trace decays exactly as e^{-2ct}
    if impl is None:
        pytest.skip("compiled core not built")
    y0 = random_density(rng, 2)
    h = random_hermitian(rng, 2)
    g = 0.4 * np.eye(2, dtype=complex)
    out = impl.rk4_linear(y0, h, g, 1.0, 1000)
    assert abs(np.trace(out) - np.exp(-0.8)) <= 1e-10


@pytest.mark.parametrize("impl", [_fallback, _core])
def test_fourth_order_convergence(rng, impl):
    if impl is None:
        pytest.skip("compiled core not built")
    from scipy.linalg import expm

    y0, hp, g = _random_system(rng, 2)
    ham = hp - 1j * g
    u = expm(-1j * ham)
    exact = u @ y0 @ u.conj().T
    errs = [np.max(np.abs(impl.rk4_linear(y0, hp, g, 1.0, n) - exact))
            for n in (500, 1000)]
    assert 10.0 <= errs[0] / errs[1] <= 22.0


def test_selected_backend_exposes_kernels():
    assert _accel.BACKEND in ("compiled", "python")
    assert callable(_accel.rk4_linear) and callable(_accel.rk4_nonlinear)


def test_env_var_forces_python_backend():
    code = ("import os; os.environ['NHQ_BACKEND'] = 'python'; "
            "import nhq; print(nhq.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
def test_compiled_accepts_readonly_operators(rng):
    y0, h, g = _random_system(rng, 2)
    h.setflags(write=False)
    g.setflags(write=False)
    a = _core.rk4_linear(y0, h, g, 1.0, 100)
    b = _fallback.rk4_linear(y0, h, g, 1.0, 100)
    assert np.max(np.abs(a - b)) <= 1e-12


@needs_compiled
def test_compiled_rejects_bad_shapes():
    with pytest.raises(ValueError):
        _core.rk4_linear(np.eye(2, dtype=complex), np.eye(3, dtype=complex),
                         np.eye(2, dtype=complex), 1.0, 10)
    with pytest.raises(ValueError):
        _core.rk4_linear(np.eye(2, dtype=complex), np.eye(2, dtype=complex),
                         np.eye(2, dtype=complex), 1.0, 0)
