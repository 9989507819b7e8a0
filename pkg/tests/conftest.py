"""Shared helpers for the test suite.

The independent reference routes live here: Heisenberg-picture correlations
through scipy's matrix exponential, brute-force linear evolution, and the
scenario grid used by the acceptance suite.
"""

import numpy as np
import pytest
from scipy.linalg import expm as scipy_expm

from nhq import PropagationConfig
from nhq.correlators import (
    KIND_LINEAR,
    KIND_NONLINEAR,
    average_series,
    correlation_series,
)
from nhq.kernel import PAULI
from nhq.tls import (
    FAMILY_FIELDS,
    FAMILY_PAIRS,
    PAIR_OPERATORS,
    TlsScenario,
    build_model,
    oracle_sample,
    scenario_state,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20250809)


def random_complex(rng, n=2, scale=1.0):
    return scale * (rng.standard_normal((n, n))
                    + 1j * rng.standard_normal((n, n)))


def random_hermitian(rng, n=2, scale=1.0):
    a = random_complex(rng, n, scale)
    return 0.5 * (a + a.conj().T)


def random_density(rng, n=2):
    a = random_complex(rng, n)
    m = a @ a.conj().T
    return m / np.trace(m)


def heisenberg_correlation(chi, xi, t1, t2, h_plus, rho0):
    """Ordinary Hermitian-dynamics correlation tr(chi(t2) xi(t1) rho0) with
    Heisenberg operators built from scipy's expm (independent of the package
    propagators)."""

    def heis(op, t):
        u = scipy_expm(1j * h_plus * t)
        return u @ op @ u.conj().T

    return complex(np.trace(heis(chi, t2) @ heis(xi, t1) @ rho0))


def brute_linear_evolve(m0, ham, t):
    """Linear-flow solution via scipy's expm."""
    u = scipy_expm(-1j * ham.hamiltonian * t / ham.hbar)
    return u @ m0 @ u.conj().T


def scaled_err(numeric, oracle) -> float:
    return abs(numeric - oracle) / max(1.0, abs(oracle))


def acceptance_scenarios():
    """The representative scenario grid: three models, both families,
    on-shell and off-shell initial states."""
    table = (
        ("ed", ({"a2": 1.0}, {"a2": 0.5}, {"a2": -1.0})),
        ("pd", ({},)),
        ("dph", ({"gamma_param": 1.0}, {"gamma_param": -1.0})),
    )
    for model, plist in table:
        for params in plist:
            for init in ("x", "z"):
                for nu in (0.0, 0.5, -0.5):
                    yield TlsScenario(model=model, init=init, nu=nu, **params)


def numeric_field_series(sc: TlsScenario, ts,
                         cfg: PropagationConfig = PropagationConfig()):
    """Numeric values and defined-masks for every field that has a closed
    form, keyed like the oracle sample fields."""
    ham, rho0 = build_model(sc), scenario_state(sc)
    values, masks = {}, {}
    rows, ok = average_series(ts, rho0, ham,
                              [PAULI["x"], PAULI["y"], PAULI["z"]], cfg)
    for name, row in zip(("sx", "sy", "sz"), rows):
        values[name], masks[name] = row, ok
    for pair in FAMILY_PAIRS[sc.init]:
        xi, chi = PAIR_OPERATORS[pair]
        for kind, suffix in ((KIND_NONLINEAR, ""), (KIND_LINEAR, "_l")):
            vals, vok = correlation_series(kind, xi, chi, ts, rho0, ham, cfg)
            values[f"c_{pair}{suffix}"] = vals
            masks[f"c_{pair}{suffix}"] = vok
    return values, masks


def oracle_field_series(sc: TlsScenario, ts):
    """Oracle values and defined-masks per field over a grid."""
    fields = FAMILY_FIELDS[sc.init]
    values = {name: np.zeros(len(ts), dtype=complex) for name in fields}
    defined = {name: np.zeros(len(ts), dtype=bool) for name in fields}
    for i, t in enumerate(ts):
        sample = oracle_sample(sc, float(t))
        for name in fields:
            v = sample.value(name)
            if v is not None:
                values[name][i] = v
                defined[name][i] = True
    return values, defined
