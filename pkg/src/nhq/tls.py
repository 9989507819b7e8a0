"""Benchmark two-level models with closed-form solutions.

Three decay operators share the Hermitian part ``-delta * sigma_x``
(``delta > 0``):

* ``ed`` -- exponential decay with conserved average energy,
  ``G = delta (a2 sigma_y + sigma_z + gamma I)``;
* ``pd`` -- polynomial decay with conserved average energy,
  ``G = delta (sigma_z + gamma I)``;
* ``dph`` -- asymptotic dephasing,
  ``G = -delta (sigma_y - gamma (sigma_z + I))``.

For the ``ed`` and ``pd`` models the identity shift ``gamma I`` cancels out
of every normalized observable; for ``dph`` the same parameter enters the
operator part and matters.

The initial states are the two one-parameter families
``rho_x = (I + sigma_x - nu sigma_y)/2`` and
``rho_z = (I + sigma_z - nu sigma_y)/2``; both have unit trace, satisfy
``tr(sigma_k rho) = 1`` for the matching axis, and are positive
semi-definite exactly at ``nu = 0`` (eigenvalues ``(1 +- sqrt(1+nu^2))/2``).

Every known closed-form average, autocorrelation and cross-correlation for
these models is evaluated here and serves as the oracle for the numerical
layer.  Ratios are returned as published-form numerator/denominator pairs;
denominator zeros yield flagged undefined fields rather than exceptions.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateLimitError
from .evolution import HamiltonianSplit, StateMatrix
from .kernel import IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z

MODEL_ED = "ed"
MODEL_PD = "pd"
MODEL_DPH = "dph"
MODELS = (MODEL_ED, MODEL_PD, MODEL_DPH)

INIT_X = "x"
INIT_Z = "z"
INITS = (INIT_X, INIT_Z)

# An oracle ratio whose denominator is below this is an undefined sample.
DENOM_TOL = 1e-12

# Correlation pairs exposed by the CLI: (left insertion, final measurement).
# "ii" is a diagnostic pair; its series is identically one.
PAIR_OPERATORS = {
    "xx": (SIGMA_X, SIGMA_X),
    "zz": (SIGMA_Z, SIGMA_Z),
    "zx": (SIGMA_Z, SIGMA_X),
    "zy": (SIGMA_Z, SIGMA_Y),
    "ii": (IDENTITY2, IDENTITY2),
}

# Closed forms exist for these fields, per initial family.
FAMILY_FIELDS = {
    INIT_X: ("sx", "sy", "sz", "c_xx", "c_xx_l"),
    INIT_Z: ("sx", "sy", "sz", "c_zz", "c_zz_l",
             "c_zx", "c_zx_l", "c_zy", "c_zy_l"),
}

# Correlation pairs with closed forms, per initial family.
FAMILY_PAIRS = {
    INIT_X: ("xx",),
    INIT_Z: ("zz", "zx", "zy"),
}


@dataclass(frozen=True)
class TlsScenario:
    """Model selector plus parameters for the benchmark systems."""

    model: str
    delta: float = 1.0
    a2: float = 0.0
    gamma_param: float = 0.0
    nu: float = 0.0
    init: str = INIT_X

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.init not in INITS:
            raise ValueError(f"unknown initial family {self.init!r}")
        if not (self.delta > 0.0):
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class OracleSample:
    """Closed-form values at one time; ``None`` fields are not populated for
    the scenario's family, and names in ``undefined`` hit a denominator zero."""

    t: float
    sx: Optional[complex] = None
    sy: Optional[complex] = None
    sz: Optional[complex] = None
    c_xx: Optional[complex] = None
    c_xx_l: Optional[complex] = None
    c_zz: Optional[complex] = None
    c_zz_l: Optional[complex] = None
    c_zx: Optional[complex] = None
    c_zx_l: Optional[complex] = None
    c_zy: Optional[complex] = None
    c_zy_l: Optional[complex] = None
    undefined: frozenset = field(default_factory=frozenset)

    def value(self, name: str) -> Optional[complex]:
        return getattr(self, name)


def erratum_fields(sc: TlsScenario) -> frozenset:
    """Oracle fields stored in corrected form.

    The closed form usually quoted for the pd model's x-family ``sx`` is
    identically zero, which contradicts the t=0 normalization constraint,
    the a2->0 limit of the ed model and direct integration; the oracle
    stores the corrected ratio instead (see README).
    """
    if sc.model == MODEL_PD and sc.init == INIT_X:
        return frozenset({"sx"})
    return frozenset()


def build_model(sc: TlsScenario) -> HamiltonianSplit:
    """Hamiltonian split for a scenario: common Hermitian part, per-model
    decay operator."""
    d = sc.delta
    h_plus = -d * SIGMA_X
    if sc.model == MODEL_ED:
        gamma = d * (sc.a2 * SIGMA_Y + SIGMA_Z + sc.gamma_param * IDENTITY2)
    elif sc.model == MODEL_PD:
        gamma = d * (SIGMA_Z + sc.gamma_param * IDENTITY2)
    else:
        gamma = -d * (SIGMA_Y - sc.gamma_param * (SIGMA_Z + IDENTITY2))
    return HamiltonianSplit(h_plus=h_plus, gamma=gamma)


def initial_state(init: str, nu: float) -> StateMatrix:
    """Initial density matrix of the requested family."""
    if init == INIT_X:
        m = 0.5 * (IDENTITY2 + SIGMA_X - nu * SIGMA_Y)
    elif init == INIT_Z:
        m = 0.5 * (IDENTITY2 + SIGMA_Z - nu * SIGMA_Y)
    else:
        raise ValueError(f"unknown initial family {init!r}")
    return StateMatrix(m, normalized=True)


def scenario_state(sc: TlsScenario) -> StateMatrix:
    return initial_state(sc.init, sc.nu)


class _RatioSet:
    """Collects name -> numerator/denominator ratios, flagging denominator
    zeros as undefined instead of dividing."""

    def __init__(self):
        self.values = {}
        self.undefined = set()

    def put(self, name: str, num: complex, den: complex):
        if abs(den) < DENOM_TOL:
            self.undefined.add(name)
        else:
            self.values[name] = complex(num) / complex(den)

    def sample(self, t: float) -> OracleSample:
        return OracleSample(t=t, undefined=frozenset(self.undefined),
                            **self.values)


def _exp_combo(x: float, ch=0.0, sh=0.0, dec=0.0, const=0.0) -> complex:
    """``ch cosh(x) + sh sinh(x) + dec e^{-x} + const`` evaluated in the
    exponential basis.

    Coefficient cancellations (e.g. a vanishing growing mode) then happen
    exactly in parameter space instead of catastrophically between
    t-dependent terms, which keeps the oracle accurate to rounding even
    where the combination is exponentially smaller than cosh(x).
    """
    return (0.5 * (ch + sh) * np.exp(x)
            + (0.5 * (ch - sh) + dec) * np.exp(-x)
            + const)


def _ed_sample(sc: TlsScenario, t: float) -> OracleSample:
    a2, nu, d = sc.a2, sc.nu, sc.delta
    x = 2.0 * a2 * d * t

    def s_den(b):
        return _exp_combo(x, ch=a2 * a2 - b + 1.0, sh=a2 * a2 * b, const=b - 1.0)

    def t_den(b):
        return _exp_combo(x, ch=a2 * a2 - a2 - b + 1.0,
                          sh=-a2 * (1.0 - a2 * b), const=a2 + b - 1.0)

    r = _RatioSet()
    if sc.init == INIT_X:
        s_nu = s_den(nu)
        r.put("sx", a2 * a2, s_nu)
        r.put("sy", _exp_combo(x, ch=nu * (1.0 - a2 * a2) - 1.0,
                               sh=-a2 * a2, const=1.0 - nu), s_nu)
        r.put("sz", _exp_combo(x, dec=a2 * (1.0 - nu),
                               const=-a2 * (1.0 - nu)), s_nu)
        r.put("c_xx", a2 * a2,
              _exp_combo(x, ch=a2 * a2 + 1j * nu * a2 + 1.0,
                         sh=1j * nu * a2, const=-1j * nu * a2 - 1.0))
        r.put("c_xx_l", a2 * a2, s_nu)
    else:
        t_nu, t_0 = t_den(nu), t_den(0.0)
        r.put("sx", 0.0, 1.0)
        r.put("sy", _exp_combo(x, ch=(a2 - 1.0) * (1.0 - nu * (a2 + 1.0)),
                               sh=-a2 * (a2 - 1.0),
                               const=-(a2 - 1.0) - nu), t_nu)
        r.put("sz", _exp_combo(x, dec=a2 * (1.0 - nu),
                               const=a2 * a2 - a2 * (1.0 - nu)), t_nu)
        corr_num = _exp_combo(x, dec=a2, const=a2 * (a2 - 1.0))
        r.put("c_zz", corr_num, t_0)
        r.put("c_zz_l", corr_num, t_nu)
        r.put("c_zx", 1j * a2 * a2 * nu, t_0)
        r.put("c_zx_l", 1j * a2 * a2 * nu, t_nu)
        cross_num = _exp_combo(x, ch=a2 - 1.0, sh=-a2 * (a2 - 1.0),
                               const=-(a2 - 1.0))
        r.put("c_zy", cross_num, t_0)
        r.put("c_zy_l", cross_num, t_nu)
    return r.sample(t)


def _pd_sample(sc: TlsScenario, t: float) -> OracleSample:
    nu, d = sc.nu, sc.delta

    def s_den(b):
        return 2.0 * d * d * (1.0 - b) * t * t + 1.0

    def t_den(b):
        return 2.0 * d * (d * (1.0 - b) * t - 1.0) * t + 1.0

    r = _RatioSet()
    if sc.init == INIT_X:
        s_nu = s_den(nu)
        # corrected form; the usually quoted value is identically zero
        # (see erratum_fields)
        r.put("sx", 1.0, s_nu)
        r.put("sy", 1.0 - nu - s_nu, s_nu)
        r.put("sz", 2.0 * d * (nu - 1.0) * t, s_nu)
        r.put("c_xx", 1.0, s_den(0.0) + 2j * nu * d * t)
        r.put("c_xx_l", 1.0, s_nu)
    else:
        t_nu, t_0 = t_den(nu), t_den(0.0)
        r.put("sx", 0.0, 1.0)
        r.put("sy", 1.0 - nu - t_nu, t_nu)
        r.put("sz", 1.0 - 2.0 * d * (1.0 - nu) * t, t_nu)
        corr_num = 1.0 - 2.0 * d * t
        r.put("c_zz", corr_num, t_0)
        r.put("c_zz_l", corr_num, t_nu)
        r.put("c_zx", 1j * nu, t_0)
        r.put("c_zx_l", 1j * nu, t_nu)
        cross_num = 2.0 * d * (1.0 - d * t) * t
        r.put("c_zy", cross_num, t_0)
        r.put("c_zy_l", cross_num, t_nu)
    return r.sample(t)


def _dph_sample(sc: TlsScenario, t: float) -> OracleSample:
    g, nu, d = sc.gamma_param, sc.nu, sc.delta
    x = 2.0 * g * d * t
    gt2 = g * g + 1.0

    def s_den(b):
        return _exp_combo(x, ch=gt2 - b * g, sh=-b * g, const=b * g - 1.0)

    def t_den(b):
        return _exp_combo(x, ch=gt2 - b * g + 1.0, sh=-g * (g + b),
                          const=b * g - 2.0)

    r = _RatioSet()
    if sc.init == INIT_X:
        s_nu = s_den(nu)
        r.put("sx", g * g, s_nu)
        r.put("sy", _exp_combo(x, dec=-g, const=g * (1.0 - nu * g)), s_nu)
        r.put("sz", _exp_combo(x, ch=-(gt2 - nu * g), sh=nu * g,
                               dec=g * g, const=1.0 - nu * g), s_nu)
        r.put("c_xx", g * g,
              _exp_combo(x, ch=gt2 - 1j * nu, sh=1j * nu * g * g,
                         const=-1.0 + 1j * nu))
        r.put("c_xx_l", g * g, s_nu)
    else:
        t_nu, t_0 = t_den(nu), t_den(0.0)
        r.put("sx", 0.0, 1.0)
        r.put("sy", _exp_combo(x, dec=-2.0 * g, const=g * (2.0 - nu * g)),
              t_nu)
        r.put("sz", _exp_combo(x, ch=-(gt2 - nu * g + 1.0), sh=g * (g + nu),
                               dec=2.0 * g * g, const=2.0 - nu * g), t_nu)
        corr_num = _exp_combo(x, ch=gt2 - 3.0, sh=-g * g, const=2.0)
        r.put("c_zz", corr_num, t_0)
        r.put("c_zz_l", corr_num, t_nu)
        r.put("c_zx", 1j * g * g * nu, t_0)
        r.put("c_zx_l", 1j * g * g * nu, t_nu)
        cross_num = _exp_combo(x, dec=-2.0 * g, const=2.0 * g)
        r.put("c_zy", cross_num, t_0)
        r.put("c_zy_l", cross_num, t_nu)
    return r.sample(t)


def oracle_sample(sc: TlsScenario, t: float) -> OracleSample:
    """Closed-form values of every published series for the scenario at
    time ``t >= 0``."""
    if t < 0.0:
        raise ValueError("oracle times must be non-negative")
    if sc.model == MODEL_ED:
        return _ed_sample(sc, t)
    if sc.model == MODEL_PD:
        return _pd_sample(sc, t)
    return _dph_sample(sc, t)


def _theta(x: float) -> float:
    # callers exclude x == 0 before getting here
    return 1.0 if x > 0.0 else 0.0


def oracle_asymptote(sc: TlsScenario) -> OracleSample:
    """Long-time limits of the closed forms.

    Raises :class:`DegenerateLimitError` where the limit expressions lose
    their dominant balance: zero decay rate (``ed`` with ``a2 = 0``, ``dph``
    with ``gamma = 0``) and the ``ed`` z-family at ``a2 = 1`` (there the
    nonlinear autocorrelation is constant and the generic limit is wrong).
    """
    nu = sc.nu
    r = _RatioSet()
    if sc.model == MODEL_ED:
        a2 = sc.a2
        rate = 2.0 * a2 * sc.delta
        if rate == 0.0:
            raise DegenerateLimitError(
                "ed long-time limits are undefined at a2 = 0 (zero rate); "
                "use the pd model instead")
        if sc.init == INIT_Z and a2 == 1.0:
            raise DegenerateLimitError(
                "ed z-family limits are degenerate at a2 = 1: the nonlinear "
                "autocorrelation stays constant and the generic limit "
                "formulas do not apply")
        th = _theta(-rate)
        sy = -(((1.0 - a2 * a2) / (1.0 + a2 * a2)) ** th)
        sz = 2.0 * th * a2 / (1.0 + a2 * a2)
        r.put("sx", 0.0, 1.0)
        r.put("sy", sy, 1.0)
        r.put("sz", sz, 1.0)
        if sc.init == INIT_X:
            r.put("c_xx", 0.0, 1.0)
            r.put("c_xx_l", 0.0, 1.0)
        else:
            r.put("c_zz", sz, 1.0)
            r.put("c_zz_l", sz, 1.0 - nu)
    elif sc.model == MODEL_PD:
        r.put("sx", 0.0, 1.0)
        r.put("sy", -1.0, 1.0)
        r.put("sz", 0.0, 1.0)
        if sc.init == INIT_X:
            r.put("c_xx", 0.0, 1.0)
            r.put("c_xx_l", 0.0, 1.0)
        else:
            r.put("c_zz", 0.0, 1.0)
            # Kronecker delta in nu: exactly one at nu == 1
            r.put("c_zz_l", 1.0 if nu == 1.0 else 0.0, 1.0)
    else:
        g = sc.gamma_param
        rate = 2.0 * g * sc.delta
        if rate == 0.0:
            raise DegenerateLimitError(
                "dph long-time limits are undefined at gamma = 0 (zero rate)")
        gt2 = g * g + 1.0
        th = _theta(-rate)
        sy = -2.0 * g * th / gt2
        sz = -(((1.0 - g * g) / gt2) ** th)
        r.put("sx", 0.0, 1.0)
        r.put("sy", sy, 1.0)
        r.put("sz", sz, 1.0)
        if sc.init == INIT_X:
            r.put("c_xx", 0.0, 1.0)
            r.put("c_xx_l", 0.0, 1.0)
        else:
            r.put("c_zz", sz, 1.0)
            if rate > 0.0:
                r.put("c_zz_l", 1.0, nu * g - 1.0)
            else:
                # the growing mode dominates both kinds equally, so the
                # limit equals the nonlinear one (the sign sometimes quoted
                # for this branch disagrees with direct integration)
                r.put("c_zz_l", (g * g - 1.0), gt2)
    return r.sample(math.inf)
