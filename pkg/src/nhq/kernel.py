"""Dense complex small-matrix primitives.

Everything here is a pure function of its inputs: exponentials, commutators,
Hermitian spectra and positivity checks for the small operators the rest of
the package moves around.
"""

import numpy as np

# Relative Hermiticity tolerance used by every operation that requires a
# Hermitian input. All operators built by this package are Hermitian by
# construction, so this only guards against caller mistakes.
HERMITICITY_TOL = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

for _m in (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z):
    _m.setflags(write=False)


def as_complex_matrix(a) -> np.ndarray:
    """Validate and copy ``a`` into a square complex128 array."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def _require_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def require_hermitian(a, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Return ``a`` as a validated matrix, or raise if it is not Hermitian
    to relative tolerance ``tol`` in the Frobenius norm."""
    m = as_complex_matrix(a)
    defect = np.linalg.norm(m - m.conj().T)
    if defect > tol * max(np.linalg.norm(m), tol):
        raise ValueError(
            f"matrix is not Hermitian: ||a - a^dag|| = {defect:.3e} "
            f"exceeds {tol:.1e} * ||a||"
        )
    return m


def mat_exp(a) -> np.ndarray:
    """Matrix exponential ``e^a``.

    For 2x2 inputs the exponential is evaluated in closed form through the
    identity/traceless split (the traceless part squares to a multiple of
    the identity), which is exact up to rounding for any argument size this
    package produces.  Larger matrices use scaling-and-squaring with a
    truncated series.
    """
    m = as_complex_matrix(a)
    if m.shape[0] == 2:
        return _exp_2x2(m)
    return _exp_scaled_series(m)


def _exp_2x2(m: np.ndarray) -> np.ndarray:
    alpha = 0.5 * (m[0, 0] + m[1, 1])
    b = m - alpha * IDENTITY2
    # b is traceless, so b @ b == r2 * I with the scalar below.
    r2 = b[0, 0] * b[0, 0] + b[0, 1] * b[1, 0]
    r = np.sqrt(r2)
    if abs(r) < 1e-8:
        # removable singularity of sinh(r)/r at r = 0
        ch = 1.0 + r2 / 2.0 + r2 * r2 / 24.0
        shr = 1.0 + r2 / 6.0 + r2 * r2 / 120.0
    else:
        ch = np.cosh(r)
        shr = np.sinh(r) / r
    return np.exp(alpha) * (ch * IDENTITY2 + shr * b)


def _exp_scaled_series(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    nrm = np.linalg.norm(m, np.inf)
    s = max(0, int(np.ceil(np.log2(nrm))) + 1) if nrm > 0 else 0
    x = m / (2.0**s)
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 40):
        term = term @ x / k
        out = out + term
        if np.linalg.norm(term, np.inf) <= 1e-18 * np.linalg.norm(out, np.inf):
            break
    for _ in range(s):
        out = out @ out
    return out


def commutator(a, b) -> np.ndarray:
    """``ab - ba``."""
    x = as_complex_matrix(a)
    y = as_complex_matrix(b)
    _require_same_dim(x, y)
    return x @ y - y @ x


def anticommutator(a, b) -> np.ndarray:
    """``ab + ba``."""
    x = as_complex_matrix(a)
    y = as_complex_matrix(b)
    _require_same_dim(x, y)
    return x @ y + y @ x


def hermitian_eigenvalues(a, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, ascending."""
    m = require_hermitian(a, tol)
    return np.linalg.eigvalsh(m)


def psd_check(a, tol: float, htol: float = HERMITICITY_TOL):
    """Positive semi-definiteness test for a Hermitian matrix.

    Returns ``(is_psd, min_eig)`` where ``is_psd`` holds iff the smallest
    eigenvalue is at least ``-tol``.
    """
    evs = hermitian_eigenvalues(a, htol)
    min_eig = float(evs[0])
    return min_eig >= -tol, min_eig
