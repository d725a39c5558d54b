"""Dense matrix kernels: exponential, principal logarithm, spectral norm.

Everything here is deterministic: fixed-order approximants, fixed iteration
budgets, no randomized pivoting. That keeps every downstream report
bit-reproducible for identical inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import GuardError, ValidationError

# Pade(13) numerator coefficients for expm, b[0] is the constant term.
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
# Largest 1-norm for which the order-13 approximant alone is accurate.
_PADE13_THETA = 5.371920351148152


def as_square_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and return ``m`` as a finite square float64 array."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def expm(m) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a fixed Pade(13) core.

    Relative accuracy is ~1e-15 for ||m|| <= theta_13 and stays below 1e-12
    well past spectral norm 10; inputs are validated finite and the result is
    guarded against overflow.
    """
    a = as_square_matrix(m)
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    squarings = 0
    if norm > _PADE13_THETA:
        squarings = int(np.ceil(np.log2(norm / _PADE13_THETA)))
        a = a / (2.0**squarings)

    ident = np.eye(n)
    b = _PADE13
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (
        a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
        + b[7] * a6
        + b[5] * a4
        + b[3] * a2
        + b[1] * ident
    )
    v = (
        a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
        + b[6] * a6
        + b[4] * a4
        + b[2] * a2
        + b[0] * ident
    )
    result = np.linalg.solve(v - u, v + u)
    for _ in range(squarings):
        result = result @ result
    if not np.all(np.isfinite(result)):
        raise GuardError("matrix exponential overflowed to non-finite values")
    return result


def _sqrtm_newton(a: np.ndarray, max_iter: int = 60, tol: float = 1e-15) -> np.ndarray:
    """Principal square root by the Denman-Beavers iteration.

    Valid for matrices with no eigenvalues on the closed negative real axis,
    which holds everywhere logm_principal is allowed to call it.
    """
    y = a.copy()
    z = np.eye(a.shape[0])
    for _ in range(max_iter):
        y_next = 0.5 * (y + np.linalg.inv(z))
        z_next = 0.5 * (z + np.linalg.inv(y))
        delta = np.linalg.norm(y_next - y, "fro")
        y, z = y_next, z_next
        if delta <= tol * max(1.0, np.linalg.norm(y, "fro")):
            break
    return y


def logm_principal(m) -> np.ndarray:
    """Principal matrix logarithm for matrices near the identity.

    Requires spectral_norm(m - I) < 1 (the caller keeps horizons short); the
    computation is inverse scaling-and-squaring: repeated principal square
    roots pull the argument close to I, then log is summed from the inverse
    hyperbolic tangent series, which converges geometrically there.
    """
    a = as_square_matrix(m)
    n = a.shape[0]
    ident = np.eye(n)
    gap = spectral_norm(a - ident)
    if gap >= 1.0:
        raise GuardError(
            f"logm_principal needs spectral_norm(m - I) < 1, got {gap:.3g}; "
            "split the horizon before taking logarithms"
        )
    sqrt_count = 0
    x = a
    while np.linalg.norm(x - ident, "fro") > 0.25 and sqrt_count < 40:
        x = _sqrtm_newton(x)
        sqrt_count += 1
    # log(x) = 2*atanh(z) with z = (x - I)(x + I)^-1; ||z|| <= ~0.13 here.
    z = np.linalg.solve((x + ident).T, (x - ident).T).T
    z2 = z @ z
    term = z.copy()
    total = z.copy()
    for k in range(3, 25, 2):
        term = term @ z2
        total = total + term / k
    return (2.0**(sqrt_count + 1)) * total


def spectral_norm(m, tol: float = 1e-10, max_iter: int = 500) -> float:
    """Largest singular value via power iteration on m^T m.

    Deterministic start vector; the loop exits when the Rayleigh estimate
    stabilizes to ``tol`` relatively. Exact ties among singular values are
    harmless (any iterate already lies in the dominant eigenspace).
    """
    a = np.asarray(m, dtype=float)
    if a.size == 0:
        return 0.0
    if not np.all(np.isfinite(a)):
        raise ValidationError("spectral_norm input has non-finite entries")
    gram_scale = np.max(np.abs(a))
    if gram_scale == 0.0:
        return 0.0
    n = a.shape[1]
    # Slightly tilted ones vector avoids starting orthogonal to the top space.
    v = 1.0 + 1e-3 * np.arange(n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iter):
        w = a.T @ (a @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        new_estimate = float(np.sqrt(v @ w))
        v = w / norm_w
        if abs(new_estimate - estimate) <= tol * max(new_estimate, 1e-300):
            return new_estimate
        estimate = new_estimate
    return estimate


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m, dtype=float), "fro"))
