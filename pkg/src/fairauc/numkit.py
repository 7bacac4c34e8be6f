"""Small dense symmetric linear algebra and the standard normal CDF."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .exceptions import SingularMatrix

# relative pivot floor: pivots below this fraction of the largest diagonal
# entry are treated as non-positive
_PIVOT_RTOL = 1e-13
_AUTO_RIDGE_SCALE = 1e-9


def normal_cdf(x):
    """Standard normal CDF, vectorized.

    Raises ``ValueError`` for non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("normal_cdf requires finite input")
    out = ndtr(arr)
    if out.ndim == 0:
        return float(out)
    return out


def as_symmetric(m):
    """Return ``m`` as a float array, symmetrized from its lower triangle."""
    a = np.array(m, dtype=float, ndmin=2)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    lower = np.tril(a)
    return lower + np.tril(a, -1).T


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor ``lower`` with ``lower @ lower.T == m + ridge*I``."""

    lower: np.ndarray
    ridge: float = 0.0

    @property
    def dim(self):
        return self.lower.shape[0]

    def solve_lower(self, b):
        return _forward(self.lower, np.asarray(b, dtype=float))

    def solve(self, b):
        """Solve ``(m + ridge*I) x = b``."""
        y = self.solve_lower(b)
        return _backward(self.lower, y)


def _forward(lower, b):
    n = lower.shape[0]
    y = np.empty(n, dtype=float)
    for i in range(n):
        y[i] = (b[i] - lower[i, :i] @ y[:i]) / lower[i, i]
    return y


def _backward(lower, y):
    n = lower.shape[0]
    x = np.empty(n, dtype=float)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - lower[i + 1:, i] @ x[i + 1:]) / lower[i, i]
    return x


def _factor(a):
    n = a.shape[0]
    lower = np.zeros_like(a)
    floor = _PIVOT_RTOL * max(float(np.max(np.abs(np.diag(a)))), np.finfo(float).tiny)
    for j in range(n):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if not pivot > floor:
            raise SingularMatrix(j)
        d = math.sqrt(pivot)
        lower[j, j] = d
        if j + 1 < n:
            lower[j + 1:, j] = (a[j + 1:, j] - lower[j + 1:, :j] @ lower[j, :j]) / d
    return lower


def cholesky(m, ridge=0.0):
    """Factor ``m + ridge*I``.

    When ``ridge`` is 0 and the factorization fails, one retry is made with
    ``1e-9 * trace(m) / dim`` on the diagonal before giving up.

    Raises
    ------
    SingularMatrix
        If the (ridged) matrix is not numerically positive definite.
    """
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    a = as_symmetric(m)
    n = a.shape[0]
    try:
        return CholeskyFactor(_factor(a + ridge * np.eye(n)), float(ridge))
    except SingularMatrix:
        if ridge != 0:
            raise
    auto = _AUTO_RIDGE_SCALE * float(np.trace(a)) / n
    if not auto > 0:
        raise SingularMatrix(0, "matrix has nonpositive trace; cannot ridge")
    return CholeskyFactor(_factor(a + auto * np.eye(n)), auto)


def quad_form(m, v, ridge=0.0):
    """Compute ``v' (m + ridge*I)^{-1} v`` through two triangular solves."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    a = as_symmetric(m)
    if a.shape[0] != v.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {a.shape[0]}, vector {v.shape[0]}")
    if not np.any(v):
        return 0.0
    y = cholesky(a, ridge).solve_lower(v)
    return float(y @ y)


def spd_solve(m, b, ridge=0.0):
    """Solve ``(m + ridge*I) x = b`` for symmetric positive definite ``m``."""
    return cholesky(m, ridge).solve(np.atleast_1d(np.asarray(b, dtype=float)))
