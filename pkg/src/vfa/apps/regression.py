"""Sinc-kernel regression realised with function vectors.

The kernel with bandwidth ``c`` is ``K_c(x, X) = (c/pi) sinc((c/pi)(x - X))``
(normalised sinc).  Both estimators encode the training inputs at
``(c/pi) X`` and read out at ``(c/pi) x``:

* empirical projection: ``f(x) = (2/k) sum_i Y_i K_c(x, X_i)``;
* Tikhonov: ``f(x) = sum_i C_i K_c(x, X_i)`` with ``(G + k lam I) C = Y`` and
  ``G_ij = K_c(X_i, X_j)`` taken from VFA inner products.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from ..errors import DomainViolation, LengthMismatch, SingularSystem, VFAError
from ..fpe import FpeEncoder
from ..functions import FunctionVector, eval_many, from_samples
from .density import kernel_matrix


def target(x) -> np.ndarray:
    """Test function ``sin(20x) / (20x)``."""
    return np.sinc(20.0 * np.asarray(x, dtype=float) / np.pi)


@dataclass(frozen=True, eq=False)
class RegressionEstimator:
    """Fitted regression.  ``y_X`` is None for the exact-kernel variant."""

    method: str
    c: float
    lam: Optional[float]
    y_X: Optional[FunctionVector]
    X: np.ndarray
    Y: np.ndarray
    coeffs: np.ndarray

    def __call__(self, x):
        return regress_eval(self, x)


def _tikhonov_solve(gram: np.ndarray, Y: np.ndarray, k: int, lam: float) -> np.ndarray:
    a = gram + k * lam * np.eye(k)
    try:
        factor = linalg.cho_factor(a, lower=True)
        C = linalg.cho_solve(factor, Y)
    except linalg.LinAlgError as exc:
        raise SingularSystem("regularised Gram matrix is not positive definite") from exc
    if not np.all(np.isfinite(C)) or np.linalg.norm(a @ C - Y) >= 1e-8 * max(np.linalg.norm(Y), 1e-300):
        raise SingularSystem("Gram system residual too large (matrix is numerically singular)")
    return C


def regress_fit(X, Y, method: str = "tikhonov", c: float = 30.0, enc: Optional[FpeEncoder] = None,
                lam: float = 0.01) -> RegressionEstimator:
    """Fit ``empirical`` projection or ``tikhonov`` regression.

    With ``enc`` the kernel is the sampled FPE kernel; without it the exact
    sinc kernel is used (the numeric reference).
    """
    X = np.atleast_1d(np.asarray(X, dtype=float))
    Y = np.atleast_1d(np.asarray(Y, dtype=float))
    if X.size != Y.size:
        raise LengthMismatch(f"{X.size} inputs but {Y.size} targets")
    if X.size == 0:
        raise VFAError("need at least one training sample")
    if c <= 0:
        raise VFAError("bandwidth c must be positive")
    k = X.size
    w = c / np.pi
    if method == "empirical":
        if np.any(np.abs(X) > 1.0):
            raise DomainViolation("empirical projection needs inputs in [-1, 1]")
        coeffs = 2.0 * w / k * Y
        lam_used = None
    elif method == "tikhonov":
        if lam < 0:
            raise VFAError("lambda must be >= 0")
        gram = w * kernel_matrix(enc, w * X)
        C = _tikhonov_solve(gram, Y, k, lam)
        coeffs = w * C
        lam_used = float(lam)
    else:
        raise VFAError(f"unknown regression method {method!r}")
    y_X = from_samples(enc, w * X, coeffs) if enc is not None else None
    return RegressionEstimator(method, float(c), lam_used, y_X, X, Y, coeffs)


def regress_eval(est: RegressionEstimator, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    w = est.c / np.pi
    if est.y_X is None:
        out = np.sinc(w * (flat[:, None] - est.X[None, :])) @ est.coeffs
    else:
        out = eval_many(est.y_X, w * flat)
    return out.reshape(x.shape) if x.ndim else float(out[0])


def draw_training(k: int, rng: np.random.Generator, noise_var: float = 0.01):
    """``X ~ U[-1, 1]`` and ``Y = target(X) + N(0, noise_var)``."""
    X = rng.uniform(-1.0, 1.0, k)
    Y = target(X) + rng.normal(0.0, np.sqrt(noise_var), k)
    return X, Y


def eval_grid() -> np.ndarray:
    return np.linspace(-1.0, 1.0, 1001)


def rmse(est: RegressionEstimator, grid=None) -> float:
    grid = eval_grid() if grid is None else grid
    return float(np.sqrt(np.mean((regress_eval(est, grid) - target(grid)) ** 2)))
