"""Band-limited maximum-likelihood density estimation (BLMLTrivial).

For samples ``r_1..r_k`` and cut-off ``f_c`` the estimate is

    p(r) = ((f_c / k) * sum_j c_j K(f_c (r - r_j)))**2

with ``K`` the sinc kernel and ``c`` the root of

    rho(c)_i = (f_c / k) * sum_j c_j K(f_c (r_i - r_j)) - 1 / c_i

in the all-positive orthant.  The factor ``f_c`` in ``rho`` makes the
estimate integrate to one.  The VFA variant uses the sampled kernel of an
FPE encoder both in the Gram matrix and in the readout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from ..core import make_rng
from ..errors import InvalidDensity, NoConvergence, NonPositiveGram, VFAError
from ..fpe import FpeEncoder
from ..functions import FunctionVector, eval_many, from_samples

ETA = 0.5
TOL = 1e-8
MAX_ITER = 10_000
NEWTON_ITER = 200


def surrogate_pdf(x) -> np.ndarray:
    """Band-limited test density ``0.078 (sinc^2(0.2x) + sinc^2(0.2x + 0.2))^2`` (cut-off 0.4 Hz)."""
    x = np.asarray(x, dtype=float)
    return 0.078 * (np.sinc(0.2 * x) ** 2 + np.sinc(0.2 * x + 0.2) ** 2) ** 2


_SUR_GRID = np.linspace(-2000.0, 2000.0, 400_001)
_SUR_CDF = None


def sample_surrogate(k: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``k`` samples from :func:`surrogate_pdf` by tabulated inverse CDF."""
    global _SUR_CDF
    if _SUR_CDF is None:
        cdf = integrate.cumulative_trapezoid(surrogate_pdf(_SUR_GRID), _SUR_GRID, initial=0.0)
        _SUR_CDF = cdf / cdf[-1]
    return np.interp(rng.uniform(0.0, 1.0, k), _SUR_CDF, _SUR_GRID)


def kernel_matrix(enc: Optional[FpeEncoder], points) -> np.ndarray:
    """Real kernel Gram matrix: sampled FPE kernel, or exact sinc when ``enc`` is None."""
    a = np.asarray(points, dtype=float)
    if enc is None:
        return np.sinc(a[:, None] - a[None, :])
    arg = np.outer(a, enc.phases)
    c, s = np.cos(arg), np.sin(arg)
    return (c @ c.T + s @ s.T) / enc.n


def rho(c, gram, f_c: float) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    return f_c / c.size * gram @ c - 1.0 / c


def solve_orthant(gram: np.ndarray, f_c: float, eta: float = ETA, tol: float = TOL, max_iter: int = MAX_ITER):
    """Positive root of ``rho``: damped fixed point with a Newton fallback.

    Returns ``(c, iterations, method)``.
    """
    k = gram.shape[0]
    c = np.ones(k)
    scale = f_c / k
    best = np.inf
    stall = 0
    for it in range(1, max_iter + 1):
        kc = scale * gram @ c
        if np.any(kc <= 0):
            break
        c_new = (1 - eta) * c + eta / kc
        step = np.max(np.abs(c_new - c))
        c = c_new
        if step < tol:
            r = np.max(np.abs(rho(c, gram, f_c)))
            if r < 1e-6:
                return c, it, "fixed-point"
        if step < best * 0.999:
            best, stall = step, 0
        else:
            stall += 1
            if stall > 200:
                break
    c = _newton(gram, f_c, tol)
    return c, max_iter, "newton"


def _newton(gram, f_c, tol):
    # minimise the convex F(c) = (f_c / 2k) c'Gc - sum(log c); grad F = rho
    k = gram.shape[0]
    scale = f_c / k
    c = np.ones(k)

    def objective(v):
        return 0.5 * scale * v @ gram @ v - np.sum(np.log(v))

    f = objective(c)
    for _ in range(NEWTON_ITER):
        g = scale * gram @ c - 1.0 / c
        if np.max(np.abs(g)) < tol:
            return c
        h = scale * gram + np.diag(1.0 / c ** 2)
        try:
            step = np.linalg.solve(h, g)
        except np.linalg.LinAlgError as exc:
            raise NonPositiveGram("Newton system is singular") from exc
        t = 1.0
        while True:
            trial = c - t * step
            if np.all(trial > 0):
                ft = objective(trial)
                if ft <= f - 1e-4 * t * (g @ step):
                    break
            t *= 0.5
            if t < 1e-12:
                raise NoConvergence("line search failed in the positive orthant")
        c, f = trial, ft
    if np.max(np.abs(rho(c, gram, f_c))) < 1e-6:
        return c
    raise NoConvergence("BLML solver did not converge")


@dataclass(frozen=True, eq=False)
class DensityEstimator:
    """Fitted BLML density; ``y_p`` is None for the exact-kernel variant."""

    y_p: Optional[FunctionVector]
    f_c: float
    c_hat: np.ndarray
    samples: np.ndarray
    method: str = "fixed-point"

    def __call__(self, r):
        return blml_eval(self, r)


def blml_fit(samples, f_c: float, enc: Optional[FpeEncoder] = None) -> DensityEstimator:
    """Fit BLMLTrivial.  With ``enc`` the kernel comes from VFA inner products."""
    x = np.atleast_1d(np.asarray(samples, dtype=float))
    if x.size < 1:
        raise VFAError("need at least one sample")
    if f_c <= 0:
        raise InvalidDensity("cut-off frequency must be positive")
    k = x.size
    gram = kernel_matrix(enc, f_c * x)
    c, _, method = solve_orthant(gram, f_c)
    y_p = None
    if enc is not None:
        y_p = from_samples(enc, f_c * x, f_c / k * c)
    return DensityEstimator(y_p, float(f_c), c, x, method)


def blml_eval(est: DensityEstimator, r) -> np.ndarray:
    """Density estimate at ``r`` (scalar or array); always non-negative."""
    r = np.asarray(r, dtype=float)
    flat = np.atleast_1d(r).ravel()
    if est.y_p is None:
        k = est.samples.size
        out = np.empty(flat.size)
        for lo in range(0, flat.size, 4096):
            d = est.f_c * (flat[lo:lo + 4096, None] - est.samples[None, :])
            out[lo:lo + 4096] = est.f_c / k * np.sinc(d) @ est.c_hat
    else:
        out = np.concatenate([
            eval_many(est.y_p, est.f_c * flat[lo:lo + 2048]) for lo in range(0, flat.size, 2048)
        ])
    out = out ** 2
    return out.reshape(r.shape) if r.ndim else float(out[0])


def mise_grid() -> np.ndarray:
    return np.linspace(-5.0, 5.0, 10001)


def ise(estimate: np.ndarray, truth: Callable, grid) -> float:
    grid = np.asarray(grid, dtype=float)
    return float(integrate.trapezoid((np.asarray(estimate) - truth(grid)) ** 2, grid))


def mise(estimates: Sequence[np.ndarray], truth: Callable, grid=None) -> float:
    """Mean over runs of the integrated squared error (trapezoid rule)."""
    grid = mise_grid() if grid is None else np.asarray(grid, dtype=float)
    if len(estimates) == 0:
        raise VFAError("no estimates given")
    return float(np.mean([ise(e, truth, grid) for e in estimates]))
