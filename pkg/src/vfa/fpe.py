"""Fractional power encoders, phase distributions and kernel estimation.

An encoder stores one phase per spectral component.  Encoding a real value
``r`` raises every spectral phasor to the power ``r``::

    spectrum(encode(r))_j = exp(1j * phi_j * r)

and maps back to the signal domain of the binding family.  Consequently
``encode(0)`` is the binding identity and ``encode(a + b) == bind(encode(a),
encode(b))`` holds for every family.  The inner product between two
encodings is the mean of ``exp(1j * phi_j * d)``, so the phase density of the
base vector fixes the kernel (its characteristic function).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .core import (
    Family,
    HDVector,
    PhaseVector,
    as_family,
    inner_rows,
    make_rng,
    trial_seed,
    wrap_phase,
)
from .errors import GridMismatch, InvalidDensity, VFAError

CDF_BINS = 4096


@dataclass(frozen=True, eq=False)
class PhaseDistribution:
    """Distribution of base-vector phases on ``[-pi, pi]``.

    Use the constructors (:meth:`uniform`, :meth:`gaussian`, ...) rather
    than the raw fields.  ``kind`` is one of ``uniform``, ``gaussian``,
    ``laplace``, ``triangular``, ``custom``, ``discrete_roots`` and
    ``discrete_set``.
    """

    kind: str
    param: Optional[float] = None
    grid: Optional[np.ndarray] = None
    table: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    name: Optional[str] = None
    _cdf: Optional[np.ndarray] = field(default=None, repr=False)

    # constructors ---------------------------------------------------------

    @classmethod
    def uniform(cls):
        return cls("uniform")

    @classmethod
    def gaussian(cls, sigma: float):
        if sigma <= 0:
            raise InvalidDensity("gaussian sigma must be > 0")
        return cls("gaussian", float(sigma))

    @classmethod
    def laplace(cls, b: float):
        if b <= 0:
            raise InvalidDensity("laplace scale must be > 0")
        return cls("laplace", float(b))

    @classmethod
    def triangular(cls, half_width: float):
        if not 0 < half_width <= np.pi:
            raise InvalidDensity("triangular half-width must lie in (0, pi]")
        return cls("triangular", float(half_width))

    @classmethod
    def custom(cls, table, grid=None, name=None):
        """Density given as a table of values over ``grid`` (default: uniform on [-pi, pi]).

        The table must be non-negative and integrate to one (trapezoid rule)
        within 1e-6.
        """
        table = np.asarray(table, dtype=float).ravel()
        if grid is None:
            grid = np.linspace(-np.pi, np.pi, table.size)
        grid = np.asarray(grid, dtype=float).ravel()
        if grid.size != table.size or table.size < 2:
            raise InvalidDensity("density table and grid must match and have >= 2 points")
        if np.any(np.diff(grid) <= 0):
            raise InvalidDensity("density grid must be increasing")
        if grid[0] < -np.pi - 1e-12 or grid[-1] > np.pi + 1e-12:
            raise InvalidDensity("density support must lie within [-pi, pi]")
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise InvalidDensity("density table must be finite and non-negative")
        mass = integrate.trapezoid(table, grid)
        if abs(mass - 1.0) > 1e-6:
            raise InvalidDensity(f"density integrates to {mass:.8g}, not 1")
        table.setflags(write=False)
        grid.setflags(write=False)
        return cls("custom", grid=grid, table=table, name=name, _cdf=_build_cdf(grid, table))

    @classmethod
    def from_density(cls, density: Callable, points: int = CDF_BINS + 1, name=None):
        """Tabulate ``density`` on [-pi, pi], clip negatives and normalise."""
        grid = np.linspace(-np.pi, np.pi, points)
        table = np.clip(np.asarray(density(grid), dtype=float), 0.0, None)
        mass = integrate.trapezoid(table, grid)
        if not np.isfinite(mass) or mass <= 0:
            raise InvalidDensity("density is not normalisable on [-pi, pi]")
        return cls.custom(table / mass, grid, name=name)

    @classmethod
    def bochner(cls, kernel: Callable, extent: float, points: int = CDF_BINS + 1, name=None):
        """Phase density whose characteristic function approximates ``kernel``.

        ``kernel`` must be real and even; its Fourier density is computed by
        quadrature over ``[0, extent]`` and truncated to ``[-pi, pi]``.
        """
        t = np.linspace(0.0, extent, 20001)
        kt = np.asarray(kernel(t), dtype=float)
        grid = np.linspace(-np.pi, np.pi, points)
        dens = integrate.trapezoid(kt[None, :] * np.cos(np.outer(grid, t)), t, axis=1) / np.pi
        return cls.from_density(lambda g: np.interp(g, grid, dens), points, name=name)

    @classmethod
    def discrete_roots(cls, l: int):
        if int(l) != l or l < 2:
            raise InvalidDensity("discrete_roots needs an integer l >= 2")
        l = int(l)
        values = wrap_phase(2.0 * np.pi * np.arange(l) / l)
        return cls("discrete_roots", float(l), values=values, weights=np.full(l, 1.0 / l))

    @classmethod
    def discrete_set(cls, phases, weights=None):
        values = wrap_phase(np.asarray(phases, dtype=float).ravel())
        if values.size == 0:
            raise InvalidDensity("discrete_set needs at least one phase")
        if weights is None:
            weights = np.ones(values.size)
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.size != values.size or np.any(weights < 0) or weights.sum() <= 0:
            raise InvalidDensity("discrete_set weights must be non-negative and match phases")
        return cls("discrete_set", values=values, weights=weights / weights.sum())

    @classmethod
    def parse(cls, text: str) -> "PhaseDistribution":
        """Parse the command-line form, e.g. ``gaussian:1``, ``roots:8``,
        ``kernel-laplace:4``, ``kernel-triangle:4`` or ``abssinc:1``."""
        name, _, arg = str(text).strip().lower().partition(":")
        try:
            value = float(arg) if arg else None
            if name == "uniform":
                return cls.uniform()
            if name == "gaussian":
                return cls.gaussian(value if value is not None else 1.0)
            if name == "laplace":
                return cls.laplace(value if value is not None else 1.0)
            if name == "triangular":
                return cls.triangular(value if value is not None else np.pi)
            if name in ("roots", "discrete_roots"):
                return cls.discrete_roots(int(value))
            if name == "kernel-laplace":
                return laplace_kernel_distribution(value or 4.0)
            if name == "kernel-triangle":
                return triangle_kernel_distribution(value or 4.0)
            if name == "abssinc":
                return abs_sinc_distribution(value or 1.0)
        except (TypeError, ValueError) as exc:
            raise VFAError(f"bad distribution {text!r}: {exc}") from exc
        raise VFAError(f"unknown distribution {text!r}")

    # behaviour ------------------------------------------------------------

    @property
    def is_discrete(self) -> bool:
        return self.kind in ("discrete_roots", "discrete_set")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "discrete_roots":
            return f"discrete_roots:{int(self.param)}"
        if self.param is not None:
            return f"{self.kind}:{self.param:g}"
        return self.kind

    def density(self, phi) -> np.ndarray:
        """Probability density at ``phi`` (continuous kinds only)."""
        phi = np.asarray(phi, dtype=float)
        inside = np.abs(phi) <= np.pi
        if self.kind == "uniform":
            out = np.full(phi.shape, 1.0 / (2 * np.pi))
        elif self.kind == "gaussian":
            s = self.param
            mass = special.erf(np.pi / (s * np.sqrt(2.0)))
            out = np.exp(-0.5 * (phi / s) ** 2) / (s * np.sqrt(2 * np.pi) * mass)
        elif self.kind == "laplace":
            b = self.param
            out = np.exp(-np.abs(phi) / b) / (2 * b * (1.0 - np.exp(-np.pi / b)))
        elif self.kind == "triangular":
            h = self.param
            out = np.clip(1.0 - np.abs(phi) / h, 0.0, None) / h
        elif self.kind == "custom":
            out = np.interp(phi, self.grid, self.table, left=0.0, right=0.0)
        else:
            raise VFAError("discrete distributions have no density")
        return np.where(inside, out, 0.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform":
            out = rng.uniform(-np.pi, np.pi, size)
        elif self.kind == "gaussian":
            out = _truncated(lambda m: rng.normal(0.0, self.param, m), size)
        elif self.kind == "laplace":
            out = _truncated(lambda m: rng.laplace(0.0, self.param, m), size)
        elif self.kind == "triangular":
            h = self.param
            out = rng.triangular(-h, 0.0, h, size)
        elif self.kind == "custom":
            out = np.interp(rng.uniform(0.0, 1.0, size), self._cdf, _cdf_grid())
        else:
            out = rng.choice(self.values, size=size, p=self.weights)
        return wrap_phase(out)

    def characteristic(self, d) -> np.ndarray:
        """``E[exp(1j * phi * d)]`` by quadrature (or exact sum for discrete kinds)."""
        d = np.atleast_1d(np.asarray(d, dtype=float))
        if self.is_discrete:
            return np.exp(1j * np.outer(d, self.values)) @ self.weights
        grid = np.linspace(-np.pi, np.pi, 8193)
        if self.kind == "custom":
            grid = np.union1d(grid, self.grid)
        p = self.density(grid)
        return integrate.trapezoid(p[None, :] * np.exp(1j * np.outer(d, grid)), grid, axis=1)


def _truncated(draw, size):
    out = draw(size)
    bad = np.abs(out) > np.pi
    while np.any(bad):
        out[bad] = draw(int(bad.sum()))
        bad = np.abs(out) > np.pi
    return out


def _cdf_grid():
    return np.linspace(-np.pi, np.pi, CDF_BINS + 1)


def _build_cdf(grid, table):
    # resample onto CDF_BINS uniform bins, then integrate piecewise-linearly
    g = _cdf_grid()
    p = np.interp(g, grid, table, left=0.0, right=0.0)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(g))])
    if cdf[-1] <= 0:
        raise InvalidDensity("density has no mass on [-pi, pi]")
    cdf /= cdf[-1]
    cdf.setflags(write=False)
    return cdf


def laplace_kernel(d, scale: float = 4.0):
    return np.exp(-np.abs(np.asarray(d, dtype=float)) / scale)


def triangle_kernel(d, half_width: float = 4.0):
    return np.clip(1.0 - np.abs(np.asarray(d, dtype=float)) / half_width, 0.0, None)


def gaussian_kernel(d, sigma: float = 1.0):
    # phase std sigma gives a kernel of length scale 1/sigma
    return np.exp(-0.5 * (sigma * np.asarray(d, dtype=float)) ** 2)


def sinc_kernel(d):
    return np.sinc(np.asarray(d, dtype=float))


def laplace_kernel_distribution(scale: float = 4.0) -> PhaseDistribution:
    return PhaseDistribution.bochner(
        lambda t: laplace_kernel(t, scale), 80.0 * scale, name=f"kernel-laplace:{scale:g}"
    )


def triangle_kernel_distribution(half_width: float = 4.0) -> PhaseDistribution:
    return PhaseDistribution.bochner(
        lambda t: triangle_kernel(t, half_width), half_width, name=f"kernel-triangle:{half_width:g}"
    )


def abs_sinc_distribution(a: float = 1.0) -> PhaseDistribution:
    """Phase density proportional to ``|sinc(a * phi)|`` truncated to [-pi, pi]."""
    return PhaseDistribution.from_density(
        lambda g: np.abs(np.sinc(a * g)), name=f"abssinc:{a:g}"
    )


@dataclass(frozen=True, eq=False)
class FpeEncoder:
    """Fractional power encoder: binding family, dimension and spectral base phases."""

    family: Family
    n: int
    base_phases: PhaseVector
    distribution: Optional[PhaseDistribution] = None
    real_valued: bool = False

    def __post_init__(self):
        fam = as_family(self.family)
        fam.check(self.n)
        if len(self.base_phases) != self.n:
            raise VFAError("base phase count must equal n")
        object.__setattr__(self, "family", fam)

    @property
    def phases(self) -> np.ndarray:
        return self.base_phases.phases

    def spectra(self, rs) -> np.ndarray:
        """Spectral-domain encodings, one row per value in ``rs``."""
        rs = np.atleast_1d(np.asarray(rs, dtype=float))
        return np.exp(1j * np.outer(rs, self.phases))

    def encode_many(self, rs) -> np.ndarray:
        """Signal-domain encodings, one row per value in ``rs``."""
        return self.family.from_spectrum(self.spectra(rs))

    def encode(self, r: float) -> HDVector:
        if not np.isfinite(r):
            raise VFAError("cannot encode a non-finite value")
        data = self.encode_many([float(r)])[0]
        if self.real_valued:
            data = data.real
        return HDVector(data, self.family)

    def __call__(self, r: float) -> HDVector:
        return self.encode(r)


def sample_base(dist: PhaseDistribution, family, n: int, seed: int, real_valued: bool = False) -> FpeEncoder:
    """Draw the base vector of an encoder.

    Uniform block encoders get an exactly k-sparse base (one hot phasor per
    block); every other combination draws i.i.d. spectral phases from
    ``dist``.  ``real_valued`` (circular family only) imposes Hermitian
    symmetry on the spectral phases so that all encodings are real.
    """
    family = as_family(family)
    family.check(n)
    rng = make_rng(seed)
    if real_valued and family.kind != "circular":
        raise VFAError("real_valued encoders are only defined for the circular family")
    if family.kind == "block" and dist.kind == "uniform":
        size = n // family.k
        hot = rng.integers(0, size, family.k)
        theta = rng.uniform(-np.pi, np.pi, family.k)
        j = np.arange(size)
        phases = theta[:, None] - 2.0 * np.pi * np.outer(hot, j) / size
        phases = phases.ravel()
    elif real_valued:
        half = (n - 1) // 2
        pos = dist.sample(rng, half)
        phases = np.zeros(n)
        phases[1 : half + 1] = pos
        phases[n - half :] = -pos[::-1]
    else:
        phases = dist.sample(rng, n)
    return FpeEncoder(family, n, PhaseVector(phases), dist, real_valued)


def encode(enc: FpeEncoder, r: float) -> HDVector:
    return enc.encode(r)


@dataclass
class KernelEstimate:
    """Kernel sampled on a displacement grid, averaged over trials."""

    d: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    imag_mean: np.ndarray
    n: int
    trials: int
    family: str
    dist: str

    def rows(self):
        for i in range(self.d.size):
            yield (self.d[i], self.mean[i], self.std[i], self.n, self.trials, self.family, self.dist)

    columns = ("d", "mean", "std", "n", "trials", "family", "dist")


def kernel_trials(enc: FpeEncoder, d_grid, trials: int, base_seed: int, r0: float = 0.0) -> np.ndarray:
    """Per-trial kernels ``Re inner(encode(r0 + d), encode(r0))``, shape (trials, len(d))."""
    if trials < 1:
        raise VFAError("trials must be >= 1")
    d_grid = np.asarray(d_grid, dtype=float)
    dist = enc.distribution or PhaseDistribution.uniform()
    out = np.empty((trials, d_grid.size), dtype=complex)
    for t in range(trials):
        e = sample_base(dist, enc.family, enc.n, trial_seed(base_seed, t), enc.real_valued)
        rows = e.encode_many(r0 + d_grid)
        ref = e.encode_many([r0])[0]
        out[t] = inner_rows(rows, ref, e.family)
    return out


def estimate_kernel(enc: FpeEncoder, d_grid, trials: int, base_seed: int, r0: float = 0.0) -> KernelEstimate:
    """Empirical kernel of the encoder recipe ``enc`` (family, n, distribution).

    A fresh base vector is drawn for every trial ``t`` with seed
    ``base_seed ^ t``; the reported kernel is the real part of the
    normalised inner product, averaged in trial order.
    """
    d_grid = np.asarray(d_grid, dtype=float)
    vals = kernel_trials(enc, d_grid, trials, base_seed, r0)
    dist = enc.distribution or PhaseDistribution.uniform()
    return KernelEstimate(
        d=d_grid,
        mean=vals.real.mean(axis=0),
        std=vals.real.std(axis=0, ddof=1) if trials > 1 else np.zeros(d_grid.size),
        imag_mean=vals.imag.mean(axis=0),
        n=enc.n,
        trials=trials,
        family=str(enc.family),
        dist=dist.label,
    )


def kernel_rmse(est: KernelEstimate, target) -> float:
    """RMSE between an estimate and a callable kernel or another estimate."""
    if isinstance(target, KernelEstimate):
        if target.d.shape != est.d.shape or not np.allclose(target.d, est.d):
            raise GridMismatch("kernel estimates are on different grids")
        ref = target.mean
    else:
        ref = np.asarray(target(est.d), dtype=float)
    return float(np.sqrt(np.mean((est.mean - ref) ** 2)))


def recipe(dist, family, n: int, real_valued: bool = False) -> FpeEncoder:
    """Encoder template carrying only (distribution, family, n); seed 0 base."""
    if isinstance(dist, str):
        dist = PhaseDistribution.parse(dist)
    return sample_base(dist, family, n, 0, real_valued)


def default_grid(half_width: float = 5.0, step: float = 0.05) -> np.ndarray:
    m = int(round(half_width / step))
    return np.arange(-m, m + 1) * step


def rmse_sweep(dist, family, ns: Sequence[int], d_grid, trials: int, base_seed: int, target) -> list:
    """Kernel RMSE against ``target`` for each dimension in ``ns``."""
    out = []
    for n in ns:
        est = estimate_kernel(recipe(dist, family, n), d_grid, trials, base_seed)
        out.append(kernel_rmse(est, target))
    return out
