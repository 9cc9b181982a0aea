"""Multi-dimensional encoders, joint phase samplers and 2-D kernel estimation.

Every multi-dimensional encoder used here is a bank of plane waves: the
spectral component ``j`` of ``encode_multi(enc, x)`` is ``exp(1j * w_j . x)``
for a fixed frequency vector ``w_j``.  The encoder therefore stores its
frequencies as an ``(N, m)`` array, and its kernel at displacement ``d`` is
the mean of ``exp(1j * w_j . d)``.  The constructions differ only in how the
frequencies are produced:

* ``cartesian`` binds independent 1-D encoders, ``w_j = (phi1_j, ..., phim_j)``;
* ``joint2d`` draws the pairs ``(phix_j, phiy_j)`` from a joint density
  (hexagon, Bravais lattice, Gaussian mixture);
* ``hex_concat`` concatenates three 2-D encoders evaluated on the hexagonal
  projections ``x_i = xi_i . x``;
* ``hex_cc`` binds three real circular encoders at the same projections.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    CIRCULAR,
    HADAMARD,
    Family,
    HDVector,
    PhaseVector,
    as_family,
    block,
    make_rng,
    stream_seed,
    trial_seed,
)
from .errors import ArityMismatch, EmptyLattice, FamilyMismatch, VFAError
from .fpe import FpeEncoder, PhaseDistribution, sample_base

XI = np.array([[0.25, np.sqrt(3) / 4], [0.25, -np.sqrt(3) / 4], [-0.5, 0.0]])

# Hexagon of the hexagonal sinc spectrum: vertices (+-pi, 0), (+-pi/2, +-pi*sqrt(3)/2).
HEXAGON_VERTICES = np.pi * np.array(
    [[1.0, 0.0], [0.5, np.sqrt(3) / 2], [-0.5, np.sqrt(3) / 2],
     [-1.0, 0.0], [-0.5, -np.sqrt(3) / 2], [0.5, -np.sqrt(3) / 2]]
)
HEXAGON_AREA = 1.5 * np.sqrt(3) * np.pi ** 2


@dataclass(frozen=True, eq=False)
class MultiEncoder:
    """Encoder of m-dimensional points as a bank of plane waves.

    Parameters
    ----------
    mode : str
        ``cartesian``, ``joint2d``, ``hex_concat``, ``hex_cc`` or ``tensor``.
    family : Family
        Binding family of the produced vectors.
    freqs : ndarray, shape (N, m)
        Spectral frequency of each output component.
    parts : tuple
        Component encoders (provenance).
    sampler : callable, optional
        ``seed -> MultiEncoder`` drawing a fresh encoder of the same recipe.
    """

    mode: str
    family: Family
    freqs: np.ndarray
    parts: tuple = ()
    sampler: Optional[Callable[[int], "MultiEncoder"]] = field(default=None, repr=False)

    def __post_init__(self):
        f = np.array(self.freqs, dtype=float)
        if f.ndim != 2:
            raise VFAError("freqs must be an (N, m) array")
        f.setflags(write=False)
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "family", as_family(self.family))
        if self.mode != "tensor":
            self.family.check(f.shape[0])

    @property
    def m(self) -> int:
        return self.freqs.shape[1]

    @property
    def n(self) -> int:
        """Length of the produced vectors (effective dimension)."""
        if self.mode == "tensor":
            return self.freqs.shape[0] ** 2
        return self.freqs.shape[0]

    def _points(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        if p.ndim == 1:
            p = p[None, :]
        if p.shape[-1] != self.m:
            raise ArityMismatch(f"expected {self.m}-dimensional points, got {p.shape[-1]}")
        return p

    def spectra(self, points) -> np.ndarray:
        if self.mode == "tensor":
            raise VFAError("tensor encoders produce matrices; use tensor_encode")
        return np.exp(1j * self._points(points) @ self.freqs.T)

    def encode_many(self, points) -> np.ndarray:
        return self.family.from_spectrum(self.spectra(points))

    def kernel(self, d) -> np.ndarray:
        """Complex kernel ``inner(encode(x + d), encode(x))`` at displacements ``d``."""
        d = self._points(d)
        if self.mode == "tensor":
            kx = np.exp(1j * np.outer(d[:, 0], self.freqs[:, 0])).mean(axis=1)
            ky = np.exp(1j * np.outer(d[:, 1], self.freqs[:, 1])).mean(axis=1)
            return kx * np.conj(ky)
        return np.exp(1j * d @ self.freqs.T).mean(axis=1)

    def kernel_grid(self, dx, dy) -> np.ndarray:
        """Complex kernel on the grid ``dx x dy``; entry ``[i, j]`` is at ``(dx[i], dy[j])``."""
        if self.m != 2:
            raise ArityMismatch("kernel_grid needs a 2-D encoder")
        ex = np.exp(1j * np.outer(dx, self.freqs[:, 0]))
        ey = np.exp(1j * np.outer(dy, self.freqs[:, 1]))
        if self.mode == "tensor":
            return np.outer(ex.mean(axis=1), np.conj(ey.mean(axis=1)))
        return ex @ ey.T / self.freqs.shape[0]

    def resample(self, seed: int) -> "MultiEncoder":
        if self.sampler is None:
            raise VFAError("encoder has no sampler recipe")
        return self.sampler(seed)


def encode_multi(enc: MultiEncoder, point) -> HDVector:
    p = np.asarray(point, dtype=float).ravel()
    if p.size != enc.m:
        raise ArityMismatch(f"expected a {enc.m}-tuple, got {p.size} values")
    if not np.all(np.isfinite(p)):
        raise VFAError("cannot encode non-finite coordinates")
    return HDVector(enc.encode_many(p)[0], enc.family)


# constructors -------------------------------------------------------------


def cartesian(encoders: Sequence[FpeEncoder]) -> MultiEncoder:
    """Bind independent one-dimensional encoders, one per input dimension."""
    encoders = tuple(encoders)
    if not encoders:
        raise ArityMismatch("cartesian encoder needs at least one component")
    fam, n = encoders[0].family, encoders[0].n
    for e in encoders:
        if e.family != fam:
            raise FamilyMismatch("cartesian components must share a family")
        if e.n != n:
            raise VFAError("cartesian components must share n")
    freqs = np.column_stack([e.phases for e in encoders])
    return MultiEncoder("cartesian", fam, freqs, encoders)


def _cartesian_recipe(dist, family, n, m, real_valued, seed):
    encs = [
        sample_base(dist, family, n, stream_seed(seed, 0xC0, i), real_valued)
        for i in range(m)
    ]
    enc = cartesian(encs)
    return MultiEncoder(enc.mode, enc.family, enc.freqs, enc.parts,
                        partial(_cartesian_recipe, dist, family, n, m, real_valued))


def sample_cartesian(dist, family, n: int, m: int, seed: int, real_valued: bool = False) -> MultiEncoder:
    """Cartesian encoder with ``m`` independently seeded components."""
    if isinstance(dist, str):
        dist = PhaseDistribution.parse(dist)
    return _cartesian_recipe(dist, as_family(family), n, m, real_valued, seed)


def joint2d(phases_x, phases_y, family=HADAMARD, sampler=None) -> MultiEncoder:
    px = phases_x.phases if isinstance(phases_x, PhaseVector) else PhaseVector(phases_x).phases
    py = phases_y.phases if isinstance(phases_y, PhaseVector) else PhaseVector(phases_y).phases
    if px.size != py.size:
        raise VFAError("joint phase vectors must have equal length")
    return MultiEncoder("joint2d", as_family(family), np.column_stack([px, py]), (), sampler)


def in_hexagon(px, py, tol: float = 1e-12) -> np.ndarray:
    """Point-in-hexagon test for the hexagonal sinc spectrum."""
    ax, ay = np.abs(np.asarray(px)), np.abs(np.asarray(py))
    h = np.pi * np.sqrt(3) / 2
    return (ay <= h + tol) & (np.sqrt(3) * ax + ay <= np.sqrt(3) * np.pi + tol)


def sample_hexagon(rng: np.random.Generator, n: int):
    """Rejection-sample ``n`` points uniformly in the hexagon.

    Returns the ``(n, 2)`` points and the number of square draws used.
    """
    out = np.empty((0, 2))
    draws = 0
    while out.shape[0] < n:
        m = max(16, int(1.6 * (n - out.shape[0])))
        cand = rng.uniform(-np.pi, np.pi, (m, 2))
        draws += m
        keep = cand[in_hexagon(cand[:, 0], cand[:, 1])]
        need = n - out.shape[0]
        if keep.shape[0] > need:
            # count only the draws consumed up to the last accepted point
            idx = np.flatnonzero(in_hexagon(cand[:, 0], cand[:, 1]))[need - 1]
            draws -= m - (idx + 1)
            keep = keep[:need]
        out = np.vstack([out, keep])
    return out, draws


def hexagon_joint_phases(n: int, seed: int):
    """Phase pairs drawn uniformly from the hexagon inscribed in [-pi, pi]^2."""
    pts, _ = sample_hexagon(make_rng(seed), n)
    return PhaseVector(pts[:, 0]), PhaseVector(pts[:, 1])


def _hex_joint_recipe(n, family, seed):
    px, py = hexagon_joint_phases(n, seed)
    return joint2d(px, py, family, partial(_hex_joint_recipe, n, family))


def sample_hex_joint(n: int, seed: int, family=HADAMARD) -> MultiEncoder:
    return _hex_joint_recipe(n, as_family(family), seed)


LATTICES = {
    "square": np.array([[np.pi / 2, 0.0], [0.0, np.pi / 2]]),
    "hex": (np.pi / 2) * np.array([[1.0, 0.0], [0.5, np.sqrt(3) / 2]]),
    "rect": np.array([[np.pi / 2, 0.0], [0.0, np.pi / 3]]),
    "oblique": np.array([[np.pi / 2, 0.0], [np.pi / 5, np.pi / 3]]),
}


def lattice_points(basis, extent: int) -> np.ndarray:
    """Lattice points ``a*b1 + b*b2`` with ``|a|, |b| <= extent`` strictly inside [-pi, pi]^2."""
    basis = np.asarray(basis, dtype=float).reshape(2, 2)
    ij = np.arange(-int(extent), int(extent) + 1)
    a, b = np.meshgrid(ij, ij, indexing="ij")
    pts = a.reshape(-1, 1) * basis[0] + b.reshape(-1, 1) * basis[1]
    keep = np.all(np.abs(pts) < np.pi - 1e-12, axis=1)
    return pts[keep]


def lattice_period(basis) -> np.ndarray:
    """Direct-lattice vectors (rows) along which a lattice-phase kernel repeats."""
    basis = np.asarray(basis, dtype=float).reshape(2, 2)
    return 2 * np.pi * np.linalg.inv(basis).T


def lattice_phases(basis, extent: int, n: int, seed: int, weights=None, smear_sigma: Optional[float] = None):
    """Phase pairs drawn from the points of a reciprocal Bravais lattice.

    Optionally each pair is perturbed by isotropic Gaussian noise of std
    ``smear_sigma`` and clipped to the phase square.
    """
    pts = lattice_points(basis, extent)
    if pts.shape[0] == 0:
        raise EmptyLattice("no lattice point falls inside [-pi, pi]^2")
    rng = make_rng(seed)
    if weights is not None:
        w = np.asarray(weights, dtype=float).ravel()
        if w.size != pts.shape[0] or np.any(w < 0) or w.sum() <= 0:
            raise VFAError("lattice weights must be non-negative, one per kept lattice point")
        w = w / w.sum()
    idx = rng.choice(pts.shape[0], size=n, p=w if weights is not None else None)
    ph = pts[idx].copy()
    if smear_sigma:
        ph += rng.normal(0.0, smear_sigma, ph.shape)
        ph = np.clip(ph, -np.pi, np.nextafter(np.pi, 0.0))
    return PhaseVector(ph[:, 0]), PhaseVector(ph[:, 1])


def _lattice_recipe(basis, extent, n, weights, smear_sigma, family, seed):
    px, py = lattice_phases(basis, extent, n, seed, weights, smear_sigma)
    return joint2d(px, py, family, partial(_lattice_recipe, basis, extent, n, weights, smear_sigma, family))


def sample_lattice(basis, extent: int, n: int, seed: int, weights=None, smear_sigma=None, family=HADAMARD) -> MultiEncoder:
    if isinstance(basis, str):
        try:
            basis = LATTICES[basis]
        except KeyError:
            raise VFAError(f"unknown lattice {basis!r}; choose from {sorted(LATTICES)}") from None
    return _lattice_recipe(np.asarray(basis, dtype=float), extent, n, weights, smear_sigma, as_family(family), seed)


def _concat_family(family: Family) -> Family:
    if family.kind == "hadamard":
        return HADAMARD
    if family.kind == "circular":
        return block(3)
    return block(3 * family.k)


def hex_concat(z1: FpeEncoder, z2: FpeEncoder, sampler=None) -> MultiEncoder:
    """Concatenated-projection hexagonal encoder of length ``3n``.

    Block ``i`` holds ``exp(1j*pi*x_i) * bind(z1(x_{i+1}), z2(x_{i+2}))``.
    """
    if z1.family != z2.family:
        raise FamilyMismatch("hex_concat components must share a family")
    if z1.n != z2.n:
        raise VFAError("hex_concat components must share n")
    blocks = []
    for i in range(3):
        w = (np.pi * XI[i] + np.outer(z1.phases, XI[(i + 1) % 3])
             + np.outer(z2.phases, XI[(i + 2) % 3]))
        blocks.append(w)
    return MultiEncoder("hex_concat", _concat_family(z1.family), np.vstack(blocks), (z1, z2), sampler)


def _hex_concat_recipe(n, family, seed):
    u = PhaseDistribution.uniform()
    z1 = sample_base(u, family, n, stream_seed(seed, 0x51))
    z2 = sample_base(u, family, n, stream_seed(seed, 0xA2))
    return hex_concat(z1, z2, partial(_hex_concat_recipe, n, family))


def sample_hex_concat(n: int, seed: int, family=HADAMARD) -> MultiEncoder:
    return _hex_concat_recipe(n, as_family(family), seed)


HEX_CC_DISCRETE = PhaseDistribution.discrete_set([0.0, 2 * np.pi / 3, 4 * np.pi / 3])


def hex_cc_projection(z1: FpeEncoder, z2: FpeEncoder, z3: FpeEncoder, sampler=None) -> MultiEncoder:
    """Bind three encoders at the hexagonal projections ``x_i = xi_i . x``."""
    encs = (z1, z2, z3)
    if len({e.family for e in encs}) != 1 or len({e.n for e in encs}) != 1:
        raise FamilyMismatch("hex_cc components must share family and n")
    freqs = sum(np.outer(e.phases, XI[i]) for i, e in enumerate(encs))
    return MultiEncoder("hex_cc", z1.family, freqs, encs, sampler)


def _hex_cc_recipe(n, discrete, seed):
    dist = HEX_CC_DISCRETE if discrete else PhaseDistribution.uniform()
    encs = [sample_base(dist, CIRCULAR, n, stream_seed(seed, 0x100 + i), real_valued=True) for i in range(3)]
    return hex_cc_projection(*encs, sampler=partial(_hex_cc_recipe, n, discrete))


def sample_hex_cc(n: int, seed: int, discrete: bool = False) -> MultiEncoder:
    """Real circular-convolution hexagon; ``discrete`` draws phases from {0, 2pi/3, 4pi/3}."""
    return _hex_cc_recipe(n, bool(discrete), seed)


def _tensor_recipe(n, seed):
    u = PhaseDistribution.uniform()
    ex = sample_base(u, HADAMARD, n, stream_seed(seed, 0x51))
    ey = sample_base(u, HADAMARD, n, stream_seed(seed, 0xA2))
    return MultiEncoder("tensor", HADAMARD, np.column_stack([ex.phases, ey.phases]), (ex, ey),
                        partial(_tensor_recipe, n))


def sample_tensor(n: int, seed: int) -> MultiEncoder:
    """Two Hadamard encoders combined by the tensor product (effective dimension n^2)."""
    return _tensor_recipe(n, seed)


# tensor product ------------------------------------------------------------


def tensor_encode(encX: FpeEncoder, encY: FpeEncoder, point) -> np.ndarray:
    """Rank-2 encoding ``outer(zx(x), conj(zy(y)))`` of a 2-D point."""
    if encX.family.kind != "hadamard" or encY.family.kind != "hadamard":
        raise FamilyMismatch("tensor_encode is defined for the hadamard family")
    x, y = np.asarray(point, dtype=float).ravel()
    return np.outer(encX.encode(x).data, np.conj(encY.encode(y).data))


def frobenius_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Frobenius inner product normalised by the number of entries."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise VFAError("tensor shapes differ")
    return complex(np.vdot(b, a) / a.size)


# analytic kernels ------------------------------------------------------------


def sinc_hex(point) -> np.ndarray:
    """Hexagonal sinc kernel at one point ``(x, y)`` or an ``(..., 2)`` array of points."""
    p = np.asarray(point, dtype=float)
    proj = p @ XI.T
    out = 0.0
    for i in range(3):
        out = out + np.cos(np.pi * proj[..., i]) * np.sinc(proj[..., (i + 1) % 3]) * np.sinc(proj[..., (i + 2) % 3])
    return out / 3.0


def cartesian_sinc(point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    return np.sinc(p[..., 0]) * np.sinc(p[..., 1])


def gram(enc: MultiEncoder, points) -> np.ndarray:
    """Gram matrix ``G[a, b] = inner(encode(p_a), encode(p_b))``.

    Tensor encoders use the normalised Frobenius inner product.
    """
    if enc.mode == "tensor":
        ex, ey = enc.parts
        p = enc._points(points)
        rows = np.stack([tensor_encode(ex, ey, q).ravel() for q in p])
        return rows @ rows.conj().T / rows.shape[1]
    rows = enc.encode_many(points)
    return rows @ rows.conj().T / enc.family.norm_scale(rows.shape[1])


# 2-D estimation --------------------------------------------------------------


def default_grid_2d(half_width: float = 8.0, step: float = 0.25) -> np.ndarray:
    m = int(round(half_width / step))
    return np.arange(-m, m + 1) * step


@dataclass
class Kernel2DEstimate:
    """Mean 2-D kernel over trials and its normalised power spectrum.

    ``mean[i, j]`` is the kernel at ``(dx[i], dy[j])``; ``power`` is indexed
    by the angular frequencies ``wx``, ``wy`` in FFT order.
    """

    dx: np.ndarray
    dy: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    imag_mean: np.ndarray
    power: np.ndarray
    n: int
    trials: int
    mode: str

    @property
    def wx(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.dx.size, self.dx[1] - self.dx[0])

    @property
    def wy(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.dy.size, self.dy[1] - self.dy[0])

    def kernel_rows(self):
        for i in range(self.dx.size):
            for j in range(self.dy.size):
                yield (self.dx[i], self.dy[j], self.mean[i, j], self.std[i, j])

    def spectrum_rows(self):
        wx, wy = np.fft.fftshift(self.wx), np.fft.fftshift(self.wy)
        p = np.fft.fftshift(self.power)
        for i in range(wx.size):
            for j in range(wy.size):
                yield (wx[i], wy[j], p[i, j])

    kernel_columns = ("dx", "dy", "mean", "std")
    spectrum_columns = ("wx", "wy", "power")


def power_spectrum(kernel: np.ndarray) -> np.ndarray:
    """Squared magnitude of the 2-D DFT, normalised to total power 1."""
    p = np.abs(np.fft.fft2(kernel)) ** 2
    return p / p.sum()


def estimate_kernel_2d(enc: MultiEncoder, grid=None, trials: int = 1, base_seed: int = 0, grid_y=None) -> Kernel2DEstimate:
    """Trial-averaged real 2-D kernel with a fresh encoder per trial (seed ``base_seed ^ t``)."""
    if trials < 1:
        raise VFAError("trials must be >= 1")
    dx = default_grid_2d() if grid is None else np.asarray(grid, dtype=float)
    dy = dx if grid_y is None else np.asarray(grid_y, dtype=float)
    vals = np.empty((trials, dx.size, dy.size), dtype=complex)
    for t in range(trials):
        e = enc.resample(trial_seed(base_seed, t)) if enc.sampler is not None else enc
        vals[t] = e.kernel_grid(dx, dy)
    mean = vals.real.mean(axis=0)
    return Kernel2DEstimate(
        dx=dx,
        dy=dy,
        mean=mean,
        std=vals.real.std(axis=0, ddof=1) if trials > 1 else np.zeros_like(mean),
        imag_mean=vals.imag.mean(axis=0),
        power=power_spectrum(mean),
        n=enc.n,
        trials=trials,
        mode=enc.mode,
    )


def band_mask(est: Kernel2DEstimate, band: str = "square") -> np.ndarray:
    """In-band frequencies: ``square`` is [-pi, pi]^2, ``hex`` is the hexagon."""
    wx, wy = np.meshgrid(est.wx, est.wy, indexing="ij")
    if band == "square":
        return (np.abs(wx) <= np.pi + 1e-9) & (np.abs(wy) <= np.pi + 1e-9)
    if band == "hex":
        return in_hexagon(wx, wy, tol=1e-9)
    raise VFAError(f"unknown band {band!r}")


def spectral_deviation(est: Kernel2DEstimate, target: Callable, band: str = "square"):
    """Std of the power-spectrum difference from ``target`` inside and outside the band."""
    gx, gy = np.meshgrid(est.dx, est.dy, indexing="ij")
    ref = power_spectrum(target(np.stack([gx, gy], axis=-1)))
    diff = est.power - ref
    mask = band_mask(est, band)
    return float(np.std(diff[mask])), float(np.std(diff[~mask]))


def kernel_rmse_2d(est: Kernel2DEstimate, target: Callable) -> float:
    gx, gy = np.meshgrid(est.dx, est.dy, indexing="ij")
    ref = target(np.stack([gx, gy], axis=-1))
    return float(np.sqrt(np.mean((est.mean - ref) ** 2)))


MODES = ("cartesian", "tensor", "hex_joint", "hex_concat", "hex_cc", "hex_cc_discrete")


def make_encoder(mode: str, n: int, seed: int, family=HADAMARD, dist=None) -> MultiEncoder:
    """Build a 2-D encoder recipe by name (``lattice:<name>`` selects a lattice)."""
    family = as_family(family)
    if mode == "cartesian":
        return sample_cartesian(dist or PhaseDistribution.uniform(), family, n, 2, seed)
    if mode == "tensor":
        return sample_tensor(n, seed)
    if mode == "hex_joint":
        return sample_hex_joint(n, seed, family)
    if mode == "hex_concat":
        return sample_hex_concat(n, seed, family)
    if mode == "hex_cc":
        return sample_hex_cc(n, seed)
    if mode == "hex_cc_discrete":
        return sample_hex_cc(n, seed, discrete=True)
    if mode.startswith("lattice:"):
        name, _, smear = mode[len("lattice:"):].partition(":")
        return sample_lattice(name, 4, n, seed, smear_sigma=float(smear) if smear else None, family=family)
    raise VFAError(f"unknown 2-D mode {mode!r}")
