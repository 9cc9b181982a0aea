"""Detection and decoding of point and function vectors.

Decoding a point vector ``x`` runs in two steps.  A coarse step compares
``x`` with a codebook of anchors ``z(k * beta)`` and keeps the best match; a
fine step maximises the readout

    c(s) = Re inner(z(s), x)

over ``[k*beta - beta, k*beta + beta]``.  Function vectors are decoded by
peeling: decode the strongest term, subtract it, repeat.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import optimize

from .core import HDVector, inner_rows, make_rng
from .errors import DimensionMismatch, InvalidSpacing, OptimizerDidNotBracket, VFAError
from .fpe import FpeEncoder
from .functions import FunctionVector

PRESCAN_POINTS = 65
XATOL = 1e-9

# Null calibration at n = 256, beta = 1.6, k_max = 20 (10^4 random unitary
# vectors, two encoders, all-window decoding): 99th percentile 0.164, 99.9th
# 0.186.  0.17 keeps the false-accept rate near 0.6%.  See calibrate_threshold.
DEFAULT_THRESHOLD = 0.17
DEFAULT_THRESHOLD_N = 256


@dataclass(frozen=True, eq=False)
class AnchorCodebook:
    """Anchors ``z(k * beta)`` for ``k = 1..k_max`` of a one-dimensional encoder."""

    encoder: FpeEncoder
    beta: float
    k_max: int
    values: np.ndarray
    rows: np.ndarray

    @property
    def n(self) -> int:
        return self.encoder.n

    def anchor(self, index: int) -> HDVector:
        return HDVector(self.rows[index], self.encoder.family)


@dataclass(frozen=True)
class DecodeResult:
    r_hat: float
    alpha_hat: float
    confidence: float
    index: int


def build_anchors(enc: FpeEncoder, beta: float = 1.6, k_max: int = 20) -> AnchorCodebook:
    if not 0 < beta < 2:
        raise InvalidSpacing("anchor spacing must satisfy 0 < beta < 2")
    if int(k_max) != k_max or k_max < 1:
        raise InvalidSpacing("k_max must be a positive integer")
    values = beta * np.arange(1, int(k_max) + 1)
    rows = enc.encode_many(values)
    values.setflags(write=False)
    rows.setflags(write=False)
    return AnchorCodebook(enc, float(beta), int(k_max), values, rows)


def _spectrum(cb: AnchorCodebook, x) -> np.ndarray:
    data = x.data if isinstance(x, HDVector) else np.asarray(x, dtype=complex)
    if data.shape[-1] != cb.n:
        raise DimensionMismatch(f"vector has n={data.shape[-1]}, codebook n={cb.n}")
    return cb.encoder.family.to_spectrum(data)


def readout(cb: AnchorCodebook, x, s) -> np.ndarray:
    """``Re inner(z(s), x)`` for scalar or array ``s``."""
    spec = _spectrum(cb, x)
    return _readout(cb.encoder.phases, spec, s)


def _readout(phases, spec, s):
    s = np.asarray(s, dtype=float)
    vals = (np.exp(1j * np.multiply.outer(s, phases)) @ np.conj(spec)).real / phases.size
    return vals


def readout_derivative(cb: AnchorCodebook, x, s) -> np.ndarray:
    """Analytic derivative ``d/ds Re inner(z(s), x)``."""
    spec = _spectrum(cb, x)
    s = np.asarray(s, dtype=float)
    ph = cb.encoder.phases
    return (np.exp(1j * np.multiply.outer(s, ph)) @ (1j * ph * np.conj(spec))).real / ph.size


def coarse_match(cb: AnchorCodebook, x, sign: float = 1.0) -> int:
    """Index (0-based) of the anchor with the largest ``Re inner(anchor, x)``."""
    data = x.data if isinstance(x, HDVector) else np.asarray(x, dtype=complex)
    if data.shape[-1] != cb.n:
        raise DimensionMismatch(f"vector has n={data.shape[-1]}, codebook n={cb.n}")
    scores = sign * inner_rows(cb.rows, data, cb.encoder.family).real
    return int(np.argmax(scores))


def _search(phases, spec, lo, hi, sign):
    # prescan, then bounded Brent around the best grid point; returns (r_hat, at_edge)
    grid = np.linspace(lo, hi, PRESCAN_POINTS)
    vals = sign * _readout(phases, spec, grid)
    i = int(np.argmax(vals))
    step = grid[1] - grid[0]
    a, b = max(lo, grid[i] - step), min(hi, grid[i] + step)
    res = optimize.minimize_scalar(
        lambda s: -sign * float(_readout(phases, spec, s)),
        bounds=(a, b),
        method="bounded",
        options={"xatol": XATOL},
    )
    return float(res.x), i in (0, PRESCAN_POINTS - 1)


def _edge_error(r_hat):
    return OptimizerDidNotBracket(f"readout maximum at the search edge near {r_hat:.6g}", r_hat=r_hat)


def _maximise(phases, spec, lo, hi, sign, strict):
    r_hat, at_edge = _search(phases, spec, lo, hi, sign)
    if at_edge and strict:
        raise _edge_error(r_hat)
    return r_hat


def fine_match(cb: AnchorCodebook, x, coarse_index: int, strict: bool = True, sign: float = 1.0) -> float:
    """Maximise the readout over ``[k*beta - beta, k*beta + beta]`` around anchor ``coarse_index``.

    Raises :class:`OptimizerDidNotBracket` when the maximum sits at an edge
    of the interval and ``strict`` is set; otherwise the edge value is
    returned.
    """
    if not 0 <= coarse_index < cb.k_max:
        raise VFAError(f"coarse index {coarse_index} out of range")
    centre = cb.values[coarse_index]
    spec = _spectrum(cb, x)
    return _maximise(cb.encoder.phases, spec, centre - cb.beta, centre + cb.beta, sign, strict)


def decode_point(cb: AnchorCodebook, x, strict: bool = True, starts: Optional[int] = None) -> DecodeResult:
    """Decode a point vector.

    The fine step scans the windows ``[k*beta - beta, k*beta + beta]`` of
    the ``starts`` best anchors (all anchors by default) in one vectorised
    prescan and refines the best grid point with bounded Brent.  Anchors
    are ``beta > 1`` apart, wider than the main lobe of the sinc kernel, so
    a point between two anchors scores only about 0.2 at both and a sidelobe
    elsewhere can win the coarse step; scanning more windows removes those
    gross errors.  ``starts=1`` is the plain coarse-then-fine decoder.
    """
    if starts is None:
        starts = cb.k_max
    if starts < 1:
        raise VFAError("starts must be >= 1")
    data = x.data if isinstance(x, HDVector) else np.asarray(x, dtype=complex)
    if data.shape[-1] != cb.n:
        raise DimensionMismatch(f"vector has n={data.shape[-1]}, codebook n={cb.n}")
    scores = inner_rows(cb.rows, data, cb.encoder.family).real
    order = np.argsort(-scores, kind="stable")[: int(starts)]
    spec = _spectrum(cb, data)
    ph = cb.encoder.phases
    offsets = np.linspace(-cb.beta, cb.beta, PRESCAN_POINTS)
    grid = cb.values[order][:, None] + offsets[None, :]
    vals = _readout(ph, spec, grid)
    w, i = np.unravel_index(int(np.argmax(vals)), vals.shape)
    idx = int(order[w])
    chosen = set(int(o) for o in order)
    at_edge = (i == 0 and idx - 1 not in chosen) or (i == PRESCAN_POINTS - 1 and idx + 1 not in chosen)
    step = offsets[1] - offsets[0]
    # windows share edges; a shared edge is interior to the scanned union
    lo = grid[w, i] - step if (i > 0 or idx - 1 in chosen) else grid[w, 0]
    hi = grid[w, i] + step if (i < PRESCAN_POINTS - 1 or idx + 1 in chosen) else grid[w, -1]
    res = optimize.minimize_scalar(
        lambda s: -float(_readout(ph, spec, s)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": XATOL},
    )
    r_hat = float(res.x)
    if at_edge and strict:
        raise _edge_error(r_hat)
    alpha = float(_readout(ph, spec, r_hat))
    return DecodeResult(r_hat, alpha, alpha, idx)


def detect(cb: AnchorCodebook, x, threshold: Optional[float] = None) -> bool:
    """True iff the decoded confidence reaches ``threshold``.

    The default is calibrated at n = 256 and scaled by ``sqrt(256 / n)`` for
    other dimensions (the null readout shrinks like ``1/sqrt(n)``).
    """
    if threshold is None:
        threshold = min(0.99, DEFAULT_THRESHOLD * np.sqrt(DEFAULT_THRESHOLD_N / cb.n))
    if not 0 < threshold < 1:
        raise VFAError("threshold must lie in (0, 1)")
    return decode_point(cb, x, strict=False).confidence >= threshold


def null_confidences(cb: AnchorCodebook, trials: int, seed: int) -> np.ndarray:
    """Decoded confidences of random unitary vectors (spectral phases uniform)."""
    rng = make_rng(seed)
    fam = cb.encoder.family
    out = np.empty(trials)
    for t in range(trials):
        x = fam.from_spectrum(np.exp(1j * rng.uniform(-np.pi, np.pi, cb.n)))
        out[t] = decode_point(cb, x, strict=False).confidence
    return out


def calibrate_threshold(cb: AnchorCodebook, trials: int = 10000, seed: int = 0, false_accept: float = 0.01) -> float:
    """Empirical ``1 - false_accept`` quantile of :func:`null_confidences`."""
    return float(np.quantile(null_confidences(cb, trials, seed), 1.0 - false_accept))


def add_noise(x: HDVector, snr_db: float, seed: int) -> HDVector:
    """Add i.i.d. circular complex Gaussian noise in the spectral domain.

    Signal power is taken as one per spectral component, so the noise
    variance per component is ``10 ** (-snr_db / 10)``.
    """
    rng = make_rng(seed)
    var = 10.0 ** (-snr_db / 10.0)
    noise = rng.normal(0.0, np.sqrt(var / 2), (2, x.n))
    spec = x.spectrum() + noise[0] + 1j * noise[1]
    return HDVector.from_spectrum(spec, x.family)


def _as_residual(cb, y) -> np.ndarray:
    if isinstance(y, FunctionVector):
        data = y.vec.data
    elif isinstance(y, HDVector):
        data = y.data
    else:
        data = np.asarray(y, dtype=complex)
    return _spectrum(cb, data) * cb.n


def decode_function(
    cb: AnchorCodebook,
    y: Union[FunctionVector, HDVector],
    max_terms: int = 10,
    stop_threshold: float = 0.1,
    refine: bool = False,
) -> List[Tuple[float, float]]:
    """Greedy peeling of a function vector into ``(r_hat, alpha_hat)`` terms.

    ``y`` uses the scaling of :func:`vfa.functions.from_samples` (a bare
    HDVector is read the same way).  Each pass takes the anchor with the
    largest ``|readout|``, maximises ``sign * readout`` around it, and
    subtracts ``alpha_hat * z(r_hat) / n``.  Peeling stops when
    ``|alpha_hat| < stop_threshold`` or after ``max_terms`` terms.

    With ``refine`` all terms found so far are re-fitted jointly (positions
    and coefficients, nonlinear least squares against the original vector)
    after every pass, and the residual is recomputed from the fit.  This
    removes the cross-talk bias that plain peeling leaves behind.
    """
    if max_terms < 1:
        raise VFAError("max_terms must be >= 1")
    target = _as_residual(cb, y)
    res = target.copy()
    ph = cb.encoder.phases
    anchor_spec = cb.encoder.family.to_spectrum(cb.rows)
    terms = []
    for _ in range(int(max_terms)):
        scores = (anchor_spec @ np.conj(res)).real / cb.n
        idx = int(np.argmax(np.abs(scores)))
        sign = 1.0 if scores[idx] >= 0 else -1.0
        centre = cb.values[idx]
        r_hat = _maximise(ph, res, centre - cb.beta, centre + cb.beta, sign, strict=False)
        alpha = float(_readout(ph, res, r_hat))
        if abs(alpha) < stop_threshold:
            break
        terms.append((r_hat, alpha))
        if refine:
            terms = _refine(ph, target, terms)
            weak = [t for t in terms if abs(t[1]) < stop_threshold]
            if weak:
                terms = _refine(ph, target, [t for t in terms if abs(t[1]) >= stop_threshold])
                break
            r = np.array([t[0] for t in terms])
            a = np.array([t[1] for t in terms])
            res = target - a @ np.exp(1j * np.outer(r, ph))
        else:
            res = res - alpha * np.exp(1j * ph * r_hat)
    terms.sort(key=lambda t: -abs(t[1]))
    return terms


def _refine(ph, target, terms):
    k = len(terms)
    if k == 0:
        return []
    x0 = np.array([t[0] for t in terms] + [t[1] for t in terms])

    def resid(p):
        r, a = p[:k], p[k:]
        e = np.exp(1j * np.outer(r, ph))
        d = a @ e - target
        return np.concatenate([d.real, d.imag])

    def jac(p):
        r, a = p[:k], p[k:]
        e = np.exp(1j * np.outer(r, ph))
        dr = (a[:, None] * 1j * ph[None, :] * e).T
        da = e.T
        j = np.hstack([dr, da])
        return np.vstack([j.real, j.imag])

    sol = optimize.least_squares(resid, x0, jac=jac, method="lm", xtol=1e-12, ftol=1e-12)
    return [(float(sol.x[i]), float(sol.x[k + i])) for i in range(k)]


def function_from_terms(enc: FpeEncoder, terms) -> HDVector:
    """Re-encode decoded terms with the :func:`from_samples` scaling."""
    if not terms:
        return HDVector(np.zeros(enc.n, dtype=complex), enc.family)
    r = np.array([t[0] for t in terms])
    a = np.array([t[1] for t in terms])
    return HDVector(a @ enc.encode_many(r) / enc.n, enc.family)
