"""Monte-Carlo drivers shared by the command line and the acceptance suite.

Every driver takes a base seed; run ``t`` uses ``base_seed ^ t`` (and a
second derived stream for the encoder), so results do not depend on the
number of worker threads.  ``VFA_THREADS`` caps the worker pool.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from .core import as_family, make_rng, stream_seed, trial_seed
from .decode import add_noise, build_anchors, decode_function, decode_point, function_from_terms
from .fpe import PhaseDistribution, estimate_kernel, kernel_rmse, recipe, sample_base
from .functions import cosine_similarity, from_samples
from .apps import density as dens
from .apps import regression as reg
from . import shaping

ENCODER_STREAM = 0x5EED_0000_0000


def threads() -> int:
    try:
        return max(1, int(os.environ.get("VFA_THREADS", "1")))
    except ValueError:
        return 1


def run_trials(fn: Callable[[int], object], count: int) -> List:
    """``[fn(0), ..., fn(count - 1)]``, possibly evaluated in parallel, in trial order."""
    workers = min(threads(), count)
    if workers <= 1:
        return [fn(t) for t in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def encoder_seed(base_seed: int, t: int) -> int:
    return trial_seed(stream_seed(base_seed, ENCODER_STREAM), t)


# kernels -----------------------------------------------------------------------


def kernel_target(dist: PhaseDistribution, d) -> np.ndarray:
    """Limit kernel of a phase distribution (real part of its characteristic function)."""
    return dist.characteristic(d).real


def kernel_sweep(dists: Sequence[str], families: Sequence[str], ns: Sequence[int], d_grid, trials: int, seed: int):
    """Kernel estimates and RMSE against the characteristic-function target."""
    estimates, rmse_rows = [], []
    for dname in dists:
        dist = PhaseDistribution.parse(dname) if isinstance(dname, str) else dname
        target = kernel_target(dist, d_grid)
        for fam in families:
            for n in ns:
                est = estimate_kernel(recipe(dist, fam, n), d_grid, trials, seed)
                estimates.append(est)
                rmse_rows.append((dist.label, str(as_family(fam)), n, trials, kernel_rmse(est, lambda d: target)))
    return estimates, rmse_rows


def kernel_2d(mode: str, n: int, trials: int, seed: int, grid=None, family="hadamard"):
    enc = shaping.make_encoder(mode, n, seed, family)
    est = shaping.estimate_kernel_2d(enc, grid, trials, seed)
    target = None
    band = None
    if mode in ("cartesian", "tensor"):
        target, band = shaping.cartesian_sinc, "square"
    elif mode in ("hex_joint", "hex_concat"):
        target, band = shaping.sinc_hex, "hex"
    summary = {"mode": mode, "n": est.n, "trials": trials, "k00": float(est.mean[est.dx.size // 2, est.dy.size // 2])}
    if target is not None:
        summary["rmse"] = shaping.kernel_rmse_2d(est, target)
        summary["inband_dev"], summary["outband_dev"] = shaping.spectral_deviation(est, target, band)
    return est, summary


# decoding ------------------------------------------------------------------------


def decode_point_sweep(ns: Sequence[int], snrs: Sequence[float], trials: int, seed: int,
                       beta: float = 1.6, k_max: int = 20, family="hadamard") -> List[tuple]:
    """Rows ``(snr_db, n, rmse)`` of point decoding under additive noise."""
    rows = []
    uniform = PhaseDistribution.uniform()
    for n in ns:
        def one(t, n=n):
            enc = sample_base(uniform, family, n, encoder_seed(seed, t))
            cb = build_anchors(enc, beta, k_max)
            rng = make_rng(trial_seed(seed, t))
            r = rng.uniform(beta, k_max * beta)
            x = enc.encode(r)
            errs = []
            for j, snr in enumerate(snrs):
                y = add_noise(x, snr, stream_seed(seed, 0x4E, t, j))
                errs.append(decode_point(cb, y, strict=False).r_hat - r)
            return errs
        errs = np.array(run_trials(one, trials))
        for j, snr in enumerate(snrs):
            rows.append((snr, n, float(np.sqrt(np.mean(errs[:, j] ** 2)))))
    return rows


def random_separated(rng, count: int, lo: float, hi: float, gap: float) -> np.ndarray:
    """``count`` sorted points in ``[lo, hi]`` with pairwise spacing greater than ``gap``."""
    span = hi - lo - gap * (count - 1)
    if span <= 0:
        raise ValueError("interval too short for the requested spacing")
    base = np.sort(rng.uniform(0.0, span, count))
    return lo + base + gap * np.arange(count) + 1e-9 * np.arange(count)


def peeling_instance(rng, terms: int, beta: float, k_max: int, gap: float = 2.0):
    r = random_separated(rng, terms, beta, k_max * beta, gap)
    a = rng.uniform(0.5, 1.5, terms) * rng.choice([-1.0, 1.0], terms)
    return r, a


def decode_function_sweep(ns: Sequence[int], term_counts: Sequence[int], trials: int, seed: int,
                          beta: float = 1.6, k_max: int = 20, refine: bool = False) -> List[tuple]:
    """Rows ``(terms, n, cosine_sim)`` between a function vector and its decoded re-encoding."""
    rows = []
    uniform = PhaseDistribution.uniform()
    for n in ns:
        for m in term_counts:
            def one(t, n=n, m=m):
                enc = sample_base(uniform, "hadamard", n, encoder_seed(seed, t))
                cb = build_anchors(enc, beta, k_max)
                rng = make_rng(trial_seed(seed, t))
                r = rng.uniform(beta, k_max * beta, m)
                a = rng.uniform(0.5, 1.5, m) * rng.choice([-1.0, 1.0], m)
                f = from_samples(enc, r, a)
                terms = decode_function(cb, f, max_terms=2 * m, stop_threshold=0.1, refine=refine)
                return cosine_similarity(f.vec, function_from_terms(enc, terms))
            rows.append((m, n, float(np.mean(run_trials(one, trials)))))
    return rows


def peeling_success(n: int, trials: int, seed: int, terms: int = 5, refine: bool = True,
                    beta: float = 1.6, k_max: int = 20) -> float:
    """Fraction of trials recovering every term (position < 1e-2, coefficient < 0.1)."""
    uniform = PhaseDistribution.uniform()

    def one(t):
        enc = sample_base(uniform, "hadamard", n, encoder_seed(seed, t))
        cb = build_anchors(enc, beta, k_max)
        r, a = peeling_instance(make_rng(trial_seed(seed, t)), terms, beta, k_max)
        found = decode_function(cb, from_samples(enc, r, a), max_terms=2 * terms, stop_threshold=0.1, refine=refine)
        if len(found) != terms:
            return False
        found = sorted(found)
        pos = np.array([f[0] for f in found])
        coef = np.array([f[1] for f in found])
        return bool(np.all(np.abs(pos - r) < 1e-2) and np.all(np.abs(coef - a) < 0.1))

    return float(np.mean(run_trials(one, trials)))


# density ------------------------------------------------------------------------


def density_mise(n: Optional[int], k: int, runs: int, seed: int, f_c: float = 0.4, grid=None) -> float:
    """MISE of BLMLTrivial on the surrogate density; ``n=None`` uses the exact kernel."""
    grid = dens.mise_grid() if grid is None else grid
    uniform = PhaseDistribution.uniform()

    def one(t):
        x = dens.sample_surrogate(k, make_rng(trial_seed(seed, t)))
        enc = None if n is None else sample_base(uniform, "hadamard", n, encoder_seed(seed, t))
        est = dens.blml_fit(x, f_c, enc)
        return dens.ise(dens.blml_eval(est, grid), dens.surrogate_pdf, grid)

    return float(np.mean(run_trials(one, runs)))


# regression ---------------------------------------------------------------------


def regression_rmse(method: str, n: Optional[int], k: int, runs: int, seed: int,
                    c: Optional[float] = None, lam: float = 0.01, noise_var: float = 0.01) -> float:
    """Mean RMSE over runs; ``n=None`` uses the exact kernel."""
    c = (20.0 if method == "empirical" else 30.0) if c is None else c
    uniform = PhaseDistribution.uniform()

    def one(t):
        X, Y = reg.draw_training(k, make_rng(trial_seed(seed, t)), noise_var)
        enc = None if n is None else sample_base(uniform, "hadamard", n, encoder_seed(seed, t))
        return reg.rmse(reg.regress_fit(X, Y, method, c, enc, lam))

    return float(np.mean(run_trials(one, runs)))


def n_floor(rmse_by_n: Sequence[tuple], reference: float, factor: float = 1.25):
    """Smallest n whose RMSE is within ``factor`` of the exact-kernel reference (None if none)."""
    for n, value in sorted(rmse_by_n):
        if value <= factor * reference:
            return n
    return None


def is_decreasing(values: Iterable[float]) -> bool:
    v = list(values)
    return all(b < a for a, b in zip(v, v[1:]))


def decreases_to_floor(values: Iterable[float], tol: float = 0.1) -> bool:
    """True if the curve falls at first and never climbs more than ``tol`` above its running minimum.

    Strictly decreasing curves pass; so do curves that flatten on a floor.
    """
    v = list(values)
    if len(v) < 2 or not v[1] < v[0]:
        return False
    low = v[0]
    for x in v[1:]:
        if x > (1.0 + tol) * low:
            return False
        low = min(low, x)
    return True
