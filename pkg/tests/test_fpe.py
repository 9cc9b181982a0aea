import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from vfa.core import CIRCULAR, HADAMARD, bind, block, inner, is_unitary, make_rng
from vfa.errors import GridMismatch, InvalidDensity, VFAError
from vfa.fpe import (
    KernelEstimate,
    PhaseDistribution,
    abs_sinc_distribution,
    default_grid,
    encode,
    estimate_kernel,
    kernel_rmse,
    kernel_trials,
    laplace_kernel,
    laplace_kernel_distribution,
    recipe,
    rmse_sweep,
    sample_base,
    sinc_kernel,
    triangle_kernel,
    triangle_kernel_distribution,
)

FAMILIES = ["hadamard", "circular", "block:8"]


def quad_cf(pdf, d):
    """Characteristic function by adaptive quadrature (independent of the library's trapezoid)."""
    re = integrate.quad(lambda p: pdf(p) * np.cos(p * d), -np.pi, np.pi, limit=200)[0]
    im = integrate.quad(lambda p: pdf(p) * np.sin(p * d), -np.pi, np.pi, limit=200)[0]
    return re + 1j * im


class TestPhaseDistribution:
    @pytest.mark.parametrize(
        "text, kind, param",
        [
            ("uniform", "uniform", None),
            ("gaussian:0.5", "gaussian", 0.5),
            ("laplace:2", "laplace", 2.0),
            ("triangular:1", "triangular", 1.0),
            ("roots:8", "discrete_roots", 8.0),
            ("discrete_roots:3", "discrete_roots", 3.0),
        ],
    )
    def test_parse(self, text, kind, param):
        d = PhaseDistribution.parse(text)
        assert d.kind == kind
        assert d.param == param

    @pytest.mark.parametrize("text", ["kernel-laplace:4", "kernel-triangle:4", "abssinc:1"])
    def test_parse_named_custom(self, text):
        d = PhaseDistribution.parse(text)
        assert d.kind == "custom"
        assert d.label == text

    @pytest.mark.parametrize("text", ["cauchy", "gaussian:-1", "roots:1", "gaussian:abc", "triangular:4"])
    def test_parse_rejects(self, text):
        with pytest.raises(VFAError):
            PhaseDistribution.parse(text)

    @pytest.mark.parametrize(
        "dist",
        [
            PhaseDistribution.uniform(),
            PhaseDistribution.gaussian(1.0),
            PhaseDistribution.laplace(0.7),
            PhaseDistribution.triangular(2.0),
            abs_sinc_distribution(1.0),
        ],
        ids=lambda d: d.label,
    )
    def test_density_integrates_to_one(self, dist):
        g = np.linspace(-np.pi, np.pi, 20001)
        assert integrate.trapezoid(dist.density(g), g) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize(
        "dist",
        [PhaseDistribution.gaussian(0.8), PhaseDistribution.laplace(1.0), PhaseDistribution.triangular(np.pi)],
        ids=lambda d: d.label,
    )
    @pytest.mark.parametrize("d", [0.3, 1.0, 2.5])
    def test_characteristic_matches_quad(self, dist, d):
        assert dist.characteristic(d)[0] == pytest.approx(quad_cf(dist.density, d), abs=1e-6)

    def test_uniform_characteristic_is_sinc(self):
        d = np.linspace(-5, 5, 41)
        assert np.allclose(PhaseDistribution.uniform().characteristic(d).real, np.sinc(d), atol=1e-6)

    def test_triangular_pi_frozen(self):
        # full-width triangle on [-pi, pi]: characteristic function sinc(d / 2)^2
        assert PhaseDistribution.triangular(np.pi).characteristic(1.0)[0].real == pytest.approx(
            (2 / np.pi) ** 2, abs=1e-7
        )

    def test_gaussian_truncation_frozen(self):
        # truncation to [-pi, pi] lifts the value above exp(-1/2)
        assert PhaseDistribution.gaussian(1.0).characteristic(1.0)[0].real == pytest.approx(0.60912249, abs=1e-7)
        assert np.exp(-0.5) < 0.60912249

    @pytest.mark.parametrize(
        "dist",
        [PhaseDistribution.gaussian(2.0), PhaseDistribution.laplace(3.0), abs_sinc_distribution(1.0)],
        ids=lambda d: d.label,
    )
    def test_samples_stay_in_range_and_match_mean(self, dist):
        x = dist.sample(make_rng(3), 20000)
        assert np.all((x >= -np.pi) & (x < np.pi))
        # second moment of the density on a fine grid
        g = np.linspace(-np.pi, np.pi, 200001)
        m2 = integrate.trapezoid(g * g * dist.density(g), g)
        assert np.mean(x ** 2) == pytest.approx(m2, rel=0.05)

    def test_discrete_roots_values(self):
        d = PhaseDistribution.discrete_roots(4)
        assert np.allclose(np.sort(d.values), [-np.pi, -np.pi / 2, 0, np.pi / 2])
        assert set(np.round(d.sample(make_rng(1), 100), 12)) <= set(np.round(d.values, 12))
        with pytest.raises(VFAError):
            d.density(0.0)

    def test_discrete_set_weights(self):
        d = PhaseDistribution.discrete_set([0.0, 1.0], [3, 1])
        assert np.allclose(d.weights, [0.75, 0.25])
        assert d.characteristic(2.0)[0] == pytest.approx(0.75 + 0.25 * np.exp(2j))

    class TestCustom:
        def test_valid(self):
            g = np.linspace(-np.pi, np.pi, 101)
            d = PhaseDistribution.custom(np.full(101, 1 / (2 * np.pi)), g)
            assert d.density(0.1) == pytest.approx(1 / (2 * np.pi))

        def test_negative(self):
            g = np.linspace(-np.pi, np.pi, 3)
            with pytest.raises(InvalidDensity):
                PhaseDistribution.custom([-1.0, 1.0, 1.0], g)

        def test_not_normalised(self):
            with pytest.raises(InvalidDensity):
                PhaseDistribution.custom(np.ones(11))

        def test_support_outside(self):
            with pytest.raises(InvalidDensity):
                PhaseDistribution.custom([0.5, 0.5], [-4.0, -2.0])

        def test_zero_mass_density(self):
            with pytest.raises(InvalidDensity):
                PhaseDistribution.from_density(lambda g: np.zeros_like(g))


class TestBochner:
    def test_laplace_kernel_density_is_cauchy(self):
        s = 4.0
        dist = laplace_kernel_distribution(s)
        g = np.linspace(-np.pi, np.pi, 401)
        cauchy = (1 / np.pi) * (1 / s) / ((1 / s) ** 2 + g ** 2)
        cauchy /= integrate.trapezoid(cauchy, g)
        assert np.allclose(dist.density(g), cauchy, rtol=0.02)

    def test_triangle_kernel_density_is_sinc_squared(self):
        w = 4.0
        dist = triangle_kernel_distribution(w)
        g = np.linspace(-np.pi, np.pi, 401)
        ft = (w / (2 * np.pi)) * np.sinc(w * g / (2 * np.pi)) ** 2
        ft /= integrate.trapezoid(ft, g)
        assert np.allclose(dist.density(g), ft, atol=2e-3)

    def test_kernel_helpers(self):
        assert laplace_kernel(4.0) == pytest.approx(np.exp(-1))
        assert triangle_kernel([0.0, 2.0, 5.0]).tolist() == [1.0, 0.5, 0.0]
        assert sinc_kernel(0.5) == pytest.approx(2 / np.pi)


class TestEncoder:
    @pytest.mark.parametrize("fam", FAMILIES)
    @given(r1=st.floats(-50, 50), r2=st.floats(-50, 50))
    def test_binding_adds_values(self, fam, r1, r2):
        enc = sample_base(PhaseDistribution.uniform(), fam, 64, 5)
        assert enc.encode(r1 + r2).allclose(bind(enc.encode(r1), enc.encode(r2)), atol=1e-9)

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_encode_zero_is_identity_and_unitary(self, fam):
        enc = sample_base(PhaseDistribution.gaussian(1.0), fam, 64, 5)
        z0 = enc.encode(0.0)
        assert np.allclose(z0.spectrum(), 1.0)
        assert is_unitary(enc(3.7))
        assert encode(enc, 1.0).allclose(enc.encode(1.0))

    def test_rejects_non_finite(self):
        enc = sample_base(PhaseDistribution.uniform(), HADAMARD, 8, 0)
        with pytest.raises(VFAError):
            enc.encode(np.nan)

    def test_uniform_block_base_is_sparse(self):
        enc = sample_base(PhaseDistribution.uniform(), block(4), 32, 9)
        for r in (1.0, 2.0, -3.0):
            assert np.count_nonzero(np.abs(enc.encode(r).data) > 1e-9) == 4

    def test_real_valued_circular(self):
        enc = sample_base(PhaseDistribution.uniform(), CIRCULAR, 33, 2, real_valued=True)
        rows = enc.encode_many([0.3, 1.7, -4.2])
        assert np.max(np.abs(rows.imag)) < 1e-12
        assert np.all(enc.encode(0.3).data.imag == 0)
        with pytest.raises(VFAError):
            sample_base(PhaseDistribution.uniform(), HADAMARD, 8, 0, real_valued=True)

    def test_seed_determinism_frozen(self):
        enc = sample_base(PhaseDistribution.uniform(), HADAMARD, 8, 42)
        assert np.allclose(enc.phases[:3], [-2.60075095, -2.25216176, -1.44454806])

    def test_base_phase_count_checked(self):
        from vfa.core import PhaseVector
        from vfa.fpe import FpeEncoder

        with pytest.raises(VFAError):
            FpeEncoder(HADAMARD, 4, PhaseVector([0.0, 1.0]))


class TestKernelEstimate:
    def test_frozen_small_run(self):
        est = estimate_kernel(recipe("uniform", "hadamard", 64), [0.0, 0.5, 2.0], 5, 7)
        assert np.allclose(est.mean, [1.0, 0.63330019, 0.03219738])

    @pytest.mark.parametrize("fam", FAMILIES)
    def test_uniform_converges_to_sinc(self, fam):
        g = default_grid(5.0, 0.1)
        est = estimate_kernel(recipe("uniform", fam, 1024), g, 20, 3)
        assert kernel_rmse(est, sinc_kernel) < 0.02
        assert est.mean[g.size // 2] == pytest.approx(1.0)

    def test_imaginary_part_vanishes_for_symmetric_density(self):
        g = default_grid(5.0, 0.1)
        est = estimate_kernel(recipe("gaussian:1", "hadamard", 1024), g, 20, 3)
        assert np.max(np.abs(est.imag_mean)) < 0.02

    def test_kernel_is_translation_invariant(self):
        g = np.array([0.25, 1.0])
        a = kernel_trials(recipe("uniform", "hadamard", 128), g, 2, 11, r0=0.0)
        b = kernel_trials(recipe("uniform", "hadamard", 128), g, 2, 11, r0=17.0)
        assert np.allclose(a, b)

    def test_grid_mismatch(self):
        a = estimate_kernel(recipe("uniform", "hadamard", 16), [0.0, 1.0], 2, 1)
        b = estimate_kernel(recipe("uniform", "hadamard", 16), [0.0, 2.0], 2, 1)
        with pytest.raises(GridMismatch):
            kernel_rmse(a, b)
        assert kernel_rmse(a, a) == 0.0

    def test_rows_and_columns(self):
        est = estimate_kernel(recipe("uniform", "hadamard", 16), [0.0, 1.0], 3, 1)
        rows = list(est.rows())
        assert len(rows) == 2 and len(rows[0]) == len(KernelEstimate.columns)

    def test_trials_must_be_positive(self):
        with pytest.raises(VFAError):
            estimate_kernel(recipe("uniform", "hadamard", 16), [0.0], 0, 1)

    def test_rmse_shrinks_with_n(self):
        g = default_grid(5.0, 0.1)
        r = rmse_sweep("uniform", "hadamard", [64, 4096], g, 10, 5, sinc_kernel)
        assert r[1] < r[0] / 3

    def test_discrete_roots_kernel_is_periodic(self):
        enc = recipe("roots:8", "hadamard", 256)
        est = estimate_kernel(enc, [0.5, 8.5, 16.5], 3, 2)
        assert np.allclose(est.mean, est.mean[0])
