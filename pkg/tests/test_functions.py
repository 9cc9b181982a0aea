import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vfa.core import HDVector
from vfa.errors import ArityMismatch, EmptyFunction, EncoderMismatch, FormatError, LengthMismatch
from vfa.fpe import PhaseDistribution, sample_base
from vfa.functions import (
    add,
    convolve,
    cosine_similarity,
    eval,
    eval_many,
    f_inner,
    from_bytes,
    from_samples,
    load,
    oracle_eval,
    oracle_inner,
    save,
    scale,
    shift,
    to_bytes,
    zero_function,
)
from vfa.shaping import make_encoder

FAMILIES = ["hadamard", "circular", "block:8"]
UNIFORM = PhaseDistribution.uniform()

coeffs = st.lists(st.floats(-1, 1), min_size=1, max_size=6)
points = st.floats(-5, 5)


def sampled_kernel(enc):
    """The kernel realised by one encoder: the mean of its plane waves."""
    ph = enc.phases

    def k(d):
        d = np.asarray(d, dtype=float)
        return np.exp(1j * d[..., None] * ph).mean(axis=-1).real

    return k


@pytest.fixture(scope="module", params=FAMILIES)
def enc(request):
    return sample_base(UNIFORM, request.param, 256, seed=21)


def random_function(enc, rng, count):
    return from_samples(enc, rng.uniform(-5, 5, count), rng.uniform(-1, 1, count))


class TestReadout:
    def test_single_term_is_the_kernel(self, enc):
        f = from_samples(enc, [1.5], [2.0])
        k = sampled_kernel(enc)
        for s in (-2.0, 0.0, 1.5, 3.3):
            assert eval(f, s) == pytest.approx(2.0 * k(1.5 - s), abs=1e-12)

    def test_eval_matches_oracle(self, enc, rng):
        f = random_function(enc, rng, 5)
        s = rng.uniform(-6, 6, 20)
        expected = [oracle_eval(sampled_kernel(enc), f.terms, x) for x in s]
        assert np.allclose(eval_many(f, s), expected, atol=1e-12)

    def test_call_is_eval(self, enc):
        f = from_samples(enc, [0.0, 1.0], [1.0, -0.5])
        assert f(0.3) == eval(f, 0.3)

    def test_peak_at_support(self):
        enc = sample_base(UNIFORM, "hadamard", 4096, seed=3)
        f = from_samples(enc, [0.0, 6.0], [1.0, 1.0])
        assert eval(f, 0.0) == pytest.approx(1.0, abs=0.05)
        assert abs(eval(f, 3.0)) < 0.1

    def test_eval_rejects_many_points(self, enc):
        f = from_samples(enc, [0.0], [1.0])
        with pytest.raises(ArityMismatch):
            eval(f, [0.0, 1.0])

    def test_zero_function(self, enc):
        assert np.allclose(eval_many(zero_function(enc), [0.0, 1.0]), 0.0)

    def test_oracle_eval_of_nothing(self):
        assert oracle_eval(np.sinc, None, 0.0) == 0.0


class TestAlgebra:
    @given(a=coeffs, b=coeffs, s=points)
    def test_add_is_linear(self, a, b, s):
        enc = sample_base(UNIFORM, "hadamard", 64, seed=1)
        f = from_samples(enc, np.linspace(-3, 3, len(a)), a)
        g = from_samples(enc, np.linspace(-2, 4, len(b)), b)
        assert eval(add(f, g), s) == pytest.approx(eval(f, s) + eval(g, s), abs=1e-10)
        assert eval(f + g, s) == pytest.approx(eval(add(f, g), s), abs=1e-12)

    @given(c=coeffs, a=st.floats(-3, 3), s=points)
    def test_scale(self, c, a, s):
        enc = sample_base(UNIFORM, "circular", 64, seed=2)
        f = from_samples(enc, np.linspace(-3, 3, len(c)), c)
        assert eval(scale(f, a), s) == pytest.approx(a * eval(f, s), abs=1e-10)

    @pytest.mark.parametrize("family", FAMILIES)
    @given(r=st.floats(-4, 4), s=points)
    def test_shift_moves_the_graph(self, family, r, s):
        enc = sample_base(UNIFORM, family, 64, seed=5)
        f = from_samples(enc, [-1.0, 0.5, 2.0], [1.0, -0.3, 0.7])
        assert eval(shift(f, r), s) == pytest.approx(eval(f, s - r), abs=1e-10)

    def test_shift_tracks_terms(self, enc):
        f = from_samples(enc, [0.0, 1.0], [1.0, 2.0])
        g = shift(f, 2.5)
        assert np.allclose(g.terms[0], [2.5, 3.5])
        assert np.allclose(g.vec.data, from_samples(enc, [2.5, 3.5], [1.0, 2.0]).vec.data)

    def test_convolve_matches_pairwise_supports(self, enc, rng):
        f = random_function(enc, rng, 3)
        g = random_function(enc, rng, 4)
        h = convolve(f, g)
        direct = from_samples(enc, (f.terms[0][:, None] + g.terms[0][None, :]).ravel(),
                              np.outer(f.terms[1], g.terms[1]).ravel())
        assert np.allclose(h.vec.data, direct.vec.data, atol=1e-12)
        assert np.allclose(h.terms[1], direct.terms[1])

    def test_inner_matches_oracle(self, enc, rng):
        f = random_function(enc, rng, 4)
        g = random_function(enc, rng, 3)
        assert f_inner(f, g) == pytest.approx(oracle_inner(sampled_kernel(enc), f.terms, g.terms), abs=1e-10)

    def test_inner_is_symmetric(self, enc, rng):
        f = random_function(enc, rng, 4)
        g = random_function(enc, rng, 3)
        assert f_inner(f, g) == pytest.approx(f_inner(g, f), abs=1e-12)

    def test_inner_with_self_is_nonnegative(self, enc, rng):
        f = random_function(enc, rng, 6)
        assert f_inner(f, f) >= 0

    def test_two_dimensional_shift(self, rng):
        enc = make_encoder("cartesian", 128, 4)
        f = from_samples(enc, rng.uniform(-3, 3, (4, 2)), rng.uniform(-1, 1, 4))
        r = np.array([0.7, -1.4])
        s = np.array([0.2, 0.5])
        assert eval(shift(f, r), s) == pytest.approx(eval(f, s - r), abs=1e-10)

    def test_cosine_similarity(self, enc):
        f = from_samples(enc, [0.0, 1.0], [1.0, 2.0])
        assert cosine_similarity(f.vec, f.vec) == pytest.approx(1.0)
        assert cosine_similarity(f.vec, zero_function(enc).vec) == 0.0


class TestErrors:
    def test_length_mismatch(self, enc):
        with pytest.raises(LengthMismatch):
            from_samples(enc, [0.0, 1.0], [1.0])

    def test_empty(self, enc):
        with pytest.raises(EmptyFunction):
            from_samples(enc, [], [])

    def test_different_encoders(self):
        a = from_samples(sample_base(UNIFORM, "hadamard", 32, 1), [0.0], [1.0])
        b = from_samples(sample_base(UNIFORM, "hadamard", 32, 2), [0.0], [1.0])
        for op in (add, convolve, f_inner):
            with pytest.raises(EncoderMismatch):
                op(a, b)

    def test_equal_encoders_are_compatible(self):
        a = from_samples(sample_base(UNIFORM, "hadamard", 32, 1), [0.0], [1.0])
        b = from_samples(sample_base(UNIFORM, "hadamard", 32, 1), [1.0], [1.0])
        assert add(a, b).terms[1].size == 2

    def test_multidimensional_points_on_1d_encoder(self, enc):
        with pytest.raises(ArityMismatch):
            from_samples(enc, [[0.0, 1.0]], [1.0])

    def test_shift_needs_one_displacement(self, enc):
        f = from_samples(enc, [0.0], [1.0])
        with pytest.raises(ArityMismatch):
            shift(f, [1.0, 2.0])


class TestSerialization:
    def test_round_trip(self, enc, rng):
        f = random_function(enc, rng, 5)
        g = from_bytes(to_bytes(f), enc)
        assert g.family == f.family
        assert np.array_equal(g.vec.data, f.vec.data)
        assert np.array_equal(g.terms[0], f.terms[0])
        assert np.array_equal(g.terms[1], f.terms[1])
        assert eval(g, 0.4) == eval(f, 0.4)

    def test_round_trip_without_terms(self, enc):
        f = zero_function(enc)
        g = from_bytes(to_bytes(f))
        assert g.terms is None
        assert g.encoder is None
        assert np.array_equal(g.vec.data, f.vec.data)

    def test_round_trip_2d_terms(self, rng):
        enc = make_encoder("cartesian", 64, 1)
        f = from_samples(enc, rng.uniform(-2, 2, (3, 2)), [1.0, 2.0, 3.0])
        g = from_bytes(to_bytes(f), enc)
        assert g.terms[0].shape == (3, 2)
        assert np.array_equal(g.terms[0], f.terms[0])

    def test_file_round_trip(self, enc, tmp_path):
        f = from_samples(enc, [0.0, 1.0], [1.0, -1.0])
        path = tmp_path / "f.vfa"
        save(f, path)
        assert np.array_equal(load(path, enc).vec.data, f.vec.data)

    def test_header_layout(self, enc):
        data = to_bytes(from_samples(enc, [0.0], [1.0]))
        assert data[:4] == b"VFAF"
        assert int.from_bytes(data[4:6], "little") == 1

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d[:10],
            lambda d: b"XXXX" + d[4:],
            lambda d: d[:4] + (2).to_bytes(2, "little") + d[6:],
            lambda d: d[:6] + bytes([9]) + d[7:],
            lambda d: d + b"\x00",
            lambda d: d[:-8],
        ],
        ids=["short", "magic", "version", "family", "trailing", "truncated"],
    )
    def test_format_errors(self, enc, mutate):
        data = to_bytes(from_samples(enc, [0.0, 1.0], [1.0, 2.0]))
        with pytest.raises(FormatError):
            from_bytes(mutate(data))

    def test_encoder_mismatch_on_load(self, enc):
        data = to_bytes(from_samples(enc, [0.0], [1.0]))
        other = sample_base(UNIFORM, "hadamard", 128, 0)
        with pytest.raises(EncoderMismatch):
            from_bytes(data, other)

    def test_family_code_round_trip(self):
        enc = sample_base(UNIFORM, "block:16", 64, 0)
        g = from_bytes(to_bytes(from_samples(enc, [0.0], [1.0])))
        assert g.family == enc.family
        assert isinstance(g.vec, HDVector)


class TestShiftGroup:
    def test_zero_shift_is_identity(self, enc):
        f = from_samples(enc, [0.5, -1.0], [1.0, 0.3])
        assert np.allclose(shift(f, 0.0).vec.data, f.vec.data, atol=1e-15)

    def test_shifts_compose(self, enc):
        f = from_samples(enc, [0.5, -1.0], [1.0, 0.3])
        assert np.allclose(shift(shift(f, 1.2), -3.1).vec.data, shift(f, -1.9).vec.data, atol=1e-12)

    def test_shift_preserves_norm(self, enc, rng):
        f = random_function(enc, rng, 5)
        for r in rng.uniform(-10, 10, 5):
            assert np.linalg.norm(shift(f, r).vec.data) == pytest.approx(np.linalg.norm(f.vec.data), rel=1e-10)
