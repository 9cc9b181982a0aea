import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vfa.core import inner, make_rng, random_symbol, stream_seed
from vfa.experiments import (
    decreases_to_floor,
    encoder_seed,
    is_decreasing,
    kernel_sweep,
    n_floor,
    peeling_instance,
    peeling_success,
    random_separated,
    run_trials,
    threads,
)


class TestHelpers:
    def test_threads_env(self, monkeypatch):
        monkeypatch.delenv("VFA_THREADS", raising=False)
        assert threads() == 1
        monkeypatch.setenv("VFA_THREADS", "4")
        assert threads() == 4
        monkeypatch.setenv("VFA_THREADS", "many")
        assert threads() == 1

    def test_run_trials_keeps_order(self, monkeypatch):
        monkeypatch.setenv("VFA_THREADS", "4")
        assert run_trials(lambda t: t * t, 10) == [t * t for t in range(10)]

    def test_encoder_seed_differs_from_trial_seed(self):
        assert len({encoder_seed(5, t) for t in range(50)} & {5 ^ t for t in range(50)}) == 0

    @pytest.mark.parametrize(
        "values, expected",
        [([3, 2, 1], True), ([3, 3, 1], False), ([1, 2], False), ([5], True)],
    )
    def test_is_decreasing(self, values, expected):
        assert is_decreasing(values) is expected

    @pytest.mark.parametrize(
        "values, expected",
        [
            ([1.0, 0.5, 0.25], True),
            ([1.0, 0.5, 0.52, 0.5], True),
            ([1.0, 0.5, 0.6], False),
            ([1.0, 1.0, 0.5], False),
            ([1.0], False),
        ],
    )
    def test_decreases_to_floor(self, values, expected):
        assert decreases_to_floor(values) is expected

    def test_n_floor(self):
        rows = [(64, 0.3), (256, 0.12), (1024, 0.11)]
        assert n_floor(rows, 0.1) == 256
        assert n_floor(rows, 0.01) is None
        assert n_floor(rows, 0.5) == 64

    @given(st.integers(1, 6), st.integers(0, 10_000))
    def test_random_separated(self, count, seed):
        pts = random_separated(make_rng(seed), count, 1.6, 32.0, 2.0)
        assert pts.size == count
        assert np.all(np.diff(pts) > 2.0)
        assert pts.min() >= 1.6 and pts.max() <= 32.0 + 1e-6

    def test_random_separated_too_tight(self):
        with pytest.raises(ValueError):
            random_separated(make_rng(0), 20, 0.0, 10.0, 2.0)

    def test_peeling_instance_coefficients(self):
        r, a = peeling_instance(make_rng(1), 5, 1.6, 20)
        assert np.all((np.abs(a) >= 0.5) & (np.abs(a) <= 1.5))
        assert r.size == 5


class TestDrivers:
    def test_kernel_sweep_rows(self):
        est, rows = kernel_sweep(["uniform"], ["hadamard", "circular"], [32, 64], np.array([0.0, 1.0]), 3, 0)
        assert len(est) == 4
        assert [r[1:4] for r in rows] == [("hadamard", 32, 3), ("hadamard", 64, 3), ("circular", 32, 3), ("circular", 64, 3)]
        assert all(r[0] == "uniform" and r[4] >= 0 for r in rows)

    def test_peeling_success_fraction(self):
        assert 0.0 <= peeling_success(256, 4, seed=3) <= 1.0


class TestConcentration:
    def test_inner_product_std_scales_as_inverse_sqrt_n(self):
        scaled = []
        for n in (64, 256, 1024):
            vals = [inner(random_symbol(n, "hadamard", stream_seed(n, t, 0)),
                          random_symbol(n, "hadamard", stream_seed(n, t, 1))).real for t in range(1000)]
            scaled.append(np.std(vals) * np.sqrt(n))
        assert max(scaled) / min(scaled) < 2.0
