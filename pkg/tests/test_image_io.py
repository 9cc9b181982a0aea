import numpy as np
import pytest

from vfa.apps.image import (
    circular_kernel_readout,
    compose,
    correlation,
    glyph,
    image_decode,
    image_encode,
    image_encoders,
    image_translate,
    render_glyph,
)
from vfa.errors import FamilyMismatch, FormatError, SizeMismatch, VFAError
from vfa.fpe import PhaseDistribution, sample_base
from vfa.io import companion_path, csv_body, csv_text, read_csv, read_pgm, write_csv, write_pgm


@pytest.fixture(scope="module")
def encoders():
    return image_encoders(1024, seed=6, width=24, height=16)


@pytest.fixture()
def picture(rng):
    return rng.uniform(0, 1, (16, 24))


class TestImage:
    def test_decode_matches_kernel_oracle(self, encoders, picture):
        scene = image_encode(picture, *encoders)
        assert np.allclose(image_decode(scene), circular_kernel_readout(picture, *encoders), atol=1e-10)

    def test_integer_translation_is_a_roll(self, encoders, picture):
        scene = image_encode(picture, *encoders)
        moved = image_decode(image_translate(scene, 5, 3))
        assert np.allclose(moved, np.roll(image_decode(scene), (3, 5), axis=(0, 1)), atol=1e-10)

    def test_torus_wraps(self, encoders, picture):
        scene = image_encode(picture, *encoders)
        full = image_translate(scene, 24, 16)
        assert np.allclose(full.vec.data, scene.vec.data, atol=1e-10)

    def test_translation_composes(self, encoders, picture):
        scene = image_encode(picture, *encoders)
        a = image_translate(image_translate(scene, 2, 1), 3, 4)
        b = image_translate(scene, 5, 5)
        assert np.allclose(a.vec.data, b.vec.data, atol=1e-10)

    def test_readout_resembles_image(self, encoders):
        img = render_glyph("A", 24, 16, scale=2)
        out = image_decode(image_encode(img, *encoders))
        assert correlation(out, img) > 0.9

    def test_compose_adds(self, encoders, picture):
        a = image_encode(picture, *encoders)
        b = image_encode(picture[::-1], *encoders)
        assert np.allclose(image_decode(a + b), image_decode(a) + image_decode(b), atol=1e-10)
        assert np.allclose(compose(a, b).vec.data, (a + b).vec.data)

    def test_compose_rejects_other_encoders(self, encoders, picture):
        other = image_encoders(1024, seed=7, width=24, height=16)
        with pytest.raises(VFAError):
            compose(image_encode(picture, *encoders), image_encode(picture, *other))

    def test_size_mismatch(self, encoders):
        with pytest.raises(SizeMismatch):
            image_encode(np.zeros((16, 20)), *encoders)
        with pytest.raises(SizeMismatch):
            image_encode(np.zeros(16), *encoders)

    def test_family_mismatch(self, encoders):
        circ = sample_base(PhaseDistribution.discrete_roots(24), "circular", 1024, 0)
        with pytest.raises(FamilyMismatch):
            image_encode(np.zeros((16, 24)), circ, encoders[1])

    def test_aperiodic_encoder_rejected(self, encoders):
        plain = sample_base(PhaseDistribution.uniform(), "hadamard", 1024, 0)
        with pytest.raises(SizeMismatch):
            image_encode(np.zeros((16, 24)), plain, encoders[1])

    def test_glyphs(self):
        g = glyph("a")
        assert g.shape == (7, 5)
        assert set(np.unique(g)) <= {0.0, 1.0}
        with pytest.raises(VFAError):
            glyph("%")

    def test_render_centres_glyph(self):
        canvas = render_glyph("I", 56, 56, scale=8)
        assert canvas.shape == (56, 56)
        assert canvas.sum() == glyph("I").sum() * 64
        ys, xs = np.nonzero(canvas)
        assert (ys.min() + ys.max()) / 2 == pytest.approx(27.5, abs=1)


class TestCSV:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "out.csv"
        meta = {"command": "kernel", "seed": 7, "config": {"n": [64, 256]}}
        write_csv(path, ("d", "k"), [(0.0, 1.0), (0.5, 0.637)], meta)
        got_meta, cols, rows = read_csv(path)
        assert cols == ["d", "k"]
        assert rows == [["0.0", "1.0"], ["0.5", "0.637"]]
        assert got_meta["command"] == "kernel"
        assert got_meta["seed"] == "7"
        assert got_meta["config"] == '{"n": [64, 256]}'

    def test_float_repr_is_exact(self):
        text = csv_text(["x"], [(np.float64(0.1) + np.float64(0.2),)], {})
        assert float(csv_body(text).splitlines()[1]) == 0.1 + 0.2

    def test_body_strips_meta(self):
        text = csv_text(["a"], [(np.int64(1),)], {"k": "v"})
        assert csv_body(text) == "a\n1\n"

    def test_stdout(self, capsys):
        write_csv("-", ["a"], [(1,)], {})
        assert capsys.readouterr().out == "a\n1\n"

    def test_empty_file(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("# only: meta\n")
        with pytest.raises(FormatError):
            read_csv(p)

    def test_companion_path(self):
        assert companion_path("runs/k.csv", "rmse") == "runs/k_rmse.csv"
        assert companion_path("k", "rmse") == "k_rmse.csv"
        assert companion_path("-", "rmse") is None


class TestPGM:
    @pytest.mark.parametrize("binary", [True, False])
    @pytest.mark.parametrize("maxval", [255, 1023])
    def test_round_trip(self, tmp_path, binary, maxval, rng):
        img = np.round(rng.uniform(0, 1, (7, 9)) * maxval) / maxval
        path = tmp_path / "i.pgm"
        write_pgm(path, img, binary=binary, maxval=maxval)
        assert np.allclose(read_pgm(path), img)

    def test_clips_range(self, tmp_path):
        path = tmp_path / "c.pgm"
        write_pgm(path, np.array([[-1.0, 2.0]]))
        assert np.array_equal(read_pgm(path), [[0.0, 1.0]])

    def test_header_comments(self, tmp_path):
        path = tmp_path / "h.pgm"
        path.write_bytes(b"P2\n# made by hand\n2 1\n# max\n4\n0 4\n")
        assert np.allclose(read_pgm(path), [[0.0, 1.0]])

    @pytest.mark.parametrize(
        "data",
        [b"P6\n1 1\n255\n\x00", b"P5\n2 2\n255\n\x00", b"P2\n1", b"P2\nx 1\n255\n0", b"P2\n1 1\n0\n0"],
        ids=["magic", "truncated-raster", "truncated-header", "bad-width", "bad-maxval"],
    )
    def test_format_errors(self, tmp_path, data):
        path = tmp_path / "bad.pgm"
        path.write_bytes(data)
        with pytest.raises(FormatError):
            read_pgm(path)

    def test_rejects_3d(self, tmp_path):
        with pytest.raises(FormatError):
            write_pgm(tmp_path / "x.pgm", np.zeros((2, 2, 3)))
