"""Images as functions on a discrete torus.

Pixel ``(x, y)`` with intensity ``I`` contributes ``I * bind(ex(x), ey(y))``
to the scene vector, where ``ex`` and ``ey`` are Hadamard FPEs whose phases
are roots of unity of order ``width`` and ``height``.  Their kernel is
periodic, so integer translations are exact circular shifts and the scene
lives on a torus.  Arrays are indexed ``pixels[y, x]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import HADAMARD, HDVector, bind, stream_seed
from ..errors import FamilyMismatch, SizeMismatch, VFAError
from ..fpe import FpeEncoder, PhaseDistribution, sample_base

WIDTH = HEIGHT = 56


@dataclass(frozen=True, eq=False)
class ImageScene:
    vec: HDVector
    width: int
    height: int
    encX: FpeEncoder
    encY: FpeEncoder

    def __add__(self, other: "ImageScene") -> "ImageScene":
        return compose(self, other)


def image_encoders(n: int, seed: int, width: int = WIDTH, height: int = HEIGHT):
    """Periodic Hadamard encoders for the two image axes."""
    ex = sample_base(PhaseDistribution.discrete_roots(width), HADAMARD, n, stream_seed(seed, 0x78))
    ey = sample_base(PhaseDistribution.discrete_roots(height), HADAMARD, n, stream_seed(seed, 0x79))
    return ex, ey


def _check_encoders(encX, encY, width, height):
    for e, size in ((encX, width), (encY, height)):
        d = e.distribution
        if e.family != HADAMARD:
            raise FamilyMismatch("image encoders must use the hadamard family")
        if d is None or d.kind != "discrete_roots" or int(d.param) != size:
            raise SizeMismatch(f"encoder periodicity does not match image size {size}")
    if encX.n != encY.n:
        raise VFAError("image encoders must share n")


def image_encode(pixels, encX: FpeEncoder, encY: FpeEncoder) -> ImageScene:
    """Scene vector ``(1/n) sum_{x,y} I(x, y) bind(ex(x), ey(y))``."""
    img = np.asarray(pixels, dtype=float)
    if img.ndim != 2:
        raise SizeMismatch("pixels must be a 2-D array")
    height, width = img.shape
    _check_encoders(encX, encY, width, height)
    ex = encX.encode_many(np.arange(width))
    ey = encY.encode_many(np.arange(height))
    data = np.sum((img @ ex) * ey, axis=0) / encX.n
    return ImageScene(HDVector(data, HADAMARD), width, height, encX, encY)


def image_decode(scene: ImageScene) -> np.ndarray:
    """Readout ``Re(n * inner(v, bind(ex(x), ey(y))))`` at every pixel."""
    ex = scene.encX.encode_many(np.arange(scene.width))
    ey = scene.encY.encode_many(np.arange(scene.height))
    return ((np.conj(ey) * scene.vec.data) @ np.conj(ex).T).real


def image_translate(scene: ImageScene, dx: float, dy: float) -> ImageScene:
    """Move the scene by ``(dx, dy)``; integer moves wrap around the torus."""
    shift = bind(scene.encX.encode(dx), scene.encY.encode(dy))
    return ImageScene(bind(scene.vec, shift), scene.width, scene.height, scene.encX, scene.encY)


def compose(a: ImageScene, b: ImageScene) -> ImageScene:
    if a.encX is not b.encX or a.encY is not b.encY:
        if not (np.array_equal(a.encX.phases, b.encX.phases) and np.array_equal(a.encY.phases, b.encY.phases)):
            raise VFAError("scenes use different encoders")
    return ImageScene(a.vec + b.vec, a.width, a.height, a.encX, a.encY)


def circular_kernel_readout(pixels, encX: FpeEncoder, encY: FpeEncoder) -> np.ndarray:
    """Oracle for :func:`image_decode`: the image convolved with the sampled periodic kernel.

    ``out[y, x] = sum_{x', y'} I(x', y') K(x' - x, y' - y)`` computed over
    the displacement table instead of through the scene vector.
    """
    img = np.asarray(pixels, dtype=float)
    h, w = img.shape
    kx = np.exp(1j * np.outer(np.arange(w), encX.phases))
    ky = np.exp(1j * np.outer(np.arange(h), encY.phases))
    table = (ky @ kx.T).real / encX.n  # table[b, a] = K(a, b), periodic
    # circular cross-correlation of the image with the kernel table
    return np.fft.ifft2(np.fft.fft2(img) * np.conj(np.fft.fft2(table))).real


# 5x7 bitmap font ---------------------------------------------------------------

_FONT = {
    "A": "01110 10001 10001 11111 10001 10001 10001",
    "B": "11110 10001 10001 11110 10001 10001 11110",
    "C": "01110 10001 10000 10000 10000 10001 01110",
    "D": "11110 10001 10001 10001 10001 10001 11110",
    "E": "11111 10000 10000 11110 10000 10000 11111",
    "F": "11111 10000 10000 11110 10000 10000 10000",
    "G": "01110 10001 10000 10111 10001 10001 01111",
    "H": "10001 10001 10001 11111 10001 10001 10001",
    "I": "01110 00100 00100 00100 00100 00100 01110",
    "J": "00111 00010 00010 00010 00010 10010 01100",
    "K": "10001 10010 10100 11000 10100 10010 10001",
    "L": "10000 10000 10000 10000 10000 10000 11111",
    "M": "10001 11011 10101 10101 10001 10001 10001",
    "N": "10001 10001 11001 10101 10011 10001 10001",
    "O": "01110 10001 10001 10001 10001 10001 01110",
    "P": "11110 10001 10001 11110 10000 10000 10000",
    "Q": "01110 10001 10001 10001 10101 10010 01101",
    "R": "11110 10001 10001 11110 10100 10010 10001",
    "S": "01111 10000 10000 01110 00001 00001 11110",
    "T": "11111 00100 00100 00100 00100 00100 00100",
    "U": "10001 10001 10001 10001 10001 10001 01110",
    "V": "10001 10001 10001 10001 10001 01010 00100",
    "W": "10001 10001 10001 10101 10101 10101 01010",
    "X": "10001 10001 01010 00100 01010 10001 10001",
    "Y": "10001 10001 10001 01010 00100 00100 00100",
    "Z": "11111 00001 00010 00100 01000 10000 11111",
    "0": "01110 10001 10011 10101 11001 10001 01110",
    "1": "00100 01100 00100 00100 00100 00100 01110",
    "2": "01110 10001 00001 00010 00100 01000 11111",
    "3": "11111 00010 00100 00010 00001 10001 01110",
    "4": "00010 00110 01010 10010 11111 00010 00010",
    "5": "11111 10000 11110 00001 00001 10001 01110",
    "6": "00110 01000 10000 11110 10001 10001 01110",
    "7": "11111 00001 00010 00100 01000 01000 01000",
    "8": "01110 10001 10001 01110 10001 10001 01110",
    "9": "01110 10001 10001 01111 00001 00010 01100",
}


def glyph(ch: str) -> np.ndarray:
    """The 7x5 bitmap of ``ch`` as a float array."""
    try:
        rows = _FONT[ch.upper()].split()
    except KeyError:
        raise VFAError(f"no glyph for {ch!r}") from None
    return np.array([[float(b) for b in r] for r in rows])


def render_glyph(ch: str, width: int = WIDTH, height: int = HEIGHT, scale: int = 8, x0=None, y0=None) -> np.ndarray:
    """Draw ``ch`` scaled by ``scale`` into a blank canvas (centred by default)."""
    g = np.kron(glyph(ch), np.ones((scale, scale)))
    gh, gw = g.shape
    if x0 is None:
        x0 = (width - gw) // 2
    if y0 is None:
        y0 = (height - gh) // 2
    canvas = np.zeros((height, width))
    ys = (np.arange(gh) + y0) % height
    xs = (np.arange(gw) + x0) % width
    canvas[np.ix_(ys, xs)] = np.maximum(canvas[np.ix_(ys, xs)], g)
    return canvas


def correlation(a, b) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    return float(np.corrcoef(a, b)[0, 1])
