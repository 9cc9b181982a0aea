"""Function vectors: the kernel-space algebra carried by bundling and binding.

A function ``f(s) = sum_k alpha_k K(r_k - s)`` is stored as the vector
``(1/n) sum_k alpha_k z(r_k)``.  With that scaling

* ``eval(f, s) = Re(n * inner(y_f, z(s)))``  reads out ``f(s)``,
* ``add`` is bundling,
* ``shift(f, r)`` binds with ``z(r)``, moving every support ``r_k`` to ``r_k + r``,
* ``convolve(f, g) = n * bind(y_f, y_g)`` has supports ``r_k + r_l`` and
  coefficients ``alpha_k beta_l``,
* ``f_inner(f, g) = Re(n**2 * inner(y_f, y_g))`` estimates
  ``sum_{k,l} alpha_k beta_l K(r_k - r_l)``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .core import Family, HDVector, bind, inner
from .errors import ArityMismatch, EmptyFunction, EncoderMismatch, FormatError, LengthMismatch
from .fpe import FpeEncoder
from .shaping import MultiEncoder

Encoder = Union[FpeEncoder, MultiEncoder]

MAX_TRACKED_TERMS = 4096
MAGIC = b"VFAF"
FORMAT_VERSION = 1
_KIND_CODES = {"hadamard": 0, "circular": 1, "block": 2}
_HEADER = struct.Struct("<4sHBIQIQ")


def arity(enc: Encoder) -> int:
    return enc.m if isinstance(enc, MultiEncoder) else 1


def _as_points(enc: Encoder, points) -> np.ndarray:
    m = arity(enc)
    p = np.asarray(points, dtype=float)
    if m == 1:
        if p.ndim == 2 and p.shape[1] == 1:
            p = p[:, 0]
        if p.ndim > 1:
            raise ArityMismatch("one-dimensional encoder given multi-dimensional points")
        return np.atleast_1d(p)
    p = np.atleast_2d(p)
    if p.shape[-1] != m:
        raise ArityMismatch(f"expected {m}-dimensional points, got {p.shape[-1]}")
    return p


def encode_rows(enc: Encoder, points) -> np.ndarray:
    """Signal-domain encodings of ``points`` as rows."""
    return enc.encode_many(_as_points(enc, points))


def same_encoder(a: Encoder, b: Encoder) -> bool:
    if a is b:
        return True
    if type(a) is not type(b) or a.family != b.family:
        return False
    if isinstance(a, FpeEncoder):
        return a.n == b.n and np.array_equal(a.phases, b.phases)
    return a.mode == b.mode and np.array_equal(a.freqs, b.freqs)


@dataclass(frozen=True, eq=False)
class FunctionVector:
    """Vector representation of a function in the kernel space of ``encoder``.

    ``terms`` optionally records the support points and coefficients the
    vector was built from; the vector itself is always authoritative.
    """

    vec: HDVector
    encoder: Encoder
    terms: Optional[tuple] = None

    @property
    def n(self) -> int:
        return self.vec.n

    @property
    def family(self) -> Family:
        return self.vec.family

    def __add__(self, other):
        return add(self, other)

    def __call__(self, s):
        return eval(self, s)


def from_samples(enc: Encoder, points, coeffs) -> FunctionVector:
    """Build ``(1/n) sum_k alpha_k z(r_k)`` from support points and coefficients."""
    pts = _as_points(enc, points)
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if pts.shape[0] != c.size:
        raise LengthMismatch(f"{pts.shape[0]} points but {c.size} coefficients")
    if c.size == 0:
        raise EmptyFunction("a function needs at least one term")
    rows = encode_rows(enc, pts)
    n = rows.shape[1]
    vec = HDVector(c @ rows / n, enc.family)
    return FunctionVector(vec, enc, (_frozen(pts), _frozen(c)))


def zero_function(enc: Encoder) -> FunctionVector:
    n = enc.n
    return FunctionVector(HDVector(np.zeros(n, dtype=complex), enc.family), enc, None)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def eval(f: FunctionVector, s) -> float:
    """Readout ``Re(n * inner(y_f, z(s)))`` at a single point."""
    pts = _as_points(f.encoder, s)
    if pts.shape[0] != 1:
        raise ArityMismatch("eval takes a single point; use eval_many")
    return float(eval_many(f, pts)[0])


def eval_many(f: FunctionVector, points) -> np.ndarray:
    """Readout at many points at once."""
    rows = encode_rows(f.encoder, points)
    scale = f.n / f.family.norm_scale(f.n)
    return (rows.conj() @ f.vec.data * scale).real


def _check_same(f: FunctionVector, g: FunctionVector) -> None:
    if not same_encoder(f.encoder, g.encoder):
        raise EncoderMismatch("function vectors come from different encoders")


def add(f: FunctionVector, g: FunctionVector) -> FunctionVector:
    _check_same(f, g)
    terms = None
    if f.terms is not None and g.terms is not None:
        terms = (
            _frozen(np.concatenate([f.terms[0], g.terms[0]])),
            _frozen(np.concatenate([f.terms[1], g.terms[1]])),
        )
    return FunctionVector(f.vec + g.vec, f.encoder, terms)


def scale(f: FunctionVector, a: float) -> FunctionVector:
    terms = None if f.terms is None else (f.terms[0], _frozen(f.terms[1] * a))
    return FunctionVector(f.vec * a, f.encoder, terms)


def shift(f: FunctionVector, r) -> FunctionVector:
    """Bind with ``z(r)``; every support ``r_k`` moves to ``r_k + r``.

    Hence ``eval(shift(f, r), s) == eval(f, s - r)``.
    """
    rr = _as_points(f.encoder, r)
    if rr.shape[0] != 1:
        raise ArityMismatch("shift takes a single displacement")
    z = HDVector(encode_rows(f.encoder, rr)[0], f.family)
    terms = None if f.terms is None else (_frozen(f.terms[0] + rr[0]), f.terms[1])
    return FunctionVector(bind(f.vec, z), f.encoder, terms)


def convolve(f: FunctionVector, g: FunctionVector) -> FunctionVector:
    """``n * bind(y_f, y_g)``: supports ``r_k + r_l`` with coefficients ``alpha_k beta_l``."""
    _check_same(f, g)
    terms = None
    if f.terms is not None and g.terms is not None:
        nf, ng = f.terms[1].size, g.terms[1].size
        if nf * ng <= MAX_TRACKED_TERMS:
            pf, pg = f.terms[0], g.terms[0]
            pts = (pf[:, None] + pg[None, :]).reshape((nf * ng,) + pf.shape[1:])
            terms = (_frozen(pts), _frozen(np.outer(f.terms[1], g.terms[1]).ravel()))
    return FunctionVector(bind(f.vec, g.vec) * f.n, f.encoder, terms)


def f_inner(f: FunctionVector, g: FunctionVector) -> float:
    """``Re(n**2 * inner(y_f, y_g))``, estimating ``sum alpha_k beta_l K(r_k - r_l)``."""
    _check_same(f, g)
    return float((inner(f.vec, g.vec) * f.n * f.n).real)


def oracle_eval(kernel: Callable, terms, s) -> float:
    """Kernel-space readout ``sum_k alpha_k kernel(r_k - s)``."""
    if terms is None:
        return 0.0
    pts, coeffs = terms
    pts = np.asarray(pts, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size == 0:
        return 0.0
    return float(np.sum(coeffs * kernel(pts - np.asarray(s, dtype=float))))


def oracle_inner(kernel: Callable, f_terms, g_terms) -> float:
    """Kernel-space double sum ``sum_{k,l} alpha_k beta_l kernel(r_k - r_l)``."""
    pf, af = (np.asarray(a, dtype=float) for a in f_terms)
    pg, ag = (np.asarray(a, dtype=float) for a in g_terms)
    diff = pf[:, None] - pg[None, :]
    return float(af @ kernel(diff) @ ag)


def cosine_similarity(x: HDVector, y: HDVector) -> float:
    """Real part of the cosine between two vectors (0 when either is zero)."""
    nx, ny = np.linalg.norm(x.data), np.linalg.norm(y.data)
    if nx == 0 or ny == 0:
        return 0.0
    return float((np.vdot(y.data, x.data) / (nx * ny)).real)


# serialization ---------------------------------------------------------------
#
# Record layout (little-endian), version 1:
#   magic "VFAF" | u16 version | u8 family code | u32 block count k | u64 n
#   | u32 term arity m (0 = no terms) | u64 term count T
#   | n complex values as (real, imag) float64 pairs
#   | T*m float64 support coordinates | T float64 coefficients


def to_bytes(f: FunctionVector) -> bytes:
    fam = f.family
    if f.terms is None:
        m, count, tail = 0, 0, b""
    else:
        pts, coeffs = f.terms
        m = 1 if pts.ndim == 1 else pts.shape[1]
        count = coeffs.size
        tail = np.ascontiguousarray(pts, dtype="<f8").tobytes() + np.ascontiguousarray(coeffs, dtype="<f8").tobytes()
    head = _HEADER.pack(MAGIC, FORMAT_VERSION, _KIND_CODES[fam.kind], fam.k, f.n, m, count)
    body = np.ascontiguousarray(f.vec.data, dtype="<c16").tobytes()
    return head + body + tail


def from_bytes(data: bytes, encoder: Optional[Encoder] = None) -> FunctionVector:
    """Decode a record written by :func:`to_bytes`.

    When ``encoder`` is given its family and dimension must match the record.
    """
    if len(data) < _HEADER.size:
        raise FormatError("record too short")
    magic, version, code, k, n, m, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError("bad magic")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    kinds = {v: key for key, v in _KIND_CODES.items()}
    if code not in kinds:
        raise FormatError(f"unknown family code {code}")
    family = Family(kinds[code], k if kinds[code] == "block" else 1)
    expected = _HEADER.size + 16 * n + 8 * count * (m + 1) * (m > 0)
    if len(data) != expected:
        raise FormatError(f"record length {len(data)} != expected {expected}")
    off = _HEADER.size
    vals = np.frombuffer(data, dtype="<c16", count=n, offset=off).astype(complex)
    off += 16 * n
    terms = None
    if m > 0:
        pts = np.frombuffer(data, dtype="<f8", count=count * m, offset=off).astype(float)
        off += 8 * count * m
        coeffs = np.frombuffer(data, dtype="<f8", count=count, offset=off).astype(float)
        pts = pts if m == 1 else pts.reshape(count, m)
        terms = (_frozen(pts), _frozen(coeffs))
    vec = HDVector(vals, family)
    if encoder is not None and (encoder.family != family or encoder.n != n):
        raise EncoderMismatch("record does not match the supplied encoder")
    return FunctionVector(vec, encoder, terms)


def save(f: FunctionVector, path) -> None:
    with open(path, "wb") as fh:
        fh.write(to_bytes(f))


def load(path, encoder: Optional[Encoder] = None) -> FunctionVector:
    with open(path, "rb") as fh:
        return from_bytes(fh.read(), encoder)
