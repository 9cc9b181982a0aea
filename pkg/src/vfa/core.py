"""Complex hypervectors and the three binding algebras.

Every binding family is diagonalised by a fixed transform:

* ``hadamard``  -- the identity (binding is the component-wise product),
* ``circular``  -- the DFT of the whole vector,
* ``block(k)``  -- the DFT of each of the ``k`` contiguous blocks.

In that "spectral" domain binding is a component-wise product, unitary
vectors are exactly the phasor vectors, and the inner product is the mean of
``x_hat * conj(y_hat)``.  The helpers on :class:`Family` move data between the
signal and spectral domains; everything else in this module is written on
top of them.

Inner products are normalised so that any family-unitary vector has
self-similarity exactly 1.  For the Hadamard family this is ``vdot / n``;
for circular vectors (unit Euclidean norm in the signal domain) it is the
plain ``vdot``; for block vectors it is ``vdot / k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, FamilyMismatch, NotUnitary, VFAError

TWO_PI = 2.0 * np.pi

_ALIASES = {
    "hadamard": "hadamard",
    "hp": "hadamard",
    "circular": "circular",
    "cc": "circular",
    "block": "block",
    "lcc": "block",
}


@dataclass(frozen=True)
class Family:
    """Binding family tag.

    ``k`` is the block count and is only meaningful for ``kind == "block"``.
    """

    kind: str
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("hadamard", "circular", "block"):
            raise VFAError(f"unknown binding family {self.kind!r}")
        if self.kind != "block" and self.k != 1:
            raise VFAError(f"block count given for family {self.kind}")
        if self.k < 1:
            raise VFAError("block count must be >= 1")

    @classmethod
    def parse(cls, text: str) -> "Family":
        """Parse ``hadamard``, ``circular``/``cc`` or ``block:K``/``lcc:K``."""
        name, _, arg = str(text).strip().lower().partition(":")
        if name.endswith(")") and "(" in name:  # block(32)
            name, _, arg = name[:-1].partition("(")
        kind = _ALIASES.get(name)
        if kind is None:
            raise VFAError(f"unknown binding family {text!r}")
        if kind == "block":
            if not arg:
                raise VFAError("block family needs a block count, e.g. block:32")
            return cls("block", int(arg))
        if arg:
            raise VFAError(f"family {kind} takes no argument")
        return cls(kind)

    def __str__(self):
        return f"block({self.k})" if self.kind == "block" else self.kind

    def check(self, n: int) -> None:
        if n < 1:
            raise DimensionMismatch("vector dimension must be >= 1")
        if self.kind == "block" and n % self.k:
            raise DimensionMismatch(f"block count {self.k} does not divide n={n}")

    def norm_scale(self, n: int) -> int:
        """Squared Euclidean norm of a unitary vector of this family."""
        return {"hadamard": n, "circular": 1, "block": self.k}[self.kind]

    def to_spectrum(self, data: np.ndarray) -> np.ndarray:
        """Map signal-domain data (last axis = components) to the spectral domain."""
        data = np.asarray(data, dtype=complex)
        if self.kind == "hadamard":
            return data
        if self.kind == "circular":
            return np.fft.fft(data, axis=-1)
        shape = data.shape
        blocks = data.reshape(shape[:-1] + (self.k, shape[-1] // self.k))
        return np.fft.fft(blocks, axis=-1).reshape(shape)

    def from_spectrum(self, spec: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`to_spectrum`."""
        spec = np.asarray(spec, dtype=complex)
        if self.kind == "hadamard":
            return spec
        if self.kind == "circular":
            return np.fft.ifft(spec, axis=-1)
        shape = spec.shape
        blocks = spec.reshape(shape[:-1] + (self.k, shape[-1] // self.k))
        return np.fft.ifft(blocks, axis=-1).reshape(shape)


HADAMARD = Family("hadamard")
CIRCULAR = Family("circular")


def block(k: int) -> Family:
    return Family("block", int(k))


def as_family(family) -> Family:
    if isinstance(family, Family):
        return family
    return Family.parse(family)


def wrap_phase(phases) -> np.ndarray:
    """Wrap angles into ``[-pi, pi)``."""
    out = np.mod(np.asarray(phases, dtype=float) + np.pi, TWO_PI) - np.pi
    out[out >= np.pi] -= TWO_PI
    return out


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox-4x64) keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def trial_seed(base_seed: int, trial: int) -> int:
    """Seed of trial ``t`` of an experiment: ``base_seed XOR t``."""
    return (int(base_seed) ^ int(trial)) & 0xFFFFFFFFFFFFFFFF


def stream_seed(base_seed: int, *keys: int) -> int:
    """Seed of an independent sub-stream labelled by ``keys``.

    Unlike :func:`trial_seed`, nearby base seeds give unrelated streams.
    """
    entropy = [int(base_seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) & 0xFFFFFFFFFFFFFFFF for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class PhaseVector:
    """Array of phase angles, normalised into ``[-pi, pi)`` on construction."""

    phases: np.ndarray

    def __post_init__(self):
        p = wrap_phase(np.ravel(self.phases))
        p.setflags(write=False)
        object.__setattr__(self, "phases", p)

    def __len__(self):
        return len(self.phases)


@dataclass(frozen=True, eq=False)
class HDVector:
    """Immutable complex hypervector tagged with its binding family."""

    data: np.ndarray
    family: Family = field(default=HADAMARD)

    def __post_init__(self):
        data = np.array(self.data, dtype=complex).ravel()
        family = as_family(self.family)
        family.check(data.size)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "family", family)

    @classmethod
    def from_spectrum(cls, spec, family) -> "HDVector":
        family = as_family(family)
        return cls(family.from_spectrum(spec), family)

    @property
    def n(self) -> int:
        return self.data.size

    def __len__(self):
        return self.data.size

    def spectrum(self) -> np.ndarray:
        return self.family.to_spectrum(self.data)

    def __add__(self, other):
        return bundle(self, other)

    def __sub__(self, other):
        _check_pair(self, other)
        return HDVector(self.data - other.data, self.family)

    def __neg__(self):
        return HDVector(-self.data, self.family)

    def __mul__(self, scalar):
        if isinstance(scalar, HDVector):
            return NotImplemented
        return HDVector(self.data * scalar, self.family)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return HDVector(self.data / scalar, self.family)

    def allclose(self, other, atol=1e-10) -> bool:
        return (
            self.family == other.family
            and self.n == other.n
            and bool(np.max(np.abs(self.data - other.data), initial=0.0) <= atol)
        )

    def __repr__(self):
        return f"HDVector(n={self.n}, family={self.family})"


def _check_pair(x: HDVector, y: HDVector) -> None:
    if x.n != y.n:
        raise DimensionMismatch(f"dimension mismatch: {x.n} vs {y.n}")
    if x.family != y.family:
        raise FamilyMismatch(f"family mismatch: {x.family} vs {y.family}")


def identity(family, n: int) -> HDVector:
    """Binding identity: all ones (Hadamard) or a delta at the start of each block."""
    family = as_family(family)
    return HDVector.from_spectrum(np.ones(n, dtype=complex), family)


def zeros(family, n: int) -> HDVector:
    return HDVector(np.zeros(n, dtype=complex), family)


def bundle(x: HDVector, y: HDVector) -> HDVector:
    """Component-wise sum.  Never normalises."""
    _check_pair(x, y)
    return HDVector(x.data + y.data, x.family)


def bind(x: HDVector, y: HDVector) -> HDVector:
    _check_pair(x, y)
    fam = x.family
    if fam.kind == "hadamard":
        return HDVector(x.data * y.data, fam)
    return HDVector.from_spectrum(x.spectrum() * y.spectrum(), fam)


def is_unitary(x: HDVector, tol: float = 1e-8) -> bool:
    """True if every spectral magnitude of ``x`` is within ``tol`` of one."""
    if tol < 0:
        raise VFAError("tol must be >= 0")
    return bool(np.all(np.abs(np.abs(x.spectrum()) - 1.0) <= tol))


def inverse(x: HDVector, exact: bool = True, tol: float = 1e-8) -> HDVector:
    """Binding inverse: conjugate in the spectral domain.

    For a non-unitary vector the conjugate is only the approximate
    (involution) inverse, so ``exact=True`` refuses it.
    """
    if exact and not is_unitary(x, tol):
        raise NotUnitary("exact inverse requested for a non-unitary vector")
    if x.family.kind == "hadamard":
        return HDVector(np.conj(x.data), x.family)
    return HDVector.from_spectrum(np.conj(x.spectrum()), x.family)


def unbind(x: HDVector, z: HDVector, exact: bool = True) -> HDVector:
    """Recover ``y`` from ``z = bind(x, y)``."""
    return bind(inverse(x, exact=exact), z)


def inner(x: HDVector, y: HDVector) -> complex:
    """Normalised inner product ``x^T conj(y)``; unitary self-similarity is 1."""
    if x.n != y.n:
        raise DimensionMismatch(f"dimension mismatch: {x.n} vs {y.n}")
    return complex(np.vdot(y.data, x.data) / x.family.norm_scale(x.n))


def inner_rows(rows: np.ndarray, y: np.ndarray, family: Family) -> np.ndarray:
    """Inner products of each row of ``rows`` with ``y`` (raw arrays)."""
    rows = np.asarray(rows)
    return rows @ np.conj(y) / family.norm_scale(rows.shape[-1])


def l1_norm(x: HDVector) -> float:
    return float(np.sum(np.abs(x.data)))


def random_symbol(n: int, family, seed: int) -> HDVector:
    """Random family-unitary vector with uniformly distributed phases.

    Hadamard vectors get an independent phase per component, circular vectors
    an independent phase per Fourier bin, and block vectors one hot entry of
    random position and phase per block.
    """
    family = as_family(family)
    family.check(n)
    rng = make_rng(seed)
    if family.kind == "block":
        size = n // family.k
        data = np.zeros((family.k, size), dtype=complex)
        hot = rng.integers(0, size, family.k)
        theta = rng.uniform(-np.pi, np.pi, family.k)
        data[np.arange(family.k), hot] = np.exp(1j * theta)
        return HDVector(data.ravel(), family)
    phases = rng.uniform(-np.pi, np.pi, n)
    return HDVector.from_spectrum(np.exp(1j * phases), family)
