"""Vector function architectures built on fractional power encodings."""
from .core import (
    CIRCULAR,
    HADAMARD,
    Family,
    HDVector,
    PhaseVector,
    as_family,
    bind,
    block,
    bundle,
    identity,
    inner,
    inverse,
    is_unitary,
    l1_norm,
    make_rng,
    random_symbol,
    stream_seed,
    trial_seed,
    unbind,
    zeros,
)
from .errors import VFAError

__version__ = "0.1.0"
