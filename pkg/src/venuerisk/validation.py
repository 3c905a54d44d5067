"""Input validation helpers used at the public API boundaries.

These follow the scikit-learn convention of coercing array-likes to
well-formed numpy arrays and raising early with a named argument in the
message.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError


def check_matrix(x, name: str = "x", *, nonneg: bool = True) -> np.ndarray:
    """Coerce to a 2-D float64 array; require finite (and by default >= 0) entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    if nonneg and arr.size and arr.min() < 0:
        raise InputError(f"{name} contains negative entries")
    return arr


def check_count_matrix(x, name: str = "x") -> np.ndarray:
    """Coerce to a 2-D non-negative integer matrix."""
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        flt = np.asarray(arr, dtype=np.float64)
        if not np.all(np.isfinite(flt)) or np.any(flt != np.round(flt)):
            raise InputError(f"{name} must hold integer counts")
        arr = flt.astype(np.int64)
    else:
        arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise InputError(f"{name} contains negative counts")
    return arr


def check_binary(y, name: str = "y", *, length: int | None = None) -> np.ndarray:
    """Coerce to a 1-D int8 vector of 0/1 values."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise InputError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise InputError(f"{name} must have length {length}, got {arr.shape[0]}")
    vals = np.unique(arr)
    if not np.isin(vals, (0, 1)).all():
        raise InputError(f"{name} must contain only 0/1 values")
    return arr.astype(np.int8)


def check_probability(p, name: str = "p") -> float:
    """Require a scalar in [0, 1]."""
    val = float(p)
    if not np.isfinite(val) or not 0.0 <= val <= 1.0:
        raise InputError(f"{name} must lie in [0, 1], got {p!r}")
    return val


def check_seed(seed, name: str = "seed") -> int:
    """Require an unsigned 64-bit seed."""
    val = int(seed)
    if not 0 <= val < 2**64:
        raise InputError(f"{name} must be an unsigned 64-bit integer, got {seed!r}")
    return val


def as_generator(rng) -> np.random.Generator:
    """Resolve an RNG argument to a numpy Generator.

    Accepts an RngStream (its live generator is returned, so sequential
    operations consume one stream), a numpy Generator, a SeedSequence, or
    an integer seed.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    gen = getattr(rng, "generator", None)
    if isinstance(gen, np.random.Generator):
        return gen
    if isinstance(rng, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(rng))
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(check_seed(rng))
    raise InputError(f"cannot interpret {type(rng).__name__} as a random generator")
