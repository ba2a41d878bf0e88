"""Keyed random streams.

Every random object in the package is drawn from a stream or a hash keyed by
``(master seed, entity key)``, so results never depend on evaluation order or
on how work is split between processes.
"""
from __future__ import annotations

import zlib

import numba
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO53 = 1.0 / 9007199254740992.0


def _label_int(label) -> int:
    if isinstance(label, str):
        return zlib.crc32(label.encode())
    value = int(label)
    if value < 0:
        raise ValueError("stream labels must be nonnegative")
    return value


def stream(seed: int, *labels) -> np.random.Generator:
    """Independent generator for the entity named by ``labels``."""
    entropy = [_label_int(seed)] + [_label_int(x) for x in labels]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *labels) -> int:
    """A 63-bit integer seed derived from ``(seed, labels)``."""
    ss = np.random.SeedSequence([_label_int(seed)] + [_label_int(x) for x in labels])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def keyed_uniform(seed: int, a, b=None, salt: int = 0) -> np.ndarray:
    """Uniforms in (0,1) keyed by ``(seed, salt, a[, b])``; vectorized over a, b.

    Pass ``b`` for unordered pairs: the key is symmetrized as (min, max).
    """
    a = np.asarray(a, dtype=np.int64)
    with np.errstate(over="ignore"):
        h = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)
        h = _mix(h ^ (np.uint64(salt) * _GOLDEN + _M2))
        if b is None:
            h = _mix(h ^ (a.astype(np.uint64) + _GOLDEN))
        else:
            b = np.asarray(b, dtype=np.int64)
            lo = np.minimum(a, b).astype(np.uint64)
            hi = np.maximum(a, b).astype(np.uint64)
            h = _mix(h ^ (lo + _GOLDEN))
            h = _mix(h ^ (hi * _M1 + _GOLDEN))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO53


@numba.njit(cache=True)
def _mix_nb(z):
    z = (z ^ (z >> numba.uint64(30))) * numba.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> numba.uint64(27))) * numba.uint64(0x94D049BB133111EB)
    return z ^ (z >> numba.uint64(31))


@numba.njit(cache=True)
def pair_uniform_nb(seed, salt, a, b):
    """Scalar twin of :func:`keyed_uniform` for use inside compiled kernels."""
    g = numba.uint64(0x9E3779B97F4A7C15)
    lo = min(a, b)
    hi = max(a, b)
    h = _mix_nb(numba.uint64(seed) + g)
    h = _mix_nb(h ^ (numba.uint64(salt) * g + numba.uint64(0x94D049BB133111EB)))
    h = _mix_nb(h ^ (numba.uint64(lo) + g))
    h = _mix_nb(h ^ (numba.uint64(hi) * numba.uint64(0xBF58476D1CE4E5B9) + g))
    return (float(h >> numba.uint64(11)) + 0.5) * 1.1102230246251565e-16


SALT_EDGE = 1
SALT_LENGTH = 2
SALT_RETAIN = 3
