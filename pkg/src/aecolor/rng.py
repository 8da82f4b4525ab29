"""Deterministic keyed random streams.

Every random decision in the package is a pure function of a root seed and the
position it belongs to (iteration, edge id, vertex, color, round, ...), so
results are bit-reproducible regardless of traversal order and independent of
any parallel split. The generator is a splitmix64-style finalizer folded over
the key tuple.

Three interchangeable forms are provided and must stay bit-identical:
`derive` (python ints, for orchestration code), `derive2/derive3` as uint64
scalars (callable from jitted kernels), and the `*_arr` vectorized forms.
"""

from __future__ import annotations

import numpy as np

from ._accel import kernel

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

U64_GOLDEN = np.uint64(_GOLDEN)
_U1 = np.uint64(_M1)
_U2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)

_INV53 = float(2.0**-53)

# stream tags (fold position of the key tuple disambiguates further)
TAG_ASSIGN = 0xA1
TAG_EQCOIN = 0xA2
TAG_VQCOIN = 0xA3
TAG_RESERVE = 0xB1
TAG_GEN = 0xC1
TAG_FINISH = 0xD1
TAG_REPAIR = 0xE1
TAG_EXPERIMENT = 0xF1


def mix64(z: int) -> int:
    """Finalize one 64-bit word (python-int form)."""
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def derive(seed: int, *keys: int) -> int:
    """Fold `keys` into `seed`; the result addresses an independent stream."""
    h = mix64(seed & _MASK)
    for k in keys:
        h = mix64(h ^ (k & _MASK))
    return h


def u01(h: int) -> float:
    """Map a 64-bit word to a uniform float in [0, 1)."""
    return (h >> 11) * _INV53


@kernel
def mix64_u64(z):
    z = z + U64_GOLDEN
    z = (z ^ (z >> _S30)) * _U1
    z = (z ^ (z >> _S27)) * _U2
    return z ^ (z >> _S31)


@kernel
def derive2_u64(seed, a, b):
    h = mix64_u64(seed)
    h = mix64_u64(h ^ a)
    h = mix64_u64(h ^ b)
    return h


@kernel
def derive3_u64(seed, a, b, c):
    h = mix64_u64(seed)
    h = mix64_u64(h ^ a)
    h = mix64_u64(h ^ b)
    h = mix64_u64(h ^ c)
    return h


@kernel
def derive4_u64(seed, a, b, c, d):
    h = mix64_u64(seed)
    h = mix64_u64(h ^ a)
    h = mix64_u64(h ^ b)
    h = mix64_u64(h ^ c)
    h = mix64_u64(h ^ d)
    return h


@kernel
def u01_u64(h):
    return (h >> _S11) * 2.0**-53


def mix64_arr(z: np.ndarray) -> np.ndarray:
    z = z + U64_GOLDEN
    z = (z ^ (z >> _S30)) * _U1
    z = (z ^ (z >> _S27)) * _U2
    return z ^ (z >> _S31)


def derive_arr(seed: int, *keys) -> np.ndarray:
    """Vectorized `derive`; `keys` are ints or broadcastable uint64 arrays."""
    h = mix64_arr(np.full(1, np.uint64(seed & _MASK)))  # 1-element: 0-d arrays warn on wrap
    for k in keys:
        k = np.asarray(k, dtype=np.uint64)
        h = mix64_arr(np.broadcast_to(h, np.broadcast_shapes(h.shape, k.shape)) ^ k)
    return h


def u01_arr(h: np.ndarray) -> np.ndarray:
    return (h >> _S11) * _INV53
