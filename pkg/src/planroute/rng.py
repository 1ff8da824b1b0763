"""Deterministic, splittable randomness.

Every random quantity in this package flows from a single integer seed.
Sub-streams are derived by mixing the seed with integer or string tokens
through a splitmix64 chain, so the value drawn for (seed, token) never
depends on iteration order or on how many other draws happened before it.
"""
from __future__ import annotations

import hashlib

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = 0xFFFFFFFFFFFFFFFF


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z = (z + _GOLDEN) & _MASK
    z ^= z >> 30
    z = (z * _MIX1) & _MASK
    z ^= z >> 27
    z = (z * _MIX2) & _MASK
    z ^= z >> 31
    return z


def _token_u64(token) -> int:
    if isinstance(token, (int, np.integer)):
        return int(token) & _MASK
    if isinstance(token, str):
        return int.from_bytes(hashlib.blake2b(token.encode(), digest_size=8).digest(), "little")
    raise TypeError(f"unsupported seed token {token!r}")


def derive(seed: int, *tokens) -> int:
    """Derive a child seed for a named sub-stream."""
    h = mix64(int(seed) & _MASK)
    for t in tokens:
        h = mix64(h ^ _token_u64(t))
    return h


def uniforms_at(seed: int, ids: np.ndarray) -> np.ndarray:
    """Counter-based uniforms in [0,1): value i depends only on (seed, ids[i]).

    Vectorized splitmix64 over the id array; reordering ids permutes the
    output identically, which keeps per-id draws independent of iteration
    order.
    """
    base = np.uint64(mix64(int(seed) & _MASK))
    z = base + np.asarray(ids, dtype=np.uint64) * np.uint64(_GOLDEN)
    with np.errstate(over="ignore"):
        z = z + np.uint64(_GOLDEN)
        z ^= z >> np.uint64(30)
        z *= np.uint64(_MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
    # top 53 bits -> float64 in [0, 1)
    return (z >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def uniform_at(seed: int, ident: int) -> float:
    return float(uniforms_at(seed, np.array([ident], dtype=np.uint64))[0])


def generator(seed: int, *tokens) -> np.random.Generator:
    """numpy Generator on a Philox counter stream keyed by (seed, tokens)."""
    key = derive(seed, *tokens)
    return np.random.Generator(np.random.Philox(key=key))
