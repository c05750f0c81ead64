"""Seed derivation for reproducible Monte-Carlo streams.

Every stochastic draw in the package goes through a numpy ``Generator`` on
the PCG64 bit generator.  Sub-seeds are derived from a master seed and a
tuple of labels so that each (family, snr, profile, index) cell gets its own
independent stream regardless of execution order.
"""
from __future__ import annotations

import hashlib

import numpy as np

BIT_GENERATOR = "PCG64"


def derive_seed(master_seed: int, *labels) -> int:
    """Return a 63-bit seed for the stream named by ``labels``."""
    digest = hashlib.sha256("\x1f".join(repr(x) for x in labels).encode()).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    ss = np.random.SeedSequence(int(master_seed), spawn_key=words)
    lo, hi = ss.generate_state(2, np.uint32)
    return (int(hi) << 32 | int(lo)) & ((1 << 63) - 1)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples (two real normals each)."""
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])
