"""Deterministic seed derivation.

Every stochastic operation draws from its own PCG64 stream, derived from a
master seed plus a tuple of purpose tags.  Results are therefore reproducible
bit for bit and independent of evaluation order: adding or removing one
consumer never shifts the randomness seen by another.
"""

import hashlib

import numpy as np


def derive_seed(master_seed: int, *tags) -> int:
    """Derive a 64-bit child seed from ``master_seed`` and purpose tags."""
    text = ":".join([str(int(master_seed))] + [str(t) for t in tags])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def rng_for(master_seed: int, *tags) -> np.random.Generator:
    """Return a fresh generator seeded from ``(master_seed, *tags)``."""
    return np.random.default_rng(derive_seed(master_seed, *tags))
