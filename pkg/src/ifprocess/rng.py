"""Seeding and exact random integers.

Every trial owns a numpy ``Generator`` (PCG64) whose stream is derived from
``(master_seed, trial_index)`` through :class:`numpy.random.SeedSequence`
with ``spawn_key=(trial_index,)``; this is the same stream
``SeedSequence(master_seed).spawn(...)`` hands to child ``trial_index``, so a
trial can be rerun on its own and parallel runs reproduce serial ones.
"""
from __future__ import annotations

import numpy as np

DEFAULT_SEED = 20240521
_MASK64 = (1 << 64) - 1


def trial_rng(master_seed, trial_index):
    ss = np.random.SeedSequence(entropy=int(master_seed) & _MASK64, spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.PCG64(ss))


def make_rng(seed=None):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def randbelow(rng, m):
    """Uniform integer in ``[0, m)`` for arbitrarily large ``m`` (exact)."""
    if m <= 0:
        raise ValueError("upper bound must be positive")
    if m <= 1 << 62:
        return int(rng.integers(m))
    nbits = m.bit_length()
    nbytes = (nbits + 7) // 8
    shift = 8 * nbytes - nbits
    while True:
        x = int.from_bytes(rng.bytes(nbytes), "little") >> shift
        if x < m:
            return x
