"""Deterministic random stream derivation.

Monte Carlo runs address their generators by (master seed, fixture label,
replicate index).  The triple is mixed through numpy's SeedSequence, an
avalanche-quality integer mixer, so distinct triples give independent
streams and the assignment does not depend on scheduling or worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_to_int(label) -> int:
    if isinstance(label, str):
        digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big")
    return int(label)


def derive_rng(master_seed: int, *indices) -> np.random.Generator:
    """Generator for the stream addressed by (master_seed, *indices).

    String indices are hashed with a fixed (unsalted) 64-bit digest so the
    mapping is stable across processes and platforms.
    """
    entropy = [int(master_seed)] + [_label_to_int(ix) for ix in indices]
    return np.random.default_rng(np.random.SeedSequence(entropy))
