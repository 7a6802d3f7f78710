"""
Seeded random substreams.

Every random draw in the toolkit descends from one integer seed. Independent
consumers get their own ``numpy.random.Generator`` keyed by a spawn key, so
results never depend on the order in which consumers are created.
"""

from typing import Tuple, Union

import numpy as np

KeyPart = Union[int, str]

_STRING_KEYS = {
    "driver": 1,
    "mis": 2,
    "gen": 3,
    "msva": 4,
    "sim": 5,
}


def _key_int(part: KeyPart) -> int:
    if isinstance(part, str):
        return _STRING_KEYS[part]
    return int(part)


def substream(seed: int, *key: KeyPart) -> np.random.Generator:
    """Generator for the substream named by ``key`` under ``seed``."""
    spawn_key: Tuple[int, ...] = tuple(_key_int(p) for p in key)
    seq = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=spawn_key)
    return np.random.Generator(np.random.PCG64(seq))


def coin(rng: np.random.Generator) -> bool:
    return bool(rng.integers(0, 2))
