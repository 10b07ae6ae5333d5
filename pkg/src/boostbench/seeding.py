"""Order-independent seed derivation.

Every random draw in the package is keyed by a tuple such as
``(master_seed, "bootstrap", dataset_id, fold, config_index, tree)`` so that
results do not depend on the order in which work units are executed.
"""
import zlib

import numpy as np


def _key_to_int(key):
    if isinstance(key, (bool, np.bool_)):
        return int(key)
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFFFFFFFFFF
    return zlib.crc32(str(key).encode("utf-8"))


def derive_seed(master, *keys) -> int:
    """Return a 63-bit seed derived from ``master`` and a tuple of keys.

    Keys may be ints or strings; strings are hashed with CRC-32 so the mapping
    is stable across interpreter runs (unlike ``hash``).
    """
    entropy = [_key_to_int(master)] + [_key_to_int(k) for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1])) & 0x7FFFFFFFFFFFFFFF


def make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(_key_to_int(seed)))
