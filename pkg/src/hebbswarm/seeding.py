"""Counter-based random streams derived from one master seed.

A stream is identified by the master seed plus an integer key path, e.g.
``("trial", generation, individual, repeat)``; each component is mapped to
an integer and appended to the ``SeedSequence`` spawn key, and the result
drives a Philox generator. Streams therefore depend only on their key,
never on evaluation order or the number of workers.
"""
import zlib

import numpy as np

_TAGS = {}


def _tag(name):
    if name not in _TAGS:
        _TAGS[name] = zlib.crc32(name.encode())
    return _TAGS[name]


def seed_sequence(master_seed, *key):
    spawn_key = tuple(_tag(k) if isinstance(k, str) else int(k) for k in key)
    return np.random.SeedSequence(int(master_seed), spawn_key=spawn_key)


def stream(master_seed, *key):
    return np.random.Generator(np.random.Philox(seed_sequence(master_seed, *key)))


def trial_streams(master_seed, *key):
    """Independent generators for spawning, network init and sensor noise."""
    return {name: stream(master_seed, *key, name) for name in ("spawn", "init", "noise")}
