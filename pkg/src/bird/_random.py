"""Deterministic, splittable random streams."""

import numpy as np


def derive_stream(master_seed, stream_id=0):
    """Return an independent generator for ``(master_seed, stream_id)``.

    ``stream_id`` may be an int or a tuple of ints (e.g. ``(run, channel)``).
    The stream is a counter-based Philox generator keyed by hashing the master
    seed with the stream id, so the draws of run ``j`` never depend on how many
    other runs exist or on the order in which they execute.
    """
    if isinstance(stream_id, (tuple, list)):
        key = tuple(int(s) for s in stream_id)
    else:
        key = (int(stream_id),)
    if any(k < 0 for k in key):
        raise ValueError("stream ids must be non-negative")
    seq = np.random.SeedSequence(entropy=int(master_seed) & (2**64 - 1), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))
