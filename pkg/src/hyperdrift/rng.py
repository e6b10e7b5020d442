"""Counter-based random substreams.

Every Monte-Carlo sample owns a Philox stream keyed by ``(seed, index)``, so
results do not depend on how samples are split across workers.
"""
import numpy as np

_MASK = (1 << 64) - 1
STREAM_STRIDE = 1 << 40


def check_seed(seed):
    seed = int(seed)
    if seed < 0 or seed > _MASK:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    return seed


def substream(seed, index):
    """Generator for sample ``index`` under ``seed``."""
    key = np.array([check_seed(seed), int(index) & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniforms(seed, indices, length):
    """Array of shape ``(len(indices), length)``; row ``r`` comes from substream ``indices[r]``."""
    out = np.empty((len(indices), length), dtype=np.float64)
    for r, idx in enumerate(indices):
        out[r] = substream(seed, idx).random(length)
    return out
