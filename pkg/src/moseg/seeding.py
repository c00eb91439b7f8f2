"""Counter-based seed derivation.

Every source of randomness in the pipeline draws from a generator derived
from one root seed plus a tuple of string/int tags, so independent stages
never share a stream and results are reproducible regardless of execution
order or worker count.
"""

import zlib

import numpy as np

_MASK = (1 << 32) - 1


def child_seed(root_seed, *tags):
    """Derive a 64-bit seed from ``root_seed`` and a stable tag tuple."""
    parts = [int(root_seed) & _MASK]
    for tag in tags:
        if isinstance(tag, (int, np.integer)):
            parts.append(int(tag) & _MASK)
        else:
            parts.append(zlib.crc32(str(tag).encode("utf-8")))
    seq = np.random.SeedSequence(parts)
    return int(seq.generate_state(1, np.uint64)[0])


def generator(root_seed, *tags):
    """A ``numpy.random.Generator`` seeded via :func:`child_seed`."""
    return np.random.Generator(np.random.PCG64(child_seed(root_seed, *tags)))
