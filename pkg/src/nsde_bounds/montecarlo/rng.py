"""
Counter-based random streams.

A stream is identified by (base_seed, counters...). Each identifier maps to an
independent Philox generator through ``SeedSequence`` spawn keys, so results
depend only on the identifiers and never on scheduling or thread count.
"""

from typing import Iterator, Tuple

import numpy as np

from ..validators import validate_seed

# Stream tags keep unrelated consumers of one base seed apart.
STREAM_EULER = 0
STREAM_PI = 1
STREAM_RESTART = 2
STREAM_REPLICATE = 3
STREAM_PILOT = 4
STREAM_DIAGNOSTIC = 5


def derive_generator(seed: int, *counters: int) -> np.random.Generator:
    """Generator for the stream (seed, counters)."""
    sequence = np.random.SeedSequence(entropy=validate_seed(seed), spawn_key=tuple(int(c) for c in counters))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *counters: int) -> int:
    """A 64-bit child seed for the stream (seed, counters), for handing to other consumers."""
    sequence = np.random.SeedSequence(entropy=validate_seed(seed), spawn_key=tuple(int(c) for c in counters))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def blocks(n: int, block_size: int) -> Iterator[Tuple[int, int, int]]:
    """Fixed partition of range(n) into (block_index, start, stop)."""
    for b, start in enumerate(range(0, n, block_size)):
        yield b, start, min(start + block_size, n)
