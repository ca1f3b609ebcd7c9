"""Counter-based random streams, one per block of paths."""

import numpy as np


def block_generator(seed: int, block_index: int) -> np.random.Generator:
    """Philox generator keyed by (seed, block_index).

    The stream of a block depends on nothing else, so splitting blocks across
    any number of workers draws exactly the same numbers.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=(block_index,))
    return np.random.Generator(np.random.Philox(sequence))


def block_ranges(n_paths: int, block_size: int) -> list[tuple[int, int]]:
    """Half-open path ranges [start, stop) of consecutive blocks."""
    return [
        (start, min(start + block_size, n_paths))
        for start in range(0, n_paths, block_size)
    ]
