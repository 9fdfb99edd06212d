"""Numpy implementation of the sliced Toeplitz hashing kernel.

Samples are absorbed in arrival order (slice 0 first), vectorized across
independent hash blocks rather than within one.
"""

import numpy as np


def hash_blocks(codes: np.ndarray, tables: np.ndarray) -> np.ndarray:
    """Hash ``len(codes) // s`` consecutive blocks of ``s`` masked codes.

    ``tables[k, c, v]`` holds the packed XOR of slice ``k``'s columns
    selected by byte ``v`` of a code at byte position ``c``.
    """
    s, n_chunks, _, n_words = tables.shape
    n_blocks = codes.shape[0] // s
    block_codes = codes[: n_blocks * s].reshape(n_blocks, s)
    acc = np.zeros((n_blocks, n_words), dtype=np.uint64)
    for k in range(s):
        col = block_codes[:, k]
        for c in range(n_chunks):
            acc ^= tables[k, c, (col >> (8 * c)) & 0xFF]
    return acc
