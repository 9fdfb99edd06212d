# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sliced Toeplitz hashing kernel.

Same contract as ``_fallback.hash_blocks``: one table lookup and a
word-wise XOR per code byte, in sample arrival order.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint32_t, uint64_t

cnp.import_array()


def hash_blocks(const uint32_t[::1] codes, const uint64_t[:, :, :, ::1] tables):
    cdef Py_ssize_t s = tables.shape[0]
    cdef Py_ssize_t n_chunks = tables.shape[1]
    cdef Py_ssize_t n_words = tables.shape[3]
    cdef Py_ssize_t n_blocks = codes.shape[0] // s
    out = np.zeros((n_blocks, n_words), dtype=np.uint64)
    cdef uint64_t[:, ::1] acc = out
    cdef Py_ssize_t h, k, c, w
    cdef uint32_t u
    cdef const uint64_t* row
    with nogil:
        for h in range(n_blocks):
            for k in range(s):
                u = codes[h * s + k]
                for c in range(n_chunks):
                    row = &tables[k, c, (u >> (8 * c)) & 0xFF, 0]
                    for w in range(n_words):
                        acc[h, w] ^= row[w]
    return out
