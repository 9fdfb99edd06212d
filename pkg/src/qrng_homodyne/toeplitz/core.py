"""Toeplitz hashing: construction, dense GF(2) hashing and per-sample streaming.

Conventions fixed here so that every path is bit-exact with every other:

* the matrix has ``M = s*m`` rows (output bits) and ``N = s*n`` columns
  (input bits), with ``entry(i, j) = seed[i - j + N - 1]``;
* the slice for sample ``k`` is the column block ``[k*n, (k+1)*n)``;
* a sample code enters as ``n`` two's-complement bits, most significant
  bit first;
* hash bits are emitted row order, row 0 first.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _backend


@dataclass(frozen=True)
class HashParams:
    n: int
    m: int
    s: int

    def __post_init__(self):
        if not 1 <= self.m < self.n:
            raise ValueError(f"need 1 <= m < n, got m={self.m}, n={self.n}")
        if self.s < 1:
            raise ValueError(f"need s >= 1, got s={self.s}")

    @property
    def N(self) -> int:
        return self.s * self.n

    @property
    def M(self) -> int:
        return self.s * self.m

    @property
    def seed_length(self) -> int:
        return self.s * (self.m + self.n) - 1


@dataclass(frozen=True, eq=False)
class ToeplitzSeed:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or np.any(bits > 1):
            raise ValueError("seed must be a flat sequence of 0/1 values")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return self.bits.size

    @classmethod
    def from_bytes(cls, data: bytes, params: HashParams) -> "ToeplitzSeed":
        """Take the first ``params.seed_length`` bits of ``data``, MSB first."""
        need = params.seed_length
        if len(data) * 8 < need:
            raise ValueError(
                f"seed holds {len(data) * 8} bits, need {need} "
                f"({-(-need // 8)} bytes)"
            )
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))[:need]
        return cls(bits)

    @classmethod
    def from_host(cls, params: HashParams) -> "ToeplitzSeed":
        return cls.from_bytes(os.urandom(-(-params.seed_length // 8)), params)

    @classmethod
    def random(cls, params: HashParams, rng: np.random.Generator) -> "ToeplitzSeed":
        return cls(rng.integers(0, 2, params.seed_length, dtype=np.uint8))

    def to_bytes(self) -> bytes:
        return np.packbits(self.bits).tobytes()


@dataclass(frozen=True, eq=False)
class ToeplitzMatrix:
    params: HashParams
    seed: ToeplitzSeed
    dense: np.ndarray = field(repr=False)

    def entry(self, i: int, j: int) -> int:
        return int(self.seed.bits[i - j + self.params.N - 1])


def toeplitz_dense(seed_bits, rows: int, cols: int) -> np.ndarray:
    """``rows x cols`` 0/1 matrix with ``entry(i, j) = seed[i - j + cols - 1]``."""
    bits = np.asarray(seed_bits, dtype=np.uint8)
    if bits.size != rows + cols - 1:
        raise ValueError(f"seed has {bits.size} bits, need {rows + cols - 1}")
    idx = np.arange(rows)[:, None] - np.arange(cols)[None, :] + (cols - 1)
    return bits[idx]


def build_toeplitz(seed: ToeplitzSeed, params: HashParams) -> ToeplitzMatrix:
    if len(seed) != params.seed_length:
        raise ValueError(
            f"seed has {len(seed)} bits, params need s*(m+n)-1 = {params.seed_length}"
        )
    dense = toeplitz_dense(seed.bits, params.M, params.N)
    dense.setflags(write=False)
    return ToeplitzMatrix(params=params, seed=seed, dense=dense)


def hash_dense(matrix, bits) -> np.ndarray:
    """GF(2) product of a matrix with one or more input bit vectors.

    ``matrix`` is a :class:`ToeplitzMatrix` or any 0/1 array. A 2-D input
    hashes each row independently.
    """
    a = matrix.dense if isinstance(matrix, ToeplitzMatrix) else np.asarray(matrix, dtype=np.uint8)
    x = np.asarray(bits, dtype=np.uint8)
    if x.shape[-1] != a.shape[1]:
        raise ValueError(f"input has {x.shape[-1]} bits, expected {a.shape[1]}")
    return ((x.astype(np.int64) @ a.T.astype(np.int64)) & 1).astype(np.uint8)


def sample_slice(matrix: ToeplitzMatrix, k: int) -> np.ndarray:
    p = matrix.params
    if not 0 <= k < p.s:
        raise IndexError(f"sample index {k} outside [0, {p.s})")
    return matrix.dense[:, k * p.n : (k + 1) * p.n]


@dataclass(frozen=True, eq=False)
class StreamState:
    """XOR accumulator for one hash in progress."""

    accumulator: np.ndarray
    samples_absorbed: int
    s: int

    @classmethod
    def empty(cls, params: HashParams) -> "StreamState":
        return cls(np.zeros(params.M, dtype=np.uint8), 0, params.s)


def stream_absorb(
    state: StreamState, sample, slice_: np.ndarray
) -> tuple[StreamState, np.ndarray | None]:
    """Fold one sample into the accumulator.

    Returns the next state and, once ``s`` samples have been absorbed, the
    finished hash (the returned state is then reset).
    """
    if state.samples_absorbed >= state.s:
        raise RuntimeError("stream state is full; its hash was never emitted")
    x = np.asarray(sample, dtype=np.uint8)
    if x.shape != (slice_.shape[1],) or slice_.shape[0] != state.accumulator.size:
        raise ValueError("sample/slice shape mismatch")
    partial = (slice_.astype(np.int64) @ x.astype(np.int64)) & 1
    acc = state.accumulator ^ partial.astype(np.uint8)
    count = state.samples_absorbed + 1
    if count == state.s:
        return StreamState(np.zeros_like(acc), 0, state.s), acc
    return StreamState(acc, count, state.s), None


def codes_to_bits(codes, n: int) -> np.ndarray:
    """Render integer codes as n-bit two's complement, MSB first."""
    u = np.asarray(codes, dtype=np.int64) & ((1 << n) - 1)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((u[:, None] >> shifts) & 1).astype(np.uint8)


def _pack_columns(columns: np.ndarray, n_words: int) -> np.ndarray:
    """Pack bit columns of shape (..., M) into native uint64 words, MSB first."""
    M = columns.shape[-1]
    padded = np.zeros(columns.shape[:-1] + (n_words * 64,), dtype=np.uint8)
    padded[..., :M] = columns
    packed = np.packbits(padded, axis=-1)
    return packed.view(">u8").astype(np.uint64)


def _unpack_words(words: np.ndarray, M: int) -> np.ndarray:
    as_bytes = words.astype(">u8").view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1)[..., :M]


def slice_tables(matrix: ToeplitzMatrix) -> np.ndarray:
    """Byte-indexed XOR tables for the sliced kernel.

    Shape ``(s, ceil(n/8), 256, ceil(M/64))``; entry ``[k, c, v]`` is the
    XOR of the slice-``k`` columns picked out by value ``v`` in byte ``c``
    (counting from the least significant byte) of a masked sample code.
    """
    p = matrix.params
    n_words = -(-p.M // 64)
    n_chunks = -(-p.n // 8)
    # cols[k, j] is column j of slice k; value bit b maps to column n-1-b.
    cols = matrix.dense.T.reshape(p.s, p.n, p.M)
    packed = _pack_columns(cols, n_words)
    tables = np.zeros((p.s, n_chunks, 256, n_words), dtype=np.uint64)
    for c in range(n_chunks):
        for v in range(1, 256):
            low = (v & -v).bit_length() - 1
            pos = 8 * c + low
            prev = tables[:, c, v & (v - 1)]
            if pos < p.n:
                tables[:, c, v] = prev ^ packed[:, p.n - 1 - pos]
            else:
                tables[:, c, v] = prev
    return tables


class ToeplitzExtractor:
    """Sliced streaming extractor over a fixed matrix.

    ``feed`` accepts codes in arrival order across calls; samples that do
    not yet complete a hash are carried over to the next call.
    """

    def __init__(self, params: HashParams, seed: ToeplitzSeed, backend: str | None = None):
        self.params = params
        self.matrix = build_toeplitz(seed, params)
        self.tables = slice_tables(self.matrix)
        self._hash_blocks = _backend.get(backend)
        self.backend = backend or _backend.BACKEND
        self._pending = np.zeros(0, dtype=np.uint32)

    def _masked(self, codes) -> np.ndarray:
        u = np.asarray(codes, dtype=np.int64) & ((1 << self.params.n) - 1)
        return u.astype(np.uint32)

    def hash_words(self, codes) -> np.ndarray:
        """Packed hashes (one row of uint64 words each) of whole blocks only."""
        return self._hash_blocks(np.ascontiguousarray(self._masked(codes)), self.tables)

    def extract(self, codes) -> np.ndarray:
        """Bits of every complete block in ``codes``; the remainder is dropped."""
        words = self.hash_words(codes)
        return _unpack_words(words, self.params.M).reshape(-1)

    def feed(self, codes) -> np.ndarray:
        u = np.concatenate([self._pending, self._masked(codes)])
        s = self.params.s
        whole = (u.size // s) * s
        self._pending = u[whole:].copy()
        words = self._hash_blocks(np.ascontiguousarray(u[:whole]), self.tables)
        return _unpack_words(words, self.params.M).reshape(-1)

    @property
    def pending(self) -> int:
        return int(self._pending.size)


def extract_stream(
    codes, params: HashParams, seed: ToeplitzSeed, backend: str | None = None
) -> np.ndarray:
    """Concatenated hashes of consecutive s-sample groups; trailing partial group discarded."""
    return ToeplitzExtractor(params, seed, backend=backend).extract(codes)
