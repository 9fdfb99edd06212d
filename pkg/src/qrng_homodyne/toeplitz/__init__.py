from ._backend import AVAILABLE, BACKEND
from .core import (
    HashParams,
    StreamState,
    ToeplitzExtractor,
    ToeplitzMatrix,
    ToeplitzSeed,
    build_toeplitz,
    codes_to_bits,
    extract_stream,
    hash_dense,
    sample_slice,
    slice_tables,
    stream_absorb,
    toeplitz_dense,
)

__all__ = [
    "AVAILABLE",
    "BACKEND",
    "HashParams",
    "StreamState",
    "ToeplitzExtractor",
    "ToeplitzMatrix",
    "ToeplitzSeed",
    "build_toeplitz",
    "codes_to_bits",
    "extract_stream",
    "hash_dense",
    "sample_slice",
    "slice_tables",
    "stream_absorb",
    "toeplitz_dense",
]
