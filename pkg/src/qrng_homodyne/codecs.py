"""File formats: raw ADC sample files, packed bitstreams, seed files.

Sample file layout (little-endian)::

    offset  size  field
    0       4     magic b"QRNG"
    4       2     format version (1)
    6       1     ADC bit width
    7       1     channel tag (ASCII 'X', 'P' or 'Z')
    8       8     sample count
    16      2*N   int16 two's-complement codes
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"QRNG"
VERSION = 1
_HEADER = struct.Struct("<4sHBBQ")
HEADER_SIZE = _HEADER.size
CHANNELS = ("X", "P", "Z")


class SampleFileError(ValueError):
    pass


def encode_samples(codes, channel: str = "X", bits: int = 12) -> bytes:
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}, got {channel!r}")
    if not 1 <= bits <= 16:
        raise ValueError("bit width must be in [1, 16]")
    arr = np.asarray(codes, dtype=np.int64).reshape(-1)
    lo, hi = -(2 ** (bits - 1)), 2 ** (bits - 1) - 1
    if arr.size and (arr.min() < lo or arr.max() > hi):
        raise ValueError(f"codes do not fit {bits}-bit two's complement")
    header = _HEADER.pack(MAGIC, VERSION, bits, ord(channel), arr.size)
    return header + arr.astype("<i2").tobytes()


def decode_samples(data: bytes) -> tuple[np.ndarray, str, int]:
    """Return ``(codes, channel, bits)`` from an encoded sample file."""
    if len(data) < HEADER_SIZE:
        raise SampleFileError("truncated header")
    magic, version, bits, tag, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SampleFileError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SampleFileError(f"unsupported version {version}")
    body = memoryview(data)[HEADER_SIZE:]
    if len(body) < 2 * count:
        raise SampleFileError(f"truncated body: {len(body)} bytes for {count} samples")
    codes = np.frombuffer(body[: 2 * count], dtype="<i2").astype(np.int32)
    lo, hi = -(2 ** (bits - 1)), 2 ** (bits - 1) - 1
    if codes.size and (codes.min() < lo or codes.max() > hi):
        raise SampleFileError(f"stored codes exceed declared {bits}-bit width")
    return codes, chr(tag), bits


def write_samples(path, codes, channel: str = "X", bits: int = 12) -> None:
    Path(path).write_bytes(encode_samples(codes, channel, bits))


def read_samples(path) -> tuple[np.ndarray, str, int]:
    return decode_samples(Path(path).read_bytes())


def pack_bits(bits) -> tuple[bytes, int]:
    """Pack bits MSB first; returns the bytes and the zero-pad length."""
    arr = np.asarray(bits, dtype=np.uint8).reshape(-1)
    pad = (-arr.size) % 8
    return np.packbits(arr).tobytes(), pad


def unpack_bits(data: bytes, pad: int = 0) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    return bits[: bits.size - pad] if pad else bits


def write_bitstream(path, bits, fmt: str = "raw") -> int:
    """Write bits as packed bytes (``raw``) or ASCII 0/1 (``ascii``).

    Returns the number of bits written.
    """
    arr = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if fmt == "raw":
        Path(path).write_bytes(pack_bits(arr)[0])
    elif fmt == "ascii":
        Path(path).write_bytes((arr + ord("0")).tobytes())
    else:
        raise ValueError(f"unknown bitstream format {fmt!r}")
    return int(arr.size)


def read_bitstream(path, fmt: str = "raw") -> np.ndarray:
    data = Path(path).read_bytes()
    if fmt == "raw":
        return unpack_bits(data)
    if fmt == "ascii":
        raw = np.frombuffer(data, dtype=np.uint8)
        raw = raw[(raw == ord("0")) | (raw == ord("1"))]
        return (raw - ord("0")).astype(np.uint8)
    raise ValueError(f"unknown bitstream format {fmt!r}")
