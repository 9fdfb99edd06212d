"""Conjugate homodyne QRNG model."""

__version__ = "0.1.0"
