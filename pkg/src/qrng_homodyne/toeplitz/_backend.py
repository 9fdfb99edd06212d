"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``QRNG_HOMODYNE_PURE=1`` to force the numpy kernel.
"""

import os

from . import _fallback

try:
    if os.environ.get("QRNG_HOMODYNE_PURE"):
        raise ImportError("compiled kernel disabled by QRNG_HOMODYNE_PURE")
    from ._kernel import hash_blocks as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "numpy"
AVAILABLE = ("cython", "numpy") if _compiled is not None else ("numpy",)


def get(name=None):
    name = name or BACKEND
    if name == "numpy":
        return _fallback.hash_blocks
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not built; reinstall with Cython available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
