"""Min-entropy estimates and the Toeplitz extraction error bound."""

from __future__ import annotations

import math
import warnings
from collections.abc import Mapping
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class EntropyReport:
    h_min: float
    m: int
    s: int
    epsilon: float

    def to_dict(self) -> dict:
        d = asdict(self)
        return {"h_min_bits": d["h_min"], "m": d["m"], "s": d["s"], "epsilon": d["epsilon"]}


def min_entropy_gaussian(sigma_q: float, w_bin: float) -> float:
    """Per-sample min-entropy (bits) of a finely binned Gaussian.

    The most probable ADC bin holds probability ``w_bin * peak density``,
    which is accurate only while ``w_bin`` is small next to ``sigma_q``.
    """
    if sigma_q <= 0 or w_bin <= 0:
        raise ValueError("sigma_q and w_bin must be positive")
    if w_bin > sigma_q / 10:
        warnings.warn(
            f"bin width {w_bin:g} is not small next to sigma_q {sigma_q:g}; "
            "the peak-bin approximation is degraded",
            stacklevel=2,
        )
    return -math.log2(w_bin / (sigma_q * math.sqrt(2.0 * math.pi)))


def min_entropy_discrete(histogram) -> float:
    """Min-entropy (bits) of an empirical distribution.

    Accepts a mapping ``value -> count`` or an array of raw observations.
    """
    if isinstance(histogram, Mapping):
        counts = np.fromiter(histogram.values(), dtype=np.int64)
    else:
        values = np.asarray(histogram)
        if values.size == 0:
            raise ValueError("empty histogram")
        _, counts = np.unique(values, return_counts=True)
    total = int(counts.sum()) if counts.size else 0
    if total <= 0:
        raise ValueError("empty histogram")
    return -math.log2(int(counts.max()) / total)


def extraction_error_bound(s: int, m: int, h_min: float) -> float:
    """Statistical distance bound for an ``s*m x s*n`` Toeplitz hash, capped at 1."""
    if s < 1 or m < 0:
        raise ValueError("need s >= 1 and m >= 0")
    return min(1.0, 2.0 ** (s * (m - h_min) / 2.0))


def choose_m(h_min: float, s: int, epsilon_target: float) -> int:
    """Largest per-sample output width whose bound stays within the target."""
    if not 0 < epsilon_target <= 1:
        raise ValueError("epsilon_target must lie in (0, 1]")
    # The bound saturates at 1 for m >= h_min, so search no higher than
    # ceil(h_min); this also keeps epsilon_target == 1 finite.
    m = max(0, math.ceil(h_min))
    while m > 0 and extraction_error_bound(s, m, h_min) > epsilon_target:
        m -= 1
    return m


def budget(h_min: float, s: int, m: int) -> EntropyReport:
    return EntropyReport(h_min=h_min, m=m, s=s, epsilon=extraction_error_bound(s, m, h_min))
