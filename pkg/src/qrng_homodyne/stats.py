"""Core statistical randomness tests and Fisher's method.

Implements the frequency (monobit), block frequency, runs and cumulative
sums tests following NIST SP 800-22 definitions. Bit sequences are any
array-like of 0/1 values.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

log = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.01
DEFAULT_BLOCK_LEN = 128
P_FLOOR = 1e-300


class _NotApplicable:
    """Returned when a test's prerequisite fails; not an error."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotApplicable"

    def __bool__(self):
        return False


NotApplicable = _NotApplicable()


def _as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if arr.size == 0:
        raise ValueError("empty bit sequence")
    return arr


def _clip01(p: float) -> float:
    return float(min(1.0, max(0.0, p)))


def frequency_monobit(bits) -> float:
    x = _as_bits(bits)
    n = x.size
    if n < 100:
        warnings.warn(f"monobit test on {n} < 100 bits", stacklevel=2)
    s_n = 2 * int(np.count_nonzero(x)) - n
    return _clip01(special.erfc(abs(s_n) / math.sqrt(2.0 * n)))


def block_frequency(bits, block_len: int = DEFAULT_BLOCK_LEN) -> float:
    if block_len < 1:
        raise ValueError("block length must be >= 1")
    x = _as_bits(bits)
    n_blocks = x.size // block_len
    if n_blocks == 0:
        raise ValueError(f"need at least one full block of {block_len} bits")
    blocks = x[: n_blocks * block_len].reshape(n_blocks, block_len)
    pi = blocks.sum(axis=1, dtype=np.int64) / block_len
    chi_sq = 4.0 * block_len * float(np.sum((pi - 0.5) ** 2))
    return _clip01(special.gammaincc(n_blocks / 2.0, chi_sq / 2.0))


def runs_test(bits):
    """Runs test p-value, or ``NotApplicable`` if the ones-fraction pre-test fails."""
    x = _as_bits(bits)
    n = x.size
    pi = np.count_nonzero(x) / n
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return NotApplicable
    v_n = 1 + int(np.count_nonzero(x[1:] != x[:-1]))
    num = abs(v_n - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    return _clip01(special.erfc(num / den))


def cumulative_sums(bits, direction: str = "forward") -> float:
    x = _as_bits(bits)
    if direction not in ("forward", "reverse"):
        raise ValueError("direction must be 'forward' or 'reverse'")
    n = x.size
    if n < 100:
        warnings.warn(f"cumulative sums test on {n} < 100 bits", stacklevel=2)
    steps = 2 * x.astype(np.int64) - 1
    if direction == "reverse":
        steps = steps[::-1]
    z = int(np.max(np.abs(np.cumsum(steps))))
    return _clip01(_cusum_pvalue(n, z))


def _cusum_pvalue(n: int, z: int) -> float:
    if z == 0:
        return 1.0
    rn = math.sqrt(n)
    # Truncating bounds as in the reference C implementation.
    k1 = np.arange(int((-n / z + 1) / 4), int((n / z - 1) / 4) + 1)
    k2 = np.arange(int((-n / z - 3) / 4), int((n / z - 1) / 4) + 1)
    cdf = stats.norm.cdf
    sum1 = np.sum(cdf((4 * k1 + 1) * z / rn) - cdf((4 * k1 - 1) * z / rn))
    sum2 = np.sum(cdf((4 * k2 + 3) * z / rn) - cdf((4 * k2 + 1) * z / rn))
    return float(1.0 - sum1 + sum2)


def fisher_combine(p_values) -> float:
    """Composite p-value: chi-squared (2k dof) survival of -2 sum(ln p)."""
    p = np.asarray(list(p_values), dtype=np.float64)
    if p.size == 0:
        raise ValueError("no p-values to combine")
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    if np.any(p == 0):
        warnings.warn("zero p-value floored at 1e-300", stacklevel=2)
        p = np.maximum(p, P_FLOOR)
    statistic = -2.0 * float(np.sum(np.log(p)))
    return _clip01(stats.chi2.sf(statistic, 2 * p.size))


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    test_name: str
    p_value: float
    alpha: float = DEFAULT_ALPHA
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.p_value >= self.alpha

    def to_dict(self) -> dict:
        d = {"test": self.test_name, "p_value": self.p_value, "passed": self.passed}
        if self.error:
            d["error"] = self.error
        return d


@dataclass
class SuiteReport:
    results: list[TestResult]
    fisher_p: float
    alpha: float = DEFAULT_ALPHA
    not_applicable: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results) and self.fisher_p >= self.alpha

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "results": [r.to_dict() for r in self.results],
            "not_applicable": list(self.not_applicable),
            "fisher_p": self.fisher_p,
            "passed": self.passed,
        }


CORE_TESTS = (
    ("frequency_monobit", frequency_monobit),
    ("block_frequency", lambda b: block_frequency(b, DEFAULT_BLOCK_LEN)),
    ("runs", runs_test),
    ("cumulative_sums_forward", lambda b: cumulative_sums(b, "forward")),
    ("cumulative_sums_reverse", lambda b: cumulative_sums(b, "reverse")),
)


def run_core_suite(bits, alpha: float = DEFAULT_ALPHA) -> SuiteReport:
    x = _as_bits(bits)
    results: list[TestResult] = []
    skipped: list[str] = []
    for name, fn in CORE_TESTS:
        try:
            p = fn(x)
        except Exception as exc:  # reported per test, never aborts the suite
            log.warning("test %s failed to run: %s", name, exc)
            results.append(TestResult(name, 0.0, alpha, error=str(exc)))
            continue
        if p is NotApplicable:
            skipped.append(name)
            continue
        results.append(TestResult(name, p, alpha))
    usable = [r.p_value for r in results if r.error is None]
    fisher_p = fisher_combine(usable) if usable else 0.0
    return SuiteReport(results=results, fisher_p=fisher_p, alpha=alpha, not_applicable=skipped)
