"""Monte-Carlo quadrature traces, the Z observable, ADC quantization and
single-bin spectral power.

Vacuum noise is stood in for by numpy's PCG64 bit generator feeding the
ziggurat normal sampler of ``numpy.random.Generator``. Both are exact up to
floating-point rounding. The X channel is drawn first, then P, so a batch
is a pure function of ``(noise, tone, config)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .optics import CMRR_MAX, rejection_factor


@dataclass(frozen=True)
class NoiseSpec:
    mu: float = 0.0
    sigma_q_sq: float = 0.0
    sigma_c_sq: float = 0.0

    def __post_init__(self):
        if self.sigma_q_sq < 0 or self.sigma_c_sq < 0:
            raise ValueError("variances must be nonnegative")

    @property
    def variance(self) -> float:
        return self.sigma_q_sq + self.sigma_c_sq


@dataclass(frozen=True)
class ToneSpec:
    amplitude: float
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("tone amplitude must be nonnegative")


@dataclass(frozen=True)
class TraceConfig:
    num_samples: int
    sample_rate: float = 1e6
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")


@dataclass
class QuadratureBatch:
    x: np.ndarray
    p: np.ndarray
    config: TraceConfig

    def __post_init__(self):
        if len(self.x) != len(self.p) or len(self.x) != self.config.num_samples:
            raise ValueError("x and p must both hold num_samples values")


@dataclass(frozen=True)
class AdcConfig:
    """Bipolar ADC; defaults match a 12-bit converter over +/-500 mV."""

    bits: int = 12
    v_min: float = -0.5
    v_max: float = 0.5

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if not self.v_max > self.v_min:
            raise ValueError("v_max must exceed v_min")

    @property
    def w_bin(self) -> float:
        return (self.v_max - self.v_min) / 2**self.bits

    @property
    def code_min(self) -> int:
        return -(2 ** (self.bits - 1))

    @property
    def code_max(self) -> int:
        return 2 ** (self.bits - 1) - 1


@dataclass
class QuantizedTrace:
    codes: np.ndarray
    clamped: int = 0
    adc: AdcConfig = field(default_factory=AdcConfig)


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_quadratures(
    noise: NoiseSpec, tone: ToneSpec | None, cfg: TraceConfig
) -> QuadratureBatch:
    """Draw independent X and P traces from Normal(mu, sigma_q^2 + sigma_c^2).

    A tone, if given, is added identically to both channels.
    """
    n = cfg.num_samples
    if tone is not None and tone.frequency >= cfg.sample_rate / 2:
        raise ValueError(
            f"tone frequency {tone.frequency} Hz is at or above Nyquist "
            f"({cfg.sample_rate / 2} Hz)"
        )
    sigma = math.sqrt(noise.variance)
    if sigma == 0.0:
        x = np.full(n, noise.mu, dtype=np.float64)
        p = np.full(n, noise.mu, dtype=np.float64)
    else:
        rng = _generator(cfg.rng_seed)
        x = noise.mu + sigma * rng.standard_normal(n)
        p = noise.mu + sigma * rng.standard_normal(n)
    if tone is not None and tone.amplitude > 0:
        t = np.arange(n, dtype=np.float64) / cfg.sample_rate
        wave = tone.amplitude * np.sin(2 * np.pi * tone.frequency * t + tone.phase)
        x += wave
        p += wave
    return QuadratureBatch(x=x, p=p, config=cfg)


def compute_z(batch: QuadratureBatch) -> np.ndarray:
    return batch.x * batch.x + batch.p * batch.p


def _round_half_away(v: np.ndarray) -> np.ndarray:
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def adc_quantize(v, adc: AdcConfig | None = None):
    """Mid-tread quantization with rail clamping.

    Scalars return an ``int``; arrays return a :class:`QuantizedTrace`
    carrying the number of clamped samples.
    """
    adc = adc or AdcConfig()
    arr = np.asarray(v, dtype=np.float64)
    raw = _round_half_away(arr / adc.w_bin)
    codes = np.clip(raw, adc.code_min, adc.code_max)
    if arr.ndim == 0:
        return int(codes)
    clamped = int(np.count_nonzero(raw != codes))
    return QuantizedTrace(codes=codes.astype(np.int32), clamped=clamped, adc=adc)


def spectral_power_at(trace, sample_rate: float, f: float) -> float:
    """Power at ``f`` from a single-bin DFT.

    Scaled so that a sinusoid of amplitude A at a bin-aligned frequency
    gives A^2 / 2.
    """
    x = np.asarray(trace, dtype=np.float64)
    n = x.size
    if n < 2:
        raise ValueError("trace needs at least 2 samples")
    if not 0.0 < f < sample_rate / 2:
        raise ValueError(f"frequency {f} Hz outside (0, {sample_rate / 2}) Hz")
    w = 2.0 * np.pi * f / sample_rate
    k = np.arange(n, dtype=np.float64)
    re = float(np.dot(x, np.cos(w * k)))
    im = float(np.dot(x, np.sin(w * k)))
    return 2.0 * (re * re + im * im) / (n * n)


def tone_amplitude_at(trace, sample_rate: float, f: float) -> float:
    """Amplitude of a sinusoid at ``f`` recovered from its spectral power."""
    return math.sqrt(2.0 * spectral_power_at(trace, sample_rate, f))


def sigma_out_model(tone_amplitude: float, cmrr: float, floor: float) -> float:
    """Output standard deviation: noise floor plus residual tone RMS."""
    if tone_amplitude < 0 or floor < 0:
        raise ValueError("inputs must be nonnegative")
    residual = tone_amplitude * rejection_factor(min(cmrr, CMRR_MAX))
    return math.sqrt(floor * floor + residual * residual / 2.0)
