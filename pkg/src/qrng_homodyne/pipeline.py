"""End-to-end runs: simulate, quantize, budget entropy, extract, test.

Configuration is a JSON document; see :meth:`PipelineConfig.from_dict`
for the recognised keys. Everything inside the pipeline is in SI units,
dBm is converted at the config boundary.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import codecs
from .entropy import (
    EntropyReport,
    choose_m,
    extraction_error_bound,
    min_entropy_discrete,
    min_entropy_gaussian,
)
from .optics import (
    DetectorModel,
    OpticalPath,
    SplitConfig,
    cmrr_path,
    cmrr_split,
    dbm_to_watts,
    detector_variances,
    phase_from_path_difference,
    watts_to_dbm,
)
from .sampler import (
    AdcConfig,
    NoiseSpec,
    TraceConfig,
    adc_quantize,
    sample_quadratures,
    sigma_out_model,
)
from .stats import SuiteReport, run_core_suite
from .toeplitz import HashParams, ToeplitzExtractor, ToeplitzSeed

log = logging.getLogger(__name__)

EPSILON_TARGET = 0.0015
MODES = ("X", "P", "Z")


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    pass


@dataclass
class PipelineConfig:
    lo_power: float = 0.1  # W
    detector: DetectorModel = field(default_factory=DetectorModel.calibrated)
    trace: TraceConfig = field(default_factory=lambda: TraceConfig(num_samples=1_000_000))
    adc: AdcConfig = field(default_factory=AdcConfig)
    hash: HashParams = field(default_factory=lambda: HashParams(n=12, m=8, s=60))
    seed_source: str | None = None  # path to a seed file, or None/"host"
    seed_bytes: bytes | None = None
    quadrature_mode: str = "X"
    mu: float = 0.0
    epsilon_target: float = EPSILON_TARGET
    alpha: float = 0.01
    run_suite: bool = True
    bitstream_path: str | None = None
    bitstream_format: str = "raw"
    report_path: str | None = None
    backend: str | None = None

    def validate(self) -> None:
        if self.quadrature_mode not in MODES:
            raise ConfigError(f"quadrature_mode must be one of {MODES}")
        width = self.adc.bits * (2 if self.quadrature_mode == "Z" else 1)
        if self.hash.n != width:
            raise ConfigError(
                f"hash.n = {self.hash.n} but {self.quadrature_mode} mode feeds "
                f"{width}-bit samples"
            )
        if self.lo_power < 0:
            raise ConfigError("lo_power must be nonnegative")
        if not 0 < self.epsilon_target <= 1:
            raise ConfigError("epsilon_target must lie in (0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = copy.deepcopy(d)
        try:
            if "lo_power_dbm" in d:
                lo = dbm_to_watts(float(d.pop("lo_power_dbm")))
            else:
                lo = float(d.pop("lo_power_w", 0.1))
            det = d.pop("detector", {}) or {}
            if {"g", "sigma_c_sq", "p_sat"} <= det.keys():
                detector = DetectorModel(**det)
            else:
                detector = DetectorModel.calibrated(**det)
            trace = d.pop("trace", {}) or {}
            trace.setdefault("num_samples", 1_000_000)
            out = d.pop("output", {}) or {}
            seed_source = d.pop("seed_source", None)
            adc = AdcConfig(**(d.pop("adc", {}) or {}))
            width = adc.bits * (2 if d.get("quadrature_mode") == "Z" else 1)
            hash_params = {"n": width, "m": 8, "s": 60, **(d.pop("hash", {}) or {})}
            cfg = cls(
                lo_power=lo,
                detector=detector,
                trace=TraceConfig(**trace),
                adc=adc,
                hash=HashParams(**hash_params),
                seed_source=None if seed_source in (None, "host") else seed_source,
                bitstream_path=out.get("bitstream"),
                bitstream_format=out.get("format", "raw"),
                report_path=out.get("report"),
                **d,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "lo_power_w": self.lo_power,
            "lo_power_dbm": watts_to_dbm(self.lo_power) if self.lo_power > 0 else None,
            "detector": asdict(self.detector),
            "trace": asdict(self.trace),
            "adc": asdict(self.adc),
            "hash": asdict(self.hash),
            "seed_source": self.seed_source or ("inline" if self.seed_bytes else "host"),
            "quadrature_mode": self.quadrature_mode,
            "mu": self.mu,
            "epsilon_target": self.epsilon_target,
            "alpha": self.alpha,
            "output": {
                "bitstream": self.bitstream_path,
                "format": self.bitstream_format,
                "report": self.report_path,
            },
        }

    def load_seed(self) -> ToeplitzSeed:
        if self.seed_bytes is not None:
            return ToeplitzSeed.from_bytes(self.seed_bytes, self.hash)
        if self.seed_source:
            try:
                data = Path(self.seed_source).read_bytes()
            except OSError as exc:
                raise ConfigError(f"cannot read seed file: {exc}") from exc
            return ToeplitzSeed.from_bytes(data, self.hash)
        return ToeplitzSeed.from_host(self.hash)


def reference_config(**overrides) -> PipelineConfig:
    """Calibrated detector at 20 dBm, 12-bit ADC, n=12, m=8, s=60."""
    cfg = PipelineConfig(**overrides)
    cfg.validate()
    return cfg


@dataclass
class RunReport:
    entropy: EntropyReport
    suite: SuiteReport | None
    bits_emitted: int
    samples: int
    throughput_samples_per_s: float
    throughput_bits_per_s: float
    saturation_clamps: int
    empirical_h_min_bits: float
    sigma_q_sq: float
    sigma_c_sq: float
    snc_db: float
    backend: str
    config: dict
    seed_fingerprints: dict

    def to_dict(self) -> dict:
        return {
            "entropy": self.entropy.to_dict(),
            "suite": self.suite.to_dict() if self.suite else None,
            "bits_emitted": self.bits_emitted,
            "samples": self.samples,
            "throughput": {
                "samples_per_s": self.throughput_samples_per_s,
                "bits_per_s": self.throughput_bits_per_s,
                "backend": self.backend,
            },
            "saturation_clamps": self.saturation_clamps,
            "empirical_h_min_bits": self.empirical_h_min_bits,
            "detector": {
                "sigma_q_sq": self.sigma_q_sq,
                "sigma_c_sq": self.sigma_c_sq,
                "snc_db": None if math.isinf(self.snc_db) else self.snc_db,
            },
            "config": self.config,
            "seed_fingerprints": self.seed_fingerprints,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def quantized_channels(cfg: PipelineConfig):
    """Simulate and quantize; returns ``(x_codes, p_codes, clamped, variances)``."""
    dv = detector_variances(cfg.lo_power, cfg.detector)
    noise = NoiseSpec(mu=cfg.mu, sigma_q_sq=dv.sigma_q_sq, sigma_c_sq=dv.sigma_c_sq)
    batch = sample_quadratures(noise, None, cfg.trace)
    qx = adc_quantize(batch.x, cfg.adc)
    qp = adc_quantize(batch.p, cfg.adc)
    return qx.codes, qp.codes, qx.clamped + qp.clamped, dv


def extractor_input(x_codes, p_codes, mode: str, bits: int) -> np.ndarray:
    """Per-sample extractor input for a quadrature mode.

    In Z mode the X and P codes of a sample are concatenated (X high) into
    one ``2*bits`` wide value.
    """
    if mode == "X":
        return np.asarray(x_codes)
    if mode == "P":
        return np.asarray(p_codes)
    mask = (1 << bits) - 1
    x = np.asarray(x_codes, dtype=np.int64) & mask
    p = np.asarray(p_codes, dtype=np.int64) & mask
    return (x << bits) | p


def z_values(x_codes, p_codes) -> np.ndarray:
    x = np.asarray(x_codes, dtype=np.int64)
    p = np.asarray(p_codes, dtype=np.int64)
    return x * x + p * p


def run_pipeline(cfg: PipelineConfig) -> tuple[RunReport, np.ndarray]:
    cfg.validate()
    x_codes, p_codes, clamped, dv = quantized_channels(cfg)

    if dv.sigma_q_sq > 0:
        h_min = min_entropy_gaussian(math.sqrt(dv.sigma_q_sq), cfg.adc.w_bin)
    else:
        h_min = 0.0
    observed = {"X": x_codes, "P": p_codes}.get(cfg.quadrature_mode)
    if observed is None:
        observed = z_values(x_codes, p_codes)
    h_emp = min_entropy_discrete(observed)

    p = cfg.hash
    m_max = choose_m(h_min, p.s, cfg.epsilon_target)
    if p.m > m_max:
        raise PipelineError(
            f"m = {p.m} exceeds the {m_max} bits/sample allowed at "
            f"H_min = {h_min:.3f} bits, s = {p.s}, epsilon <= {cfg.epsilon_target}"
        )
    entropy = EntropyReport(h_min=h_min, m=p.m, s=p.s, epsilon=extraction_error_bound(p.s, p.m, h_min))

    seed = cfg.load_seed()
    extractor = ToeplitzExtractor(p, seed, backend=cfg.backend)
    data = extractor_input(x_codes, p_codes, cfg.quadrature_mode, cfg.adc.bits)
    t0 = time.perf_counter()
    bits = extractor.extract(data)
    elapsed = max(time.perf_counter() - t0, 1e-9)

    expected = (cfg.trace.num_samples // p.s) * p.s * p.m
    if bits.size != expected:
        raise PipelineError(f"emitted {bits.size} bits, expected {expected}")

    suite = None
    if cfg.run_suite and bits.size:
        suite = run_core_suite(bits, cfg.alpha)

    report = RunReport(
        entropy=entropy,
        suite=suite,
        bits_emitted=int(bits.size),
        samples=cfg.trace.num_samples,
        throughput_samples_per_s=cfg.trace.num_samples / elapsed,
        throughput_bits_per_s=bits.size / elapsed,
        saturation_clamps=clamped,
        empirical_h_min_bits=h_emp,
        sigma_q_sq=dv.sigma_q_sq,
        sigma_c_sq=dv.sigma_c_sq,
        snc_db=dv.snc_db,
        backend=extractor.backend,
        config=cfg.to_dict(),
        seed_fingerprints={
            "sampler_seed": cfg.trace.rng_seed,
            "toeplitz_seed_sha256": hashlib.sha256(seed.to_bytes()).hexdigest(),
        },
    )
    if cfg.bitstream_path:
        codecs.write_bitstream(cfg.bitstream_path, bits, cfg.bitstream_format)
    if cfg.report_path:
        Path(cfg.report_path).write_text(report.to_json())
    return report, bits


# Figure data -----------------------------------------------------------

FIGURES = ("fig3-left", "fig3-right", "fig7", "fig8")

# Residual common-mode tone amplitude at the TIA output before rejection.
FIG3_TONE_AMPLITUDE = 0.1  # V


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fig3_left(tone_amplitude, floor):
    rows = []
    for tenth_mm in range(-250, 251):
        dl = tenth_mm * 1e-4
        phi = phase_from_path_difference(OpticalPath(delta_l=dl, f_cm=1e9))
        c = cmrr_path(phi)
        rows.append((tenth_mm / 10, phi, c, 1e3 * sigma_out_model(tone_amplitude, c, floor)))
    return _csv(("delta_l_mm", "phase_rad", "cmrr_db", "sigma_out_mv"), rows)


def _fig3_right(tone_amplitude, floor):
    rows = []
    for pct in range(25, 76):
        kappa = pct / 100
        c = cmrr_split(SplitConfig(kappa))
        rows.append((kappa, c, 1e3 * sigma_out_model(tone_amplitude, c, floor)))
    return _csv(("kappa", "cmrr_db", "sigma_out_mv"), rows)


def _fig7(detector):
    rows = []
    for dbm in range(-14, 23):
        w = dbm_to_watts(dbm)
        dv = detector_variances(w, detector)
        rows.append(
            (dbm, w, 1e6 * dv.sigma_total_sq, 1e6 * dv.sigma_q_sq, 1e6 * dv.sigma_c_sq, dv.snc_db)
        )
    return _csv(
        ("lo_power_dbm", "lo_power_w", "sigma_total_sq_mv2", "sigma_q_sq_mv2", "sigma_c_sq_mv2", "snc_db"),
        rows,
    )


def _fig8(cfg):
    x_codes, p_codes, _, _ = quantized_channels(cfg)
    data = extractor_input(x_codes, p_codes, cfg.quadrature_mode, cfg.adc.bits)
    bits = ToeplitzExtractor(cfg.hash, cfg.load_seed(), backend=cfg.backend).extract(data)
    hashed = np.frombuffer(codecs.pack_bits(bits)[0], dtype=np.uint8)
    rows = []
    raw_vals, raw_counts = np.unique(data if cfg.quadrature_mode != "Z" else x_codes, return_counts=True)
    rows += [("raw_code", int(v), int(c)) for v, c in zip(raw_vals, raw_counts)]
    byte_counts = np.bincount(hashed, minlength=256)
    rows += [("hashed_byte", v, int(c)) for v, c in enumerate(byte_counts)]
    return _csv(("kind", "value", "count"), rows)


def emit_figure_data(figure: str, config: PipelineConfig | None = None, tone_amplitude: float = FIG3_TONE_AMPLITUDE) -> str:
    """CSV text (header row first) for one of :data:`FIGURES`."""
    cfg = config or reference_config()
    floor = cfg.detector.sigma_floor
    if figure == "fig3-left":
        return _fig3_left(tone_amplitude, floor)
    if figure == "fig3-right":
        return _fig3_right(tone_amplitude, floor)
    if figure == "fig7":
        return _fig7(cfg.detector)
    if figure == "fig8":
        if config is None:
            cfg = reference_config(trace=TraceConfig(num_samples=120_000, rng_seed=8), run_suite=False)
        return _fig8(cfg)
    raise ValueError(f"unknown figure {figure!r}; choose from {FIGURES}")

