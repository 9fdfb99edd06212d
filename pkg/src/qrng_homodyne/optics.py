"""Closed-form detector imperfection formulas.

Common-mode rejection from path-length and splitting imbalance, CMRR as
measured from tone spectra, and a linear LO-power detector model with a
hard saturation clamp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SPEED_OF_LIGHT = 2.99792458e8  # m/s, exact SI value
CMRR_MAX = 200.0  # dB

# Reference operating point of the calibrated detector.
REF_LO_POWER = 0.1  # W (20 dBm)
REF_TOTAL_VARIANCE = 995e-6  # V^2
REF_SNC_DB = 25.6
NOISE_FLOOR = 8.5e-3  # V, tone-experiment output floor


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0:
        return -math.inf
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class OpticalPath:
    """Path imbalance seen by a common-mode tone.

    ``delta_l`` is signed (m); ``n_eff`` defaults to free space.
    """

    delta_l: float
    f_cm: float
    n_eff: float = 1.0

    def __post_init__(self):
        if not self.n_eff > 0:
            raise ValueError(f"n_eff must be positive, got {self.n_eff}")
        if self.f_cm < 0:
            raise ValueError(f"f_cm must be nonnegative, got {self.f_cm}")


@dataclass(frozen=True)
class SplitConfig:
    kappa: float

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in [0, 1], got {self.kappa}")

    @property
    def transmission(self) -> float:
        return 1.0 - self.kappa


@dataclass(frozen=True)
class CmrrMeasurement:
    """Differential and common-mode spectral levels (same linear units)."""

    s_d: float
    s_cm: float

    def __post_init__(self):
        if self.s_d < 0 or self.s_cm < 0:
            raise ValueError("spectral levels must be nonnegative")

    @classmethod
    def from_single_arm(cls, single_arm: float, balanced: float) -> "CmrrMeasurement":
        """Build from a 0/50 (one arm dark) level and a 50/50 level.

        The single-arm level carries only half of the differential signal,
        so it is doubled to form ``s_d``.
        """
        return cls(s_d=2.0 * single_arm, s_cm=balanced)


def _clamp_db(value: float) -> float:
    return min(max(value, 0.0), CMRR_MAX) + 0.0  # no -0.0


def _neg_db(ratio: float) -> float:
    """-10 log10(ratio) for ratio in [0, 1], clamped to [0, CMRR_MAX]."""
    if ratio <= 0.0:
        return CMRR_MAX
    return _clamp_db(-10.0 * math.log10(ratio))


def phase_from_path_difference(path: OpticalPath) -> float:
    """Phase (rad) accumulated by a tone at ``f_cm`` over ``delta_l``."""
    return 2.0 * math.pi * path.f_cm * path.n_eff * path.delta_l / SPEED_OF_LIGHT


def cmrr_path(delta_phi: float) -> float:
    """CMRR (dB) from a phase mismatch between the two arms."""
    return _neg_db(abs(math.sin(delta_phi / 2.0)))


def cmrr_split(cfg: SplitConfig) -> float:
    """CMRR (dB) from a power coupling imbalance."""
    return _neg_db(abs(2.0 * cfg.kappa - 1.0))


def cmrr_measured(m: CmrrMeasurement) -> float:
    if m.s_d == 0.0:
        raise ValueError("no differential reference signal (s_d == 0)")
    if m.s_cm == 0.0:
        return CMRR_MAX
    return _clamp_db(10.0 * math.log10(m.s_d / m.s_cm))


def rejection_factor(cmrr_db: float) -> float:
    """Fraction of a common-mode amplitude surviving rejection."""
    return 10.0 ** (-cmrr_db / 10.0)


@dataclass(frozen=True)
class DetectorModel:
    """LO power to output-variance model.

    Quantum variance grows linearly with LO power (gain ``g`` in V^2/W)
    until ``p_sat`` and is held constant above it. Classical variance is
    independent of LO power.
    """

    g: float
    sigma_c_sq: float
    p_sat: float
    sigma_floor: float = NOISE_FLOOR
    p_ref: float = REF_LO_POWER

    def __post_init__(self):
        if not (self.g > 0 and self.sigma_c_sq > 0 and self.p_sat > 0):
            raise ValueError("g, sigma_c_sq and p_sat must be positive")

    @classmethod
    def calibrated(
        cls,
        total_variance: float = REF_TOTAL_VARIANCE,
        snc_db: float = REF_SNC_DB,
        p_ref: float = REF_LO_POWER,
        p_sat: float | None = None,
        sigma_floor: float = NOISE_FLOOR,
    ) -> "DetectorModel":
        """Pin the model to a total variance and SNC at ``p_ref``."""
        ratio = 10.0 ** (snc_db / 10.0)
        sigma_c_sq = total_variance / (1.0 + ratio)
        g = (total_variance - sigma_c_sq) / p_ref
        return cls(
            g=g,
            sigma_c_sq=sigma_c_sq,
            p_sat=p_ref if p_sat is None else p_sat,
            sigma_floor=sigma_floor,
            p_ref=p_ref,
        )


@dataclass(frozen=True)
class DetectorVariances:
    sigma_q_sq: float
    sigma_c_sq: float
    sigma_total_sq: float
    snc_db: float


def detector_variances(lo_power: float, model: DetectorModel | None = None) -> DetectorVariances:
    if lo_power < 0:
        raise ValueError(f"lo_power must be nonnegative, got {lo_power}")
    model = model or DetectorModel.calibrated()
    sigma_q_sq = model.g * min(lo_power, model.p_sat)
    snc = -math.inf if sigma_q_sq == 0 else 10.0 * math.log10(sigma_q_sq / model.sigma_c_sq)
    return DetectorVariances(
        sigma_q_sq=sigma_q_sq,
        sigma_c_sq=model.sigma_c_sq,
        sigma_total_sq=sigma_q_sq + model.sigma_c_sq,
        snc_db=snc,
    )


def quantum_variance_from_snc(total_variance: float, snc_db: float) -> float:
    """Split a total variance into its quantum part given SNC in dB."""
    ratio = 10.0 ** (snc_db / 10.0)
    return total_variance * ratio / (1.0 + ratio)
