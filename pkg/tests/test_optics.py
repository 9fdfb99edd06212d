import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrng_homodyne.optics import (
    CMRR_MAX,
    CmrrMeasurement,
    DetectorModel,
    OpticalPath,
    SplitConfig,
    cmrr_measured,
    cmrr_path,
    cmrr_split,
    dbm_to_watts,
    detector_variances,
    phase_from_path_difference,
)

C = 2.99792458e8


class TestPhase:
    def test_zero_path(self):
        assert phase_from_path_difference(OpticalPath(0.0, 1e9)) == 0.0

    def test_one_ghz_25mm(self):
        expected = 2 * math.pi * 1e9 * 0.025 / C
        got = phase_from_path_difference(OpticalPath(0.025, 1e9))
        assert got == pytest.approx(0.5240, abs=1e-4)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_500khz_25mm(self):
        got = phase_from_path_difference(OpticalPath(0.025, 5e5))
        assert got == pytest.approx(2.620e-4, abs=1e-7)

    def test_sign_follows_delta_l(self):
        assert phase_from_path_difference(OpticalPath(-0.01, 1e9)) < 0

    @pytest.mark.parametrize("kw", [{"n_eff": 0.0}, {"n_eff": -1.0}])
    def test_invalid_index(self, kw):
        with pytest.raises(ValueError):
            OpticalPath(0.0, 1e9, **kw)

    def test_negative_frequency(self):
        with pytest.raises(ValueError):
            OpticalPath(0.0, -1.0)


class TestCmrrPath:
    def test_pi_is_zero_db(self):
        assert cmrr_path(math.pi) == pytest.approx(0.0, abs=1e-12)

    def test_zero_phase_clamps(self):
        assert cmrr_path(0.0) == CMRR_MAX

    def test_hand_value(self):
        assert cmrr_path(0.5236) == pytest.approx(-10 * math.log10(math.sin(0.2618)), abs=1e-4)
        assert cmrr_path(0.5236) == pytest.approx(5.87, abs=0.01)

    @given(st.floats(-20, 20, allow_nan=False))
    def test_even_and_periodic(self, phi):
        assert cmrr_path(phi) == pytest.approx(cmrr_path(-phi), abs=1e-9)
        a, b = cmrr_path(phi), cmrr_path(phi + 2 * math.pi)
        if a < 100:  # far from the clamp, rounding in sin is negligible
            assert a == pytest.approx(b, abs=1e-6)

    @given(st.floats(-50, 50, allow_nan=False))
    def test_range(self, phi):
        assert 0.0 <= cmrr_path(phi) <= CMRR_MAX


class TestCmrrSplit:
    def test_all_power_one_arm(self):
        assert cmrr_split(SplitConfig(1.0)) == 0.0

    def test_perfect_split_clamps(self):
        assert cmrr_split(SplitConfig(0.5)) == CMRR_MAX

    def test_three_quarters(self):
        assert cmrr_split(SplitConfig(0.75)) == pytest.approx(3.0103, abs=1e-3)

    # dyadic kappa keeps 1 - kappa exact in floating point
    @given(st.integers(0, 2**20).map(lambda i: i / 2**20))
    def test_symmetric(self, k):
        assert cmrr_split(SplitConfig(k)) == cmrr_split(SplitConfig(1 - k))

    @given(st.floats(0.0, 0.49), st.floats(0.0, 0.49))
    def test_decreasing_in_imbalance(self, a, b):
        lo, hi = sorted((a, b))
        # larger |kappa - 0.5| means weaker rejection
        assert cmrr_split(SplitConfig(0.5 + hi)) <= cmrr_split(SplitConfig(0.5 + lo))

    def test_invalid(self):
        with pytest.raises(ValueError):
            SplitConfig(1.2)

    def test_transmission_derived(self):
        assert SplitConfig(0.3).transmission == pytest.approx(0.7)


class TestCmrrMeasured:
    def test_equal_levels(self):
        assert cmrr_measured(CmrrMeasurement(2.0, 2.0)) == 0.0

    def test_perfect_rejection(self):
        assert cmrr_measured(CmrrMeasurement(2.0, 0.0)) == CMRR_MAX

    def test_doubling_step(self):
        m = CmrrMeasurement.from_single_arm(1.0, 0.001)
        assert cmrr_measured(m) == pytest.approx(10 * math.log10(2000), abs=1e-9)
        assert cmrr_measured(m) == pytest.approx(33.01, abs=0.01)

    def test_no_reference(self):
        with pytest.raises(ValueError):
            cmrr_measured(CmrrMeasurement(0.0, 1.0))


class TestDetector:
    def test_calibration_reproduces_reference(self):
        det = DetectorModel.calibrated()
        dv = detector_variances(det.p_ref, det)
        assert dv.sigma_total_sq == pytest.approx(995e-6, rel=1e-12)
        assert dv.snc_db == pytest.approx(25.6, abs=1e-9)

    def test_no_lo(self):
        det = DetectorModel.calibrated()
        dv = detector_variances(0.0, det)
        assert dv.sigma_q_sq == 0.0
        assert dv.sigma_total_sq == det.sigma_c_sq
        assert dv.snc_db == -math.inf

    def test_decade_below(self):
        det = DetectorModel.calibrated()
        assert detector_variances(det.p_ref / 10, det).snc_db == pytest.approx(15.6, abs=0.01)

    def test_clamped_above_saturation(self):
        det = DetectorModel.calibrated()
        a = detector_variances(det.p_sat, det).sigma_q_sq
        assert detector_variances(10 * det.p_sat, det).sigma_q_sq == a

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, a, b):
        det = DetectorModel.calibrated()
        lo, hi = sorted((a, b))
        assert detector_variances(lo, det).sigma_q_sq <= detector_variances(hi, det).sigma_q_sq

    def test_negative_power(self):
        with pytest.raises(ValueError):
            detector_variances(-1.0)

    def test_dbm(self):
        assert dbm_to_watts(20) == pytest.approx(0.1)
        assert dbm_to_watts(0) == pytest.approx(1e-3)
