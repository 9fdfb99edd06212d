import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from qrng_homodyne.stats import (
    CORE_TESTS,
    NotApplicable,
    _cusum_pvalue,
    block_frequency,
    cumulative_sums,
    fisher_combine,
    frequency_monobit,
    run_core_suite,
    runs_test,
)

from .reference_pvalues import COMPOSITES, P_PVALUES, X_PVALUES, Z_PVALUES


def bits_of(text):
    return np.array([int(c) for c in text], dtype=np.uint8)


def exact_walk_exceed(n, z):
    """P(max_k |S_k| >= z) for a fair +-1 walk, by exact dynamic programming."""
    # states -(z-1)..(z-1); mass leaving the band is absorbed
    width = 2 * z - 1
    p = np.zeros(width)
    p[z - 1] = 1.0
    for _ in range(n):
        q = np.zeros(width)
        q[1:] += 0.5 * p[:-1]
        q[:-1] += 0.5 * p[1:]
        p = q
    return 1.0 - p.sum()


class TestMonobit:
    def test_worked_example(self):
        with pytest.warns(UserWarning):
            assert frequency_monobit(bits_of("1011010101")) == pytest.approx(0.527089, abs=1e-6)

    def test_sixty_of_hundred(self):
        x = np.r_[np.ones(60), np.zeros(40)]
        assert frequency_monobit(x) == pytest.approx(math.erfc(2 / math.sqrt(2)), abs=1e-12)
        assert frequency_monobit(x) == pytest.approx(0.0455, abs=1e-4)

    def test_balanced(self):
        assert frequency_monobit(np.tile([0, 1], 500)) == 1.0

    def test_all_ones(self):
        assert frequency_monobit(np.ones(10_000)) < 1e-10

    def test_complement_invariant(self, rng):
        x = rng.integers(0, 2, 1000)
        assert frequency_monobit(x) == frequency_monobit(1 - x)


class TestBlockFrequency:
    def test_worked_example(self):
        assert block_frequency(bits_of("0110011010"), 3) == pytest.approx(0.801252, abs=1e-6)

    def test_halves(self):
        # two blocks of 5, chi^2 = 4*5*2*(0.5)^2 = 10
        assert block_frequency(bits_of("1111100000"), 5) == pytest.approx(math.exp(-5), abs=1e-12)

    def test_no_full_block(self):
        with pytest.raises(ValueError):
            block_frequency(np.ones(100), 128)


class TestRuns:
    def test_worked_example(self):
        assert runs_test(bits_of("1001101011")) == pytest.approx(0.147232, abs=1e-6)

    def test_alternating(self):
        x = bits_of("0101010101")  # ratio sqrt(n/2) = sqrt(5)
        assert runs_test(x) == pytest.approx(math.erfc(math.sqrt(5)), abs=1e-12)
        assert runs_test(x) == pytest.approx(1.6e-3, abs=1e-4)

    def test_pretest_fails(self):
        result = runs_test(np.r_[np.ones(80), np.zeros(20)])
        assert result is NotApplicable and not result

    def test_long_runs_fail(self):
        x = np.repeat(np.tile([0, 1], 50), 20)
        assert runs_test(x) < 0.01


class TestCusum:
    def test_worked_example(self):
        with pytest.warns(UserWarning):
            assert cumulative_sums(bits_of("1011010111"), "forward") == pytest.approx(0.4116588, abs=1e-6)

    @pytest.mark.parametrize("n,z", [(100, 10), (400, 30), (1000, 50), (1000, 80)])
    def test_against_exact_walk(self, n, z):
        assert _cusum_pvalue(n, z) == pytest.approx(exact_walk_exceed(n, z), abs=0.02)

    def test_exact_oracle_frozen(self):
        # frozen from the dynamic-programming oracle above
        assert exact_walk_exceed(100, 10) == pytest.approx(0.63366, abs=5e-4)

    def test_reverse_of_reversed(self, rng):
        x = rng.integers(0, 2, 2000)
        assert cumulative_sums(x, "reverse") == cumulative_sums(x[::-1], "forward")

    def test_constant_fails(self):
        assert cumulative_sums(np.ones(1000)) < 1e-10

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            cumulative_sums(np.ones(200), "sideways")


class TestFisher:
    def test_two_halves(self):
        x = -4 * math.log(0.5)
        assert fisher_combine([0.5, 0.5]) == pytest.approx(math.exp(-x / 2) * (1 + x / 2), abs=1e-12)
        assert fisher_combine([0.5, 0.5]) == pytest.approx(0.5966, abs=1e-4)

    def test_single_is_identity(self):
        assert fisher_combine([0.37]) == pytest.approx(0.37, abs=1e-12)

    @pytest.mark.parametrize(
        "values,key", [(X_PVALUES, "X"), (P_PVALUES, "P"), (Z_PVALUES, "Z")]
    )
    def test_reference_composites(self, values, key):
        assert len(values) == 41
        assert fisher_combine(values) == pytest.approx(COMPOSITES[key], abs=1e-9)

    def test_zero_floored(self):
        with pytest.warns(UserWarning):
            assert fisher_combine([0.0, 0.5]) < 1e-290

    @pytest.mark.parametrize("bad", [[], [1.5], [-0.1], [float("nan")]])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            fisher_combine(bad)

    @given(st.lists(st.floats(1e-6, 1.0), min_size=2, max_size=20), st.randoms())
    def test_permutation_invariant(self, values, r):
        shuffled = list(values)
        r.shuffle(shuffled)
        assert fisher_combine(shuffled) == pytest.approx(fisher_combine(values), rel=1e-9)

    @given(st.lists(st.floats(1e-6, 0.5), min_size=1, max_size=10), st.integers(0, 9))
    def test_monotone(self, values, i):
        i %= len(values)
        raised = list(values)
        raised[i] *= 2
        assert fisher_combine(raised) >= fisher_combine(values)


class TestUniformity:
    @pytest.mark.parametrize("name,fn", CORE_TESTS)
    def test_pvalues_uniform_under_null(self, name, fn):
        rng = np.random.default_rng(404)
        ps = []
        for _ in range(200):
            p = fn(rng.integers(0, 2, 20_000, dtype=np.uint8))
            if p is not NotApplicable:
                ps.append(p)
        # discrete statistics make p-values lumpy; a loose KS bound still catches bias
        assert sps.kstest(ps, "uniform").pvalue > 1e-3


class TestSuite:
    def test_structure(self, rng):
        report = run_core_suite(rng.integers(0, 2, 100_000))
        assert [r.test_name for r in report.results] == [n for n, _ in CORE_TESTS]
        d = report.to_dict()
        assert set(d) == {"alpha", "results", "not_applicable", "fisher_p", "passed"}
        assert report.passed

    def test_all_zero_fails(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = run_core_suite(np.zeros(10_000))
        assert not report.passed
        assert report.not_applicable == ["runs"]
        assert report.fisher_p < 0.01

    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_error_recorded_not_raised(self):
        report = run_core_suite(np.ones(50, dtype=np.uint8))  # shorter than one block
        errs = [r for r in report.results if r.error]
        assert [r.test_name for r in errs] == ["block_frequency"]
        assert not report.passed

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_fisher_matches_results(self, seed):
        report = run_core_suite(np.random.default_rng(seed).integers(0, 2, 5000))
        usable = [r.p_value for r in report.results if r.error is None]
        assert report.fisher_p == pytest.approx(fisher_combine(usable))
