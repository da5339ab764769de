"""Tests for Tukey's HSD test."""

import numpy as np
import pytest

from cogmap.atlas import studentized_range_quantile, studentized_range_sf, tukey_hsd
from cogmap.models.exceptions import AnalysisError


@pytest.mark.unit
class TestStudentizedRange:

    def test_critical_value_matches_table(self):
        assert studentized_range_quantile(0.05, 3, 6) == pytest.approx(4.34, abs=0.01)

    def test_tail_probability_at_critical_value(self):
        q = studentized_range_quantile(0.05, 4, 20)
        assert studentized_range_sf(q, 4, 20) == pytest.approx(0.05, abs=1e-4)

    def test_tail_is_monotone(self):
        assert studentized_range_sf(1.0, 3, 10) > studentized_range_sf(3.0, 3, 10) > 0.0

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_alpha_must_be_a_probability(self, alpha):
        with pytest.raises(AnalysisError):
            studentized_range_quantile(alpha, 3, 6)

    def test_needs_two_groups(self):
        with pytest.raises(AnalysisError):
            studentized_range_sf(2.0, 1, 6)


@pytest.mark.unit
class TestTukeyHsd:

    def test_separated_groups(self):
        result = tukey_hsd([[0.0, 0.1, -0.1, 0.05], [10.0, 10.1, 9.9, 10.05], [0.02, -0.05, 0.1, 0.0]])
        assert len(result.comparisons) == 3
        assert result.df == 9
        assert result.p_value(0, 1) < 0.001
        assert result.p_value(1, 2) < 0.001
        assert result.p_value(2, 0) > 0.05

    def test_mean_difference_sign(self):
        result = tukey_hsd([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        assert result.comparisons[0].mean_difference == pytest.approx(-3.0)
        assert result.mse == pytest.approx(1.0)

    def test_family_wise_error_is_controlled(self):
        rng = np.random.default_rng(7)
        rejections = 0
        replicates = 200
        for _ in range(replicates):
            result = tukey_hsd(rng.standard_normal((3, 5)))
            rejections += min(c.p_value for c in result.comparisons) < 0.05
        assert 0.01 <= rejections / replicates <= 0.10

    def test_unequal_group_sizes(self):
        result = tukey_hsd([[1.0, 2.0, 3.0, 2.5], [2.0, 3.0]])
        assert 0.0 <= result.p_value(0, 1) <= 1.0
        assert result.df == 4

    def test_too_few_groups(self):
        with pytest.raises(AnalysisError) as excinfo:
            tukey_hsd([[1.0, 2.0]])
        assert excinfo.value.error_code == "TOO_FEW_GROUPS"

    def test_too_few_samples(self):
        with pytest.raises(AnalysisError) as excinfo:
            tukey_hsd([[1.0, 2.0], [3.0]])
        assert excinfo.value.error_code == "TOO_FEW_SAMPLES"

    def test_non_finite(self):
        with pytest.raises(AnalysisError) as excinfo:
            tukey_hsd([[1.0, np.nan], [3.0, 4.0]])
        assert excinfo.value.error_code == "NON_FINITE"

    def test_zero_variance(self):
        with pytest.raises(AnalysisError) as excinfo:
            tukey_hsd([[1.0, 1.0], [2.0, 2.0]])
        assert excinfo.value.error_code == "DEGENERATE"
