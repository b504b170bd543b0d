import math

import numpy as np
import pytest

from tailcut.errors import (
    DegenerateHill,
    InvalidSample,
    InvalidTailProbability,
    NonPositiveThreshold,
)
from tailcut.estimators.core import (
    SelectionResult,
    SortedSample,
    argmin_first,
    devries,
    hill,
    hill_matrix,
    jackknife,
    log_spacings,
    second_moment,
    trace,
    weissman_curve,
    weissman_quantile,
)

LOG2 = math.log(2)


class TestSortedSample:
    def test_from_values_sorts(self):
        sample = SortedSample.from_values([3.0, 1.0, 2.0])
        assert sample.values.tolist() == [1.0, 2.0, 3.0]
        assert sample.n == 3
        assert len(sample) == 3

    @pytest.mark.parametrize(
        "values,message",
        [
            ([1.0, 2.0], "at least 3"),
            ([1.0, math.inf, 2.0], "non-finite"),
            ([[1.0, 2.0], [3.0, 4.0]], "1-d"),
            ([0.0, 1.0, 2.0], "strictly positive"),
        ],
    )
    def test_invalid(self, values, message):
        with pytest.raises(InvalidSample) as ctx:
            SortedSample.from_values(values)
        ctx.match(message)

    def test_unsorted_constructor(self):
        with pytest.raises(InvalidSample) as ctx:
            SortedSample([3.0, 1.0, 2.0])
        ctx.match("sorted ascending")

    def test_accessors(self, powers_of_two):
        assert powers_of_two.threshold(2) == 4.0
        assert powers_of_two.top(2).tolist() == [16.0, 8.0]
        with pytest.raises(ValueError):
            powers_of_two.threshold(5)
        with pytest.raises(ValueError):
            powers_of_two.top(0)

    def test_values_are_read_only(self, powers_of_two):
        with pytest.raises(ValueError):
            powers_of_two.values[0] = 10.0


class TestPointwise:
    def test_log_spacings(self, powers_of_two):
        assert log_spacings(powers_of_two, 2) == pytest.approx([2 * LOG2, LOG2])

    def test_hill(self, powers_of_two):
        assert hill(powers_of_two, 1) == pytest.approx(LOG2)
        assert hill(powers_of_two, 2) == pytest.approx(1.5 * LOG2)
        assert hill(powers_of_two, 4) == pytest.approx(2.5 * LOG2)

    def test_second_moment_and_devries(self, powers_of_two):
        assert second_moment(powers_of_two, 2) == pytest.approx(2.5 * LOG2**2)
        assert devries(powers_of_two, 2) == pytest.approx(2.5 * LOG2**2 / (3 * LOG2))
        assert jackknife(powers_of_two, 2) == pytest.approx(
            2 * devries(powers_of_two, 2) - hill(powers_of_two, 2)
        )

    def test_devries_degenerate(self):
        sample = SortedSample([1.0, 1.0, 1.0, 1.0])
        with pytest.raises(DegenerateHill):
            devries(sample, 2)

    def test_non_positive_threshold(self):
        sample = SortedSample([-2.0, -1.0, 1.0, 2.0, 3.0])
        with pytest.raises(NonPositiveThreshold) as ctx:
            hill(sample, 3)
        assert ctx.value.k == 3
        assert ctx.value.threshold == -1.0

    def test_weissman_quantile(self, powers_of_two):
        expected = 4.0 * 4.0 ** (1.5 * LOG2)
        assert weissman_quantile(powers_of_two, 2, 0.1) == pytest.approx(expected)

    @pytest.mark.parametrize("p", [0.0, 0.4, 0.5, -0.1])
    def test_weissman_invalid_probability(self, powers_of_two, p):
        with pytest.raises(InvalidTailProbability) as ctx:
            weissman_quantile(powers_of_two, 2, p)
        ctx.match("0 < p < k/n")

    def test_scale_invariance(self, pareto_sample):
        scaled = pareto_sample.scaled(7.5)
        for k in (10, 100, 1000):
            assert hill(scaled, k) == pytest.approx(hill(pareto_sample, k))


class TestTrace:
    def test_matches_pointwise(self, pareto_sample):
        tail_trace = trace(pareto_sample)
        assert math.isnan(tail_trace.hill[0])
        for k in (1, 2, 17, 250, 1999):
            assert tail_trace.hill[k] == pytest.approx(hill(pareto_sample, k), rel=1e-10)
            assert tail_trace.m2[k] == pytest.approx(second_moment(pareto_sample, k), rel=1e-9)
            assert tail_trace.devries[k] == pytest.approx(devries(pareto_sample, k), rel=1e-9)
            assert tail_trace.gj[k] == pytest.approx(jackknife(pareto_sample, k), rel=1e-8)

    def test_undefined_entries(self):
        tail_trace = trace(SortedSample([-2.0, -1.0, 1.0, 2.0, 3.0]))
        assert tail_trace.hill[1] == pytest.approx(math.log(1.5))
        assert tail_trace.hill[2] == pytest.approx((math.log(3) + math.log(2)) / 2)
        assert np.isnan(tail_trace.hill[3]) and np.isnan(tail_trace.hill[4])
        assert tail_trace.k_max == 2
        assert tail_trace.defined_count() == 2
        assert tail_trace.defined(2)
        assert not tail_trace.defined(3)

    def test_fully_defined(self, pareto_sample):
        tail_trace = trace(pareto_sample)
        assert tail_trace.k_max == pareto_sample.n - 1
        assert tail_trace.ks[0] == 1 and tail_trace.ks[-1] == pareto_sample.n - 1

    def test_ties_give_zero_hill(self):
        tail_trace = trace(SortedSample([1.0, 5.0, 5.0, 5.0]))
        assert tail_trace.hill[1] == 0.0
        assert tail_trace.hill[2] == 0.0
        assert np.isnan(tail_trace.devries[1])

    def test_hill_matrix(self, pareto_values):
        rows = np.sort(
            np.vstack([pareto_values(0.5, 300, seed) for seed in range(3)]), axis=1
        )
        matrix = hill_matrix(rows)
        assert matrix.shape == (3, 300)
        for row, values in zip(matrix, rows):
            np.testing.assert_allclose(row, trace(SortedSample(values)).hill, rtol=1e-12)

    def test_hill_matrix_needs_2d(self):
        with pytest.raises(ValueError):
            hill_matrix(np.arange(1.0, 5.0))

    def test_weissman_curve(self, pareto_sample):
        tail_trace = trace(pareto_sample)
        curve = weissman_curve(pareto_sample, tail_trace, 0.001)
        assert np.all(np.isnan(curve[:3]))
        for k in (3, 50, 500):
            assert curve[k] == pytest.approx(weissman_quantile(pareto_sample, k, 0.001))


class TestArgminFirst:
    @pytest.mark.parametrize(
        "values,expected",
        [
            ([3.0, 1.0, 1.0, 2.0], 1),
            ([np.nan, 2.0, 1.0 + 1e-15, 1.0], 2),
            ([np.inf, np.nan, 5.0], 2),
            ([0.0, -0.0, 1.0], 0),
        ],
    )
    def test_first_minimum(self, values, expected):
        assert argmin_first(np.array(values)) == expected

    @pytest.mark.parametrize("values", [[], [np.nan, np.nan]])
    def test_no_finite_values(self, values):
        with pytest.raises(ValueError):
            argmin_first(np.array(values))


class TestSelectionResult:
    def test_at(self, pareto_sample):
        tail_trace = trace(pareto_sample)
        result = SelectionResult.at(pareto_sample, tail_trace, 100, method="manual")
        assert result.k_hat == 100
        assert result.threshold == pareto_sample.threshold(100)
        assert result.gamma_hat == pytest.approx(hill(pareto_sample, 100))
        assert result.quantile(pareto_sample, 0.001) == pytest.approx(
            weissman_quantile(pareto_sample, 100, 0.001)
        )
        as_dict = result.to_dict()
        assert as_dict["method"] == "manual"
        assert as_dict["diagnostics"]["k_grid"].size == 0

    def test_at_undefined(self):
        sample = SortedSample([-2.0, -1.0, 1.0, 2.0, 3.0])
        with pytest.raises(NonPositiveThreshold):
            SelectionResult.at(sample, trace(sample), 3, method="manual")
