import numpy as np
import pytest

from tailcut.errors import EmptyWindow, InvalidSample, OutOfRange
from tailcut.estimators.core import SortedSample, hill
from tailcut.simulation.distributions import SeedSpec
from tailcut.varying import (
    FIT_COLUMNS,
    TimedSample,
    default_global_k,
    evaluation_grid,
    fig6_experiment,
    fit_curve,
    gamma_adaptive,
    gamma_global_k,
    ingest_losses,
    linear_gamma,
    synthetic_fig6,
    window_indices,
)


@pytest.fixture
def pareto_series(pareto_values):
    return TimedSample.equally_spaced(pareto_values(0.5, 2000, seed=4))


class TestWindows:
    @pytest.mark.parametrize(
        "n,s,h,first,last", [(100, 0.5, 0.05, 45, 55), (100, 0.05, 0.05, 1, 10), (1000, 0.3, 0.1, 200, 400)]
    )
    def test_window_indices(self, n, s, h, first, last):
        indices = window_indices(n, s, h)
        assert indices[0] == first and indices[-1] == last
        assert indices.size == last - first + 1

    @pytest.mark.parametrize("s,h", [(0.01, 0.05), (0.99, 0.05), (0.5, 0.0), (0.5, 0.5)])
    def test_out_of_range(self, s, h):
        with pytest.raises(OutOfRange):
            window_indices(100, s, h)

    def test_timed_window_matches_indices(self, pareto_series):
        mask = pareto_series.window_mask(0.5, 0.1)
        np.testing.assert_array_equal(np.flatnonzero(mask) + 1, window_indices(2000, 0.5, 0.1))

    def test_evaluation_grid(self):
        np.testing.assert_allclose(evaluation_grid(0.1, 5), [0.1, 0.3, 0.5, 0.7, 0.9])
        np.testing.assert_allclose(evaluation_grid(0.2, 1), [0.5])
        with pytest.raises(ValueError):
            evaluation_grid(0.1, 0)


class TestTimedSample:
    def test_from_pairs(self):
        ts = TimedSample.from_pairs([30.0, 10.0, 20.0], [3.0, 1.0, 2.0])
        np.testing.assert_allclose(ts.s, [0.0, 0.5, 1.0])
        np.testing.assert_array_equal(ts.values, [1.0, 2.0, 3.0])
        assert ts.n == 3

    @pytest.mark.parametrize("times", [[1.0], [5.0, 5.0, 5.0]])
    def test_degenerate_times(self, times):
        with pytest.raises(InvalidSample):
            TimedSample.from_pairs(times, np.ones(len(times)))

    def test_shape_mismatch(self):
        with pytest.raises(InvalidSample):
            TimedSample(s=np.array([0.0, 1.0]), values=np.array([1.0]))

    def test_ingest(self, tmp_path):
        path = tmp_path / "losses.csv"
        path.write_text(
            "date,loss\n2021-03-01,10\n2021-01-01,5\n2021-02-01T00:00:00,7\n", encoding="utf-8"
        )
        ts = ingest_losses(path)
        assert ts.s[0] == 0.0 and ts.s[-1] == 1.0
        np.testing.assert_array_equal(ts.values, [5.0, 7.0, 10.0])


class TestGlobalK:
    def test_matches_window_hill(self, pareto_series):
        window = SortedSample.from_values(pareto_series.window(0.5, 0.25))
        assert gamma_global_k(pareto_series, 0.5, 0.25, 100) == pytest.approx(hill(window, 50))

    def test_full_window(self, pareto_series):
        window = SortedSample.from_values(pareto_series.window(0.5, 0.25))
        j = window.n - 1
        k = j / 0.5
        assert gamma_global_k(pareto_series, 0.5, 0.25, int(k)) == pytest.approx(
            hill(window, j), rel=1e-9
        )

    def test_constant_data(self):
        ts = TimedSample.equally_spaced(np.full(200, 5.0))
        assert gamma_global_k(ts, 0.5, 0.1, 50) == 0.0

    def test_scale_invariance(self, pareto_series):
        scaled = TimedSample(pareto_series.s, pareto_series.values * 3.0)
        assert gamma_global_k(scaled, 0.4, 0.1, 200) == pytest.approx(
            gamma_global_k(pareto_series, 0.4, 0.1, 200)
        )

    def test_zero_fraction(self, pareto_series):
        with pytest.raises(OutOfRange):
            gamma_global_k(pareto_series, 0.5, 0.1, 2)

    def test_fraction_beyond_window(self, pareto_series):
        with pytest.raises(OutOfRange):
            gamma_global_k(pareto_series, 0.5, 0.1, 5000)

    def test_empty_window(self):
        ts = TimedSample.equally_spaced(np.arange(1.0, 51.0))
        with pytest.raises(EmptyWindow) as ctx:
            gamma_global_k(ts, 0.5, 0.1, 20)
        assert ctx.value.required == 20


class TestAdaptive:
    @pytest.mark.parametrize("selector", ["samsee", "sihs", "adaptive_samsee"])
    def test_pareto_window(self, pareto_series, selector):
        gamma_hat, k_hat = gamma_adaptive(pareto_series, 0.5, 0.2, selector)
        assert gamma_hat == pytest.approx(0.5, abs=0.2)
        assert 2 <= k_hat < pareto_series.window(0.5, 0.2).size

    def test_deterministic(self, pareto_series):
        assert gamma_adaptive(pareto_series, 0.5, 0.2) == gamma_adaptive(pareto_series, 0.5, 0.2)

    def test_unknown_method(self, pareto_series):
        with pytest.raises(ValueError):
            gamma_adaptive(pareto_series, 0.5, 0.2, "bootstrap")


class TestFitCurve:
    def test_global_k(self, pareto_series):
        fit = fit_curve(pareto_series, 0.2, 4, "global_k", global_k=100, threads=2)
        assert fit.s_grid.size == 4
        assert np.all(np.isfinite(fit.gamma_hat))
        assert np.all(fit.k_hat == 40)
        assert not fit.flagged
        frame = fit.to_frame()
        assert list(frame.columns) == FIT_COLUMNS
        assert set(frame["method"]) == {"global_k"}

    def test_adaptive(self, pareto_series):
        fit = fit_curve(pareto_series, 0.2, 3, "adaptive_sihs", threads=1)
        assert np.all(np.isfinite(fit.gamma_hat))
        assert np.all(fit.window_size >= 799)

    def test_flagged_points(self):
        ts = TimedSample.equally_spaced(np.arange(1.0, 101.0))
        fit = fit_curve(ts, 0.05, 3, "adaptive_samsee")
        assert set(fit.flagged) == {0, 1, 2}
        assert fit.flagged[0].startswith("EmptyWindow")
        assert np.all(np.isnan(fit.gamma_hat))

    def test_invalid(self, pareto_series):
        with pytest.raises(ValueError):
            fit_curve(pareto_series, 0.2, 3, "kernel")
        with pytest.raises(ValueError):
            fit_curve(pareto_series, 0.2, 3, "global_k")


class TestSynthetic:
    def test_reproducible(self):
        first = synthetic_fig6(500, SeedSpec(1))
        second = synthetic_fig6(500, SeedSpec(1))
        np.testing.assert_array_equal(first.values, second.values)
        other = synthetic_fig6(500, SeedSpec(1), replicate=1)
        assert not np.array_equal(first.values, other.values)
        np.testing.assert_allclose(first.s[[0, -1]], [1 / 500, 1.0])

    def test_linear_gamma(self):
        np.testing.assert_allclose(linear_gamma([0.0, 0.5, 1.0]), [1.0, 1.5, 2.0])
        assert default_global_k(5000) == 250

    def test_experiment(self):
        result = fig6_experiment(n=1000, h=0.2, grid_size=3, reps=3, seed=SeedSpec(5), threads=2)
        assert set(result.bands) == {"global_k", "adaptive_samsee"}
        band = result.bands["global_k"]
        assert band.mean.shape == (3,)
        assert np.all(band.lower <= band.upper)
        assert np.isfinite(result.band_width_ratio())
        frame = result.to_frame()
        assert len(frame) == 6
        assert list(frame.columns) == FIT_COLUMNS + ["lower", "upper", "true_gamma"]
        np.testing.assert_allclose(frame["true_gamma"][:3], [1.2, 1.5, 1.8])

    def test_experiment_needs_seed(self):
        with pytest.raises(ValueError):
            fig6_experiment(n=100, reps=1)


@pytest.mark.montecarlo
class TestFig6:
    def test_adaptive_band_is_narrower(self):
        result = fig6_experiment(seed=SeedSpec(20190101))
        assert result.band_width_ratio("adaptive_samsee") < 1
        assert result.mean_absolute_deviation("adaptive_samsee") <= 0.15
