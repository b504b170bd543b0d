import numpy as np
import pytest

from tailcut.estimators.smoothing import default_span, local_linear, tricube


class TestTricube:
    @pytest.mark.parametrize(
        "u,expected", [(0.0, 1.0), (0.5, 0.669921875), (-0.5, 0.669921875), (1.0, 0.0), (2.0, 0.0)]
    )
    def test_values(self, u, expected):
        assert float(tricube(u)) == pytest.approx(expected)


class TestLocalLinear:
    @pytest.mark.parametrize("span", [1, 5, 15, 60])
    def test_reproduces_lines(self, span):
        x = np.arange(2, 102, dtype=float)
        y = 3 * x - 7
        np.testing.assert_allclose(local_linear(x, y, span), y, rtol=1e-9, atol=1e-9)

    def test_uneven_grid(self):
        x = np.cumsum(np.linspace(0.5, 2.0, 50))
        y = -0.25 * x + 1
        np.testing.assert_allclose(local_linear(x, y, 7), y, atol=1e-9)

    def test_smooths_noise(self):
        rng = np.random.default_rng(3)
        x = np.arange(500, dtype=float)
        y = np.sin(x / 80) + rng.normal(0, 0.3, x.size)
        fitted = local_linear(x, y, 40)
        assert np.std(fitted - np.sin(x / 80)) < 0.1

    def test_single_point(self):
        np.testing.assert_allclose(local_linear(np.array([4.0]), np.array([2.5]), 3), [2.5])

    def test_invalid(self):
        with pytest.raises(ValueError):
            local_linear(np.arange(5.0), np.arange(4.0), 2)
        with pytest.raises(ValueError):
            local_linear(np.arange(5.0), np.arange(5.0), 0)


@pytest.mark.parametrize("grid_size,expected", [(30, 15), (150, 15), (151, 16), (400, 40)])
def test_default_span(grid_size, expected):
    assert default_span(grid_size) == expected
