import math

import numpy as np
import pytest
from scipy import stats

from tailcut.errors import UnknownName
from tailcut.simulation.distributions import (
    DEFAULT_SEED,
    SeedSpec,
    catalog,
    frechet,
    frechet_variates,
    lookup,
    neg_bias_transform,
    pareto,
    sample,
    sorted_batch,
    survival,
    true_quantile,
)


class TestSeedSpec:
    def test_reproducible(self):
        first = SeedSpec(DEFAULT_SEED).generator(0, 3).random(5)
        second = SeedSpec(DEFAULT_SEED).generator(0, 3).random(5)
        np.testing.assert_array_equal(first, second)

    def test_streams_differ(self):
        seed = SeedSpec(DEFAULT_SEED)
        assert not np.array_equal(seed.generator(0, 1).random(5), seed.generator(0, 2).random(5))
        assert not np.array_equal(
            seed.generator(0).random(5), seed.child(1).generator(0).random(5)
        )

    def test_negative(self):
        with pytest.raises(ValueError):
            SeedSpec(-1)


class TestCatalog:
    @pytest.mark.parametrize(
        "name,gamma,rho",
        [
            ("t6", 1 / 6, -1 / 3),
            ("frechet2", 0.5, -1.0),
            ("cauchy", 1.0, -2.0),
            ("loggamma", 1.0, 0.0),
            ("burr21", 2.0, -1.0),
            ("negbias", 1.0, -1.0),
        ],
    )
    def test_entries(self, name, gamma, rho):
        spec = lookup(name)
        assert spec.true_gamma == pytest.approx(gamma)
        assert spec.true_rho == pytest.approx(rho)
        assert spec in catalog()

    @pytest.mark.parametrize("alias,name", [("student_t6_abs", "t6"), ("Burr", "burr21")])
    def test_aliases(self, alias, name):
        assert lookup(alias).name == name

    def test_parametric(self):
        assert lookup("pareto(0.5)") == pareto(0.5)
        assert lookup("frechet(4)").true_gamma == 0.25

    def test_unknown(self):
        with pytest.raises(UnknownName) as ctx:
            lookup("gumbel")
        ctx.match("unknown distribution 'gumbel'")

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            pareto(0.0)
        with pytest.raises(ValueError):
            frechet(-1.0)


class TestQuantiles:
    def test_frechet(self):
        assert true_quantile(lookup("frechet2"), 0.001) == pytest.approx(
            (-math.log(0.999)) ** -0.5
        )

    def test_burr(self):
        assert true_quantile(lookup("burr21"), 0.001) == pytest.approx(998001.0)

    def test_cauchy(self):
        assert true_quantile(lookup("cauchy"), 0.001) == pytest.approx(
            stats.cauchy.isf(0.0005), rel=1e-9
        )

    def test_t6(self):
        assert true_quantile(lookup("t6"), 0.01) == pytest.approx(stats.t.isf(0.005, 6))

    @pytest.mark.parametrize("name", ["loggamma", "negbias", "t6", "burr21", "frechet2"])
    @pytest.mark.parametrize("p", [0.1, 0.001, 1e-6])
    def test_survival_inverts_quantile(self, name, p):
        spec = lookup(name)
        assert survival(spec, true_quantile(spec, p)) == pytest.approx(p, rel=1e-8)

    def test_loggamma_survival(self):
        spec = lookup("loggamma")
        assert survival(spec, math.e) == pytest.approx(2 / math.e)
        assert survival(spec, 0.5) == 1.0

    def test_neg_bias_survival(self):
        spec = lookup("negbias")
        assert survival(spec, 2.0) == 1.0
        u = np.array([0.01, 0.9])
        x = neg_bias_transform(u)
        assert x[0] == pytest.approx(1 / (0.01 * math.log(100)))
        # both preimages of x count towards the tail
        assert survival(spec, x[0]) > 0.01

    @pytest.mark.parametrize("p", [0.0, 0.5, 0.7])
    def test_invalid_probability(self, p):
        with pytest.raises(ValueError):
            true_quantile(lookup("frechet2"), p)


class TestSampling:
    def test_sample_sorted(self):
        drawn = sample(lookup("frechet2"), 100, SeedSpec(3), 0, 1)
        assert drawn.n == 100
        assert np.all(np.diff(drawn.values) >= 0)

    def test_sample_reproducible(self):
        spec = lookup("cauchy")
        first = sample(spec, 50, SeedSpec(3), 0, 7)
        second = sample(spec, 50, SeedSpec(3), 0, 7)
        np.testing.assert_array_equal(first.values, second.values)

    def test_sorted_batch(self):
        batch = sorted_batch(lookup("burr21"), 4, 25, SeedSpec(1).generator())
        assert batch.shape == (4, 25)
        assert np.all(np.diff(batch, axis=1) >= 0)

    def test_frechet_variates(self):
        assert frechet_variates(2.0, np.array([math.exp(-1)]))[0] == pytest.approx(1.0)
        values = frechet_variates(np.array([1.0, 2.0]), np.array([math.exp(-4), math.exp(-4)]))
        np.testing.assert_allclose(values, [0.25, 0.5])

    @pytest.mark.parametrize("name", ["t6", "frechet2", "cauchy", "loggamma", "burr21", "negbias"])
    def test_draws_follow_survival(self, name):
        spec = lookup(name)
        values = spec.draw(20_000, SeedSpec(DEFAULT_SEED).generator(42))
        threshold = true_quantile(spec, 0.1)
        # binomial(20000, 0.1) has standard deviation ~42
        assert abs(np.count_nonzero(values > threshold) - 2000) < 250

    def test_unknown_family(self):
        spec = pareto(1.0)
        broken = type(spec)("x", "weibull", 1.0, None)
        with pytest.raises(UnknownName):
            broken.draw(5, SeedSpec(1).generator())
        with pytest.raises(UnknownName):
            survival(broken, 1.0)
