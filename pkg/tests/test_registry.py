import pytest

from tailcut.errors import DuplicateName, UnknownName
from tailcut.estimators.core import SelectionResult, trace
from tailcut.simulation.distributions import lookup, pareto
from tailcut.simulation.registry import (
    REGISTRY,
    SelectorContext,
    SelectorRegistry,
    builtin_registry,
    fixed_k_selector,
    register_selector,
    sqrt_n,
    ten_percent,
)


def _fixed_ten(sample):
    return SelectionResult.at(sample, trace(sample), 10, method="ten")


class TestRules:
    @pytest.mark.parametrize("n,expected", [(10, 1), (500, 50), (10_000, 1000), (999, 99)])
    def test_ten_percent(self, n, expected):
        assert ten_percent(n) == expected

    @pytest.mark.parametrize("n,expected", [(10, 3), (500, 22), (10_000, 100)])
    def test_sqrt_n(self, n, expected):
        assert sqrt_n(n) == expected

    @pytest.mark.parametrize("rule", [ten_percent, sqrt_n])
    def test_too_small(self, rule):
        with pytest.raises(ValueError):
            rule(9)

    def test_fixed_k_selector(self, pareto_sample):
        result = fixed_k_selector(ten_percent, "tenpct")(pareto_sample)
        assert result.k_hat == 200
        assert result.method == "tenpct"


class TestRegistry:
    def test_builtin_names(self):
        assert REGISTRY.names() == sorted(
            ["samsee", "samsee-true-rho", "ihs", "sihs", "tenpct", "sqrtn", "kopt"]
        )

    def test_register_and_resolve(self, pareto_sample):
        registry = SelectorRegistry()
        register_selector("ten", _fixed_ten, registry=registry)
        assert "ten" in registry
        selector = registry.resolve("ten", SelectorContext(pareto(1.0), pareto_sample.n))
        assert selector(pareto_sample).k_hat == 10

    def test_duplicate(self):
        registry = builtin_registry()
        with pytest.raises(DuplicateName) as ctx:
            registry.register("samsee", _fixed_ten)
        ctx.match("already registered")
        with pytest.raises(DuplicateName):
            registry.register_contextual("kopt", lambda context: _fixed_ten)

    def test_unregister(self):
        registry = builtin_registry()
        registry.unregister("kopt")
        registry.unregister("ihs")
        assert "kopt" not in registry and "ihs" not in registry
        with pytest.raises(UnknownName):
            registry.unregister("ihs")

    def test_unknown(self):
        with pytest.raises(UnknownName) as ctx:
            REGISTRY.resolve("hill-plot", SelectorContext(pareto(1.0), 100))
        ctx.match("unknown selector")

    def test_kopt_needs_context(self, pareto_sample):
        context = SelectorContext(pareto(1.0), pareto_sample.n, k_opt=123)
        assert REGISTRY.resolve("kopt", context)(pareto_sample).k_hat == 123
        with pytest.raises(ValueError):
            REGISTRY.resolve("kopt", SelectorContext(pareto(1.0), pareto_sample.n))

    @pytest.mark.parametrize("name,rho_used", [("cauchy", -2.0), ("loggamma", None)])
    def test_samsee_true_rho(self, pareto_sample, name, rho_used):
        selector = REGISTRY.resolve("samsee-true-rho", SelectorContext(lookup(name), 2000))
        result = selector(pareto_sample)
        assert result.diagnostics["rho_used"] == rho_used
