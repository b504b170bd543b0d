"""
Named threshold selectors for the simulation study.

Plain selectors are functions ``SortedSample -> SelectionResult``. Some selectors depend on the
study they run in (the oracle fraction, or the true second order parameter of the simulated
distribution); these are registered as factories that receive a :class:`SelectorContext`.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Protocol

from tailcut.errors import DuplicateName, UnknownName
from tailcut.estimators.core import SelectionResult, SortedSample, trace
from tailcut.estimators.ihs import ihs_selector
from tailcut.estimators.samsee import samsee_selector
from tailcut.simulation.distributions import DistributionSpec

LOG = logging.getLogger(__name__)

MIN_BASELINE_N = 10


class Selector(Protocol):
    def __call__(self, sample: SortedSample) -> SelectionResult: ...


@dataclass(frozen=True)
class SelectorContext:
    spec: DistributionSpec
    n: int
    k_opt: Optional[int] = None


SelectorFactory = Callable[[SelectorContext], Selector]


def ten_percent(n: int) -> int:
    if n < MIN_BASELINE_N:
        raise ValueError(f"rule of thumb needs n >= {MIN_BASELINE_N}")
    return n // 10


def sqrt_n(n: int) -> int:
    if n < MIN_BASELINE_N:
        raise ValueError(f"rule of thumb needs n >= {MIN_BASELINE_N}")
    return math.isqrt(n)


def fixed_k_selector(rule: Callable[[int], int], method: str) -> Selector:
    """A selector that ignores the data beyond its size."""

    def _select(sample: SortedSample) -> SelectionResult:
        return SelectionResult.at(sample, trace(sample), rule(sample.n), method=method)

    return _select


def _oracle_factory(context: SelectorContext) -> Selector:
    if context.k_opt is None:
        raise ValueError("the kopt selector needs the empirical optimal fraction of the study")
    k_opt = context.k_opt
    return fixed_k_selector(lambda n: k_opt, "kopt")


def _samsee_true_rho_factory(context: SelectorContext) -> Selector:
    rho = context.spec.true_rho
    if rho is None or rho >= 0:
        LOG.debug(f"{context.spec.name} has no negative second order parameter, using rho=-1")
        rho = None
    return samsee_selector(rho=rho)


class SelectorRegistry:
    def __init__(self):
        self._plain: dict[str, Selector] = {}
        self._contextual: dict[str, SelectorFactory] = {}

    def _check_free(self, name: str):
        if name in self._plain or name in self._contextual:
            raise DuplicateName(name)

    def register(self, name: str, fn: Selector) -> None:
        self._check_free(name)
        self._plain[name] = fn

    def register_contextual(self, name: str, factory: SelectorFactory) -> None:
        self._check_free(name)
        self._contextual[name] = factory

    def unregister(self, name: str) -> None:
        if self._plain.pop(name, None) is None and self._contextual.pop(name, None) is None:
            raise UnknownName(name, kind="selector")

    def names(self) -> list[str]:
        return sorted([*self._plain, *self._contextual])

    def __contains__(self, name: str) -> bool:
        return name in self._plain or name in self._contextual

    def resolve(self, name: str, context: SelectorContext) -> Selector:
        if name in self._plain:
            return self._plain[name]
        if name in self._contextual:
            return self._contextual[name](context)
        raise UnknownName(name, kind="selector")


def builtin_registry() -> SelectorRegistry:
    registry = SelectorRegistry()
    registry.register("samsee", samsee_selector())
    registry.register("ihs", ihs_selector())
    registry.register("sihs", ihs_selector(smoothed=True))
    registry.register("tenpct", fixed_k_selector(ten_percent, "tenpct"))
    registry.register("sqrtn", fixed_k_selector(sqrt_n, "sqrtn"))
    registry.register_contextual("samsee-true-rho", _samsee_true_rho_factory)
    registry.register_contextual("kopt", _oracle_factory)
    return registry


REGISTRY = builtin_registry()


def register_selector(name: str, fn: Selector, registry: Optional[SelectorRegistry] = None) -> None:
    (registry or REGISTRY).register(name, fn)
