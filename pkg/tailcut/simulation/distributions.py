"""
Seeded samplers and exact tail quantiles for the heavy-tailed study distributions.

Every sample is drawn from its own PCG64 stream derived from ``(base_seed, stream_index,
*substreams)`` through :class:`numpy.random.SeedSequence`, so a replicate is reproducible on
its own and independent of the order in which replicates are computed.
"""
import logging
import math
import re
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import optimize, stats

from tailcut.errors import ConvergenceFailure, UnknownName
from tailcut.estimators.core import SortedSample

LOG = logging.getLogger(__name__)

Size = Union[int, tuple[int, ...]]

DEFAULT_SEED = 20190101


@dataclass(frozen=True)
class SeedSpec:
    base_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.base_seed < 0 or self.stream_index < 0:
            raise ValueError("seed components must be non-negative integers")

    def sequence(self, *substreams: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            entropy=self.base_seed, spawn_key=(self.stream_index, *substreams)
        )

    def generator(self, *substreams: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.sequence(*substreams)))

    def child(self, stream_index: int) -> "SeedSpec":
        return SeedSpec(self.base_seed, stream_index)


@dataclass(frozen=True)
class DistributionSpec:
    name: str
    family: str
    true_gamma: float
    true_rho: Optional[float]
    parameter: Optional[float] = None

    def draw(self, size: Size, rng: np.random.Generator) -> np.ndarray:
        return draw(self, size, rng)

    def survival(self, x):
        return survival(self, x)

    def true_quantile(self, p: float) -> float:
        return true_quantile(self, p)


# samplers


def _uniform_open(rng: np.random.Generator, size: Size) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    u = rng.random(size)
    while np.any(u == 0):
        u = np.where(u == 0, rng.random(size), u)
    return u


def _draw_t6(spec: DistributionSpec, size: Size, rng: np.random.Generator) -> np.ndarray:
    return np.abs(rng.standard_t(6, size))


def _draw_cauchy(spec: DistributionSpec, size: Size, rng: np.random.Generator) -> np.ndarray:
    return np.abs(rng.standard_cauchy(size))


def _draw_frechet(spec: DistributionSpec, size: Size, rng: np.random.Generator) -> np.ndarray:
    return frechet_variates(spec.parameter, _uniform_open(rng, size))


def _draw_loggamma(spec: DistributionSpec, size: Size, rng: np.random.Generator) -> np.ndarray:
    return np.exp(rng.gamma(shape=2.0, scale=1.0, size=size))


def _draw_burr(spec: DistributionSpec, size: Size, rng: np.random.Generator) -> np.ndarray:
    u = _uniform_open(rng, size)
    return (u / (1 - u)) ** 2


def _draw_neg_bias(spec: DistributionSpec, size: Size, rng: np.random.Generator) -> np.ndarray:
    u = _uniform_open(rng, size)
    return neg_bias_transform(u)


def _draw_pareto(spec: DistributionSpec, size: Size, rng: np.random.Generator) -> np.ndarray:
    return _uniform_open(rng, size) ** (-spec.parameter)


def frechet_variates(alpha, u: np.ndarray) -> np.ndarray:
    """Inverse CDF of Frechet(alpha), F(x) = exp(-x^-alpha); ``alpha`` may vary per draw."""
    return (-np.log(u)) ** (-1.0 / np.asarray(alpha, dtype=float))


def neg_bias_transform(u: np.ndarray) -> np.ndarray:
    """g(u) = 1 / (u log(1/u)); both ends of (0, 1) are mapped to the upper tail."""
    u = np.asarray(u, dtype=float)
    return 1.0 / (u * -np.log(u))


_SAMPLERS: dict[str, Callable[[DistributionSpec, Size, np.random.Generator], np.ndarray]] = {
    "student_t6_abs": _draw_t6,
    "cauchy_abs": _draw_cauchy,
    "frechet": _draw_frechet,
    "loggamma": _draw_loggamma,
    "burr21": _draw_burr,
    "neg_bias": _draw_neg_bias,
    "pareto": _draw_pareto,
}


# survival functions


def _neg_bias_roots(t: float) -> tuple[float, float]:
    """
    The two solutions of u log(1/u) = 1/t for t > e, returned as ``(u1, 1 - u2)`` with
    u1 < 1/e < u2. Both are solved on a log scale so small tail masses keep full precision.
    """
    log_t = math.log(t)

    def lower_branch(a: float) -> float:
        # u1 = exp(a), a < -1
        return a + math.log(-a) + log_t

    def upper_branch(b: float) -> float:
        # 1 - u2 = exp(b)
        v = math.exp(b)
        return math.log((1 - v) * -math.log1p(-v)) + log_t

    rtol = 4 * np.finfo(float).eps
    a = optimize.brentq(lower_branch, -(2 * log_t + 10), -1.0, xtol=1e-14, rtol=rtol)
    b = optimize.brentq(upper_branch, -(log_t + 10), math.log1p(-math.exp(-1)), xtol=1e-14, rtol=rtol)
    return math.exp(a), math.exp(b)


def _neg_bias_survival(t: float) -> float:
    if t <= math.e:
        return 1.0
    u1, v = _neg_bias_roots(t)
    return u1 + v


def survival(spec: DistributionSpec, x):
    """P(X > x) for the family of ``spec``; vectorized over ``x``."""
    x = np.asarray(x, dtype=float)
    family = spec.family
    with np.errstate(divide="ignore", invalid="ignore"):
        if family == "student_t6_abs":
            value = np.where(x <= 0, 1.0, 2 * stats.t.sf(x, 6))
        elif family == "cauchy_abs":
            value = np.where(x <= 0, 1.0, 1 - 2 / math.pi * np.arctan(x))
        elif family == "frechet":
            value = np.where(x <= 0, 1.0, -np.expm1(-(x ** -spec.parameter)))
        elif family == "loggamma":
            value = np.where(x <= 1, 1.0, (np.log(x) + 1) / x)
        elif family == "burr21":
            value = np.where(x <= 0, 1.0, 1 / (1 + np.sqrt(x)))
        elif family == "pareto":
            value = np.where(x <= 1, 1.0, x ** (-1 / spec.parameter))
        elif family == "neg_bias":
            value = np.vectorize(_neg_bias_survival, otypes=[float])(x)
        else:
            raise UnknownName(family, kind="distribution family")
    return float(value) if value.ndim == 0 else value


def _root_quantile(spec: DistributionSpec, p: float, lower: float) -> float:
    """Solve log S(exp(y)) = log p on a logarithmic scale."""

    def objective(y: float) -> float:
        return math.log(survival(spec, math.exp(y))) - math.log(p)

    lo = math.log(lower) + 1e-9
    hi = max(lo + 1.0, -math.log(p))
    for _ in range(200):
        if objective(hi) < 0:
            break
        hi = 2 * hi + 1
    else:
        raise ConvergenceFailure(f"could not bracket the {1 - p} quantile of {spec.name}")
    try:
        y = optimize.brentq(objective, lo, hi, xtol=1e-13, rtol=1e-13, maxiter=500)
    except (RuntimeError, ValueError) as e:
        raise ConvergenceFailure(f"root finding for the {1 - p} quantile of {spec.name} failed: {e}")
    return math.exp(y)


def true_quantile(spec: DistributionSpec, p: float) -> float:
    """The (1-p)-quantile, in closed form where one exists."""
    if not 0 < p < 0.5:
        raise ValueError(f"tail probability must lie in (0, 1/2), got {p}")
    family = spec.family
    if family == "frechet":
        return float((-math.log1p(-p)) ** (-1 / spec.parameter))
    if family == "burr21":
        return ((1 - p) / p) ** 2
    if family == "cauchy_abs":
        return math.tan(math.pi * (1 - p) / 2)
    if family == "pareto":
        return p ** (-spec.parameter)
    if family == "student_t6_abs":
        return float(stats.t.isf(p / 2, 6))
    if family == "loggamma":
        return _root_quantile(spec, p, lower=1.0)
    if family == "neg_bias":
        return _root_quantile(spec, p, lower=math.e)
    raise UnknownName(family, kind="distribution family")


# catalog

_CATALOG = (
    DistributionSpec("t6", "student_t6_abs", 1 / 6, -1 / 3),
    DistributionSpec("frechet2", "frechet", 0.5, -1.0, parameter=2.0),
    DistributionSpec("cauchy", "cauchy_abs", 1.0, -2.0),
    DistributionSpec("loggamma", "loggamma", 1.0, 0.0),
    DistributionSpec("burr21", "burr21", 2.0, -1.0),
    DistributionSpec("negbias", "neg_bias", 1.0, -1.0),
)

_ALIASES = {
    "student_t6_abs": "t6",
    "cauchy_abs": "cauchy",
    "neg_bias": "negbias",
    "burr": "burr21",
}

_PARAMETRIC = re.compile(r"^(pareto|frechet)\((?P<value>[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\)$")


def catalog() -> tuple[DistributionSpec, ...]:
    return _CATALOG


def pareto(gamma: float) -> DistributionSpec:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return DistributionSpec(f"pareto({gamma:g})", "pareto", gamma, None, parameter=gamma)


def frechet(alpha: float) -> DistributionSpec:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return DistributionSpec(f"frechet({alpha:g})", "frechet", 1 / alpha, -1.0, parameter=alpha)


def lookup(name: str) -> DistributionSpec:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    for spec in _CATALOG:
        if spec.name == key:
            return spec
    if match := _PARAMETRIC.match(key):
        value = float(match.group("value"))
        return pareto(value) if match.group(1) == "pareto" else frechet(value)
    raise UnknownName(name, kind="distribution")


def draw(spec: DistributionSpec, size: Size, rng: np.random.Generator) -> np.ndarray:
    """Unsorted draws of shape ``size``."""
    try:
        sampler = _SAMPLERS[spec.family]
    except KeyError:
        raise UnknownName(spec.family, kind="distribution family")
    return sampler(spec, size, rng)


def sample(spec: DistributionSpec, n: int, seed: SeedSpec, *substreams: int) -> SortedSample:
    if n < 3:
        raise ValueError("sample size must be at least 3")
    return SortedSample.from_values(draw(spec, n, seed.generator(*substreams)))


def sorted_batch(
    spec: DistributionSpec, reps: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    """``reps`` ascending samples of size ``n``, one per row."""
    return np.sort(draw(spec, (reps, n), rng), axis=1)
