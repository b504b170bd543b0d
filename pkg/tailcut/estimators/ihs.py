"""
The inverse Hill statistic (IHS) and its smoothed version.

``IHS(k) = (4 - k) / (2 hill_k k)`` estimates the integrated square error of the fitted
exponential density of the log-spacings, shifted by ``-1/(2 gamma)``, under the hypothesis that
the log-spacings are exactly exponential. Its minimizer is a conservative threshold. For tails
whose Hill estimator is biased downwards, ``IHS-(k) = (4 + k) / (2 hill_k k)`` is used instead.
"""
import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import integrate

from tailcut.errors import DegenerateHill, InsufficientData, NoAdmissibleK
from tailcut.estimators.core import SelectionResult, SortedSample, TailTrace, argmin_first, trace
from tailcut.estimators.samsee import bias_bar_curve
from tailcut.estimators.smoothing import default_span, local_linear

LOG = logging.getLogger(__name__)

MIN_SIGN_ENTRIES = 20
MIN_SMOOTHING_POINTS = 30


class BiasSign(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class Variant(str, enum.Enum):
    AUTO = "auto"
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class IhsCurve:
    k_grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    variant: BiasSign
    smoothed: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass(frozen=True)
class IhsSelection:
    k_hat: int
    gamma_hat: float
    variant: BiasSign
    used_smoothing: bool
    curve: IhsCurve = field(repr=False)

    def to_selection_result(self, sample: SortedSample, tail_trace: TailTrace) -> SelectionResult:
        criterion = self.curve.smoothed if self.used_smoothing else self.curve.values
        return SelectionResult.at(
            sample,
            tail_trace,
            self.k_hat,
            method="sihs" if self.used_smoothing else "ihs",
            k_grid=self.curve.k_grid,
            criterion=criterion,
            diagnostics={"variant": self.variant.value, "raw_curve": self.curve.values},
        )


def ihs(hill_k: float, k: int) -> float:
    if hill_k <= 0:
        raise DegenerateHill(k, hill_k)
    return (4 - k) / (2 * hill_k * k)


def ihs_neg(hill_k: float, k: int) -> float:
    if hill_k <= 0:
        raise DegenerateHill(k, hill_k)
    return (4 + k) / (2 * hill_k * k)


def c_of_k(k: int) -> float:
    """
    C(k) = 2 e^k k^k Gamma(1-k, k), evaluated through the Laplace-type integral
    2k * int_1^inf exp(-k (log u + u - 1)) du, which avoids the cancellation in Gamma(1-k, k).
    """
    if k < 2:
        raise ValueError("C(k) is defined for k >= 2")

    def integrand(u: float) -> float:
        return math.exp(-k * (math.log(u) + u - 1))

    # integrand decays like exp(-2k(u-1)) near u = 1; split off the peak for quad
    split = 1 + 50.0 / k
    head, _ = integrate.quad(integrand, 1, split, epsabs=0, epsrel=1e-12, limit=200)
    tail, _ = integrate.quad(integrand, split, np.inf, epsabs=0, epsrel=1e-12, limit=200)
    return 2 * k * (head + tail)


def c_of_k_continued_fraction(k: int, max_iterations: int = 10_000, eps: float = 1e-15) -> float:
    """
    C(k) through the continued fraction Gamma(a, x) = e^-x x^a / (x + 1 - a - 1(1-a)/(x + 3 - a - ...))
    with a = 1 - k, x = k (modified Lentz). The prefactors cancel, leaving C(k) = 2k * CF.
    """
    if k < 2:
        raise ValueError("C(k) is defined for k >= 2")
    a, x = 1.0 - k, float(k)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iterations + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return 2 * k * h
    raise ArithmeticError(f"continued fraction for C({k}) did not converge")


def mise_h0(k: int, gamma: float) -> float:
    """Mean integrated square error of the fitted exponential density under exact exponentiality."""
    return (0.5 - c_of_k(k) + k / (2 * (k - 1))) / gamma


def ise(gamma_hat: float, gamma: float) -> float:
    return 1 / (2 * gamma) - 2 / (gamma + gamma_hat) + 1 / (2 * gamma_hat)


def ise_decomposition(gamma_hat: float, gamma: float, k: int) -> float:
    """ISE + 2/(k gamma_hat) + (gamma_hat - gamma)/(gamma_hat (gamma_hat + gamma)), equal to IHS + 1/(2 gamma)"""
    return (
        ise(gamma_hat, gamma)
        + 2 / (k * gamma_hat)
        + (gamma_hat - gamma) / (gamma_hat * (gamma_hat + gamma))
    )


def mse_weight_objective(w: float, k: int) -> float:
    """gamma^2 * MSE of w/hill as an estimator of 2/(hill + gamma) under exact exponentiality"""
    return w**2 * k**2 / ((k - 1) * (k - 2)) - 2 * w * k / (k - 1) + 1


def optimal_weight(k: int) -> float:
    return (k - 2) / k


def expected_ihs_h0(k: int, gamma: float, variant: BiasSign = BiasSign.POSITIVE) -> float:
    """Exact E[IHS(k)] (or E[IHS-(k)]) when the Hill estimator is Gamma(k, gamma/k) distributed."""
    if variant == BiasSign.POSITIVE:
        return 3 / (2 * gamma * (k - 1)) - 1 / (2 * gamma)
    return 5 / (2 * gamma * (k - 1)) + 1 / (2 * gamma)


def admissible_grid(tail_trace: TailTrace) -> np.ndarray:
    ks = np.arange(2, tail_trace.n)
    hill_k = tail_trace.hill[2:]
    return ks[np.isfinite(hill_k) & (hill_k > 0)]


def detect_bias_sign(tail_trace: TailTrace) -> BiasSign:
    """
    Sign of the average bias proxy ``b_up(K, k)`` over ``K/4 <= k <= 3K/4`` with ``K`` the
    largest fraction with a defined Hill curve. An increasing Hill curve signals positive bias.
    """
    K = tail_trace.k_max
    if K < MIN_SIGN_ENTRIES:
        raise InsufficientData(MIN_SIGN_ENTRIES, K, what="defined Hill entries")
    b_up = bias_bar_curve(tail_trace, K).b_up
    lo, hi = math.ceil(K / 4), math.floor(3 * K / 4)
    average = float(np.mean(b_up[lo : hi + 1]))
    sign = BiasSign.NEGATIVE if average < 0 else BiasSign.POSITIVE
    LOG.debug(f"bias sign {sign.value} (mean b_up = {average:.4g} over k={lo}..{hi}, K={K})")
    return sign


def _resolve_variant(tail_trace: TailTrace, variant: Variant | str) -> BiasSign:
    variant = Variant(variant)
    if variant == Variant.AUTO:
        return detect_bias_sign(tail_trace)
    return BiasSign(variant.value)


def ihs_curve(tail_trace: TailTrace, variant: BiasSign | str = BiasSign.POSITIVE) -> IhsCurve:
    sign = BiasSign(variant)
    ks = admissible_grid(tail_trace)
    hill_k = tail_trace.hill[ks]
    numerator = 4 - ks if sign == BiasSign.POSITIVE else 4 + ks
    return IhsCurve(k_grid=ks, values=numerator / (2 * hill_k * ks), variant=sign)


def select_ihs(tail_trace: TailTrace, variant: Variant | str = Variant.AUTO) -> IhsSelection:
    curve = ihs_curve(tail_trace, _resolve_variant(tail_trace, variant))
    if curve.k_grid.size == 0:
        raise NoAdmissibleK("no sample fraction 1 < k < n with a positive Hill estimate")
    k_hat = int(curve.k_grid[argmin_first(curve.values)])
    return IhsSelection(
        k_hat=k_hat,
        gamma_hat=float(tail_trace.hill[k_hat]),
        variant=curve.variant,
        used_smoothing=False,
        curve=curve,
    )


def smooth_curve(curve: IhsCurve, span: Optional[int] = None) -> np.ndarray:
    """Local-linear tricube smoothing of the curve values over its grid."""
    m = curve.k_grid.size
    if m < MIN_SMOOTHING_POINTS:
        raise InsufficientData(MIN_SMOOTHING_POINTS, m, what="admissible grid points")
    return local_linear(curve.k_grid, curve.values, span or default_span(m))


def select_sihs(
    tail_trace: TailTrace, variant: Variant | str = Variant.AUTO, *, span: Optional[int] = None
) -> IhsSelection:
    curve = ihs_curve(tail_trace, _resolve_variant(tail_trace, variant))
    smoothed = smooth_curve(curve, span)
    curve = replace(curve, smoothed=smoothed)
    k_hat = int(curve.k_grid[argmin_first(smoothed)])
    return IhsSelection(
        k_hat=k_hat,
        gamma_hat=float(tail_trace.hill[k_hat]),
        variant=curve.variant,
        used_smoothing=True,
        curve=curve,
    )


def ihs_selector(variant: Variant | str = Variant.AUTO, *, smoothed: bool = False):
    def _select(sample: SortedSample) -> SelectionResult:
        tail_trace = trace(sample)
        if smoothed:
            selection = select_sihs(tail_trace, variant)
        else:
            selection = select_ihs(tail_trace, variant)
        return selection.to_selection_result(sample, tail_trace)

    return _select
