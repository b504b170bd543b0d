"""
Smooth AMSE estimation for the Hill estimator.

The squared bias of the Hill estimator is estimated by ``b_up(K, k)``, the difference between
the upper mean of Hill estimates over ``k..K`` and the mean over ``1..K``. The large sample
fraction ``K*`` is chosen where ``de Vries + b_up ~ Hill`` is locally most stable, and the
threshold minimizes ``gj(K*)^2 / k + (bias factor * b_up(K*, k))^2``.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from tailcut.errors import (
    DegenerateJackknife,
    NoAdmissibleK,
    NoSearchRange,
    UndefinedEntries,
)
from tailcut.estimators.core import (
    SelectionResult,
    SortedSample,
    TailTrace,
    argmin_first,
    trace,
)

LOG = logging.getLogger(__name__)

RhoSpec = Union[None, float, Callable[[TailTrace], float]]

DEFAULT_WINDOW = 2
MIN_SEARCH_K = 10


@dataclass(frozen=True)
class BiasCurve:
    """Arrays indexed by k = 0..K; position 0 is unused."""

    K: int
    b_up: np.ndarray
    mean_hill: np.ndarray
    upper_mean: np.ndarray


@dataclass(frozen=True)
class SamseeDiagnostics:
    K_star: int
    e2_K: np.ndarray = field(repr=False)
    e2_curve: np.ndarray = field(repr=False)
    b_bar: np.ndarray = field(repr=False)
    k_grid: np.ndarray = field(repr=False)
    samsee_curve: np.ndarray = field(repr=False)
    k_hat: int
    gamma_hat: float
    gamma_hat_gj: float
    rho_used: Optional[float]


def _hill_cumsum(tail_trace: TailTrace, K: int) -> np.ndarray:
    """cs[j] = hill[1] + ... + hill[j], cs[0] = 0; requires hill defined on 1..K"""
    if not 1 <= K <= tail_trace.n - 1:
        raise ValueError(f"upper fraction K={K} outside 1..{tail_trace.n - 1}")
    segment = tail_trace.hill[1 : K + 1]
    undefined = np.flatnonzero(~np.isfinite(segment))
    if undefined.size:
        raise UndefinedEntries(undefined + 1)
    return np.concatenate([[0.0], np.cumsum(segment)])


def mean_hill(tail_trace: TailTrace, k: int) -> float:
    """Average of the Hill estimates at 1..k"""
    return float(_hill_cumsum(tail_trace, k)[k] / k)


def upper_mean(tail_trace: TailTrace, K: int, k: int) -> float:
    """Average of the Hill estimates at k..K"""
    if not 1 <= k <= K:
        raise ValueError(f"need 1 <= k <= K, got k={k}, K={K}")
    cs = _hill_cumsum(tail_trace, K)
    return float((cs[K] - cs[k - 1]) / (K - k + 1))


def bias_bar(tail_trace: TailTrace, K: int, k: int) -> float:
    return upper_mean(tail_trace, K, k) - mean_hill(tail_trace, K)


def bias_bar_curve(tail_trace: TailTrace, K: int) -> BiasCurve:
    cs = _hill_cumsum(tail_trace, K)
    ks = np.arange(1, K + 1)
    mean_k = np.concatenate([[np.nan], cs[1:] / ks])
    upper = np.concatenate([[np.nan], (cs[K] - cs[:-1]) / (K - ks + 1)])
    return BiasCurve(K=K, b_up=upper - mean_k[K], mean_hill=mean_k, upper_mean=upper)


def delta_rho(c, rho: float):
    """Bending factor (c^rho - 1) / (-rho (1/c - 1)); equals 1 at rho = -1 and as c -> 1."""
    if rho >= 0:
        raise ValueError("second order parameter rho must be negative")
    c = np.asarray(c, dtype=float)
    near_one = np.abs(1 - c) < 1e-12
    safe = np.where(near_one, 0.5, c)
    value = (safe**rho - 1) / (-rho * (1 / safe - 1))
    value = np.where(near_one, 1.0, value)
    if rho == -1:
        value = np.ones_like(value)
    return float(value) if value.ndim == 0 else value


def nu(c):
    """Variance factor 2c^2/(1-c)^2 (1 - c + c log c), continuous with nu(0) = 0, nu(1) = 1."""
    c = np.asarray(c, dtype=float)
    inner = np.where((c > 0) & (c < 1), c, 0.5)
    value = 2 * inner**2 / (1 - inner) ** 2 * (1 - inner + inner * np.log(inner))
    value = np.where(c <= 0, 0.0, np.where(c >= 1, 1.0, value))
    return float(value) if value.ndim == 0 else value


def resolve_rho(rho: RhoSpec, tail_trace: TailTrace) -> Optional[float]:
    if rho is None:
        return None
    value = float(rho(tail_trace)) if callable(rho) else float(rho)
    if not value < 0:
        raise ValueError(f"second order parameter must be negative, got {value}")
    return value


def _e_squared_from_cumsum(
    tail_trace: TailTrace, cs: np.ndarray, K: int, rho: Optional[float]
) -> float:
    ks = np.arange(1, K + 1)
    b = (cs[K] - cs[ks - 1]) / (K - ks + 1) - cs[K] / K
    if rho is not None:
        b = b / delta_rho(ks / K, rho)
    terms = tail_trace.devries[1 : K + 1] + b - tail_trace.hill[1 : K + 1]
    terms = terms[np.isfinite(terms)]
    if terms.size == 0:
        return math.nan
    return float(np.mean(terms**2))


def e_squared(tail_trace: TailTrace, K: int, rho: Optional[float] = None) -> float:
    """
    Mean squared deviation of ``de Vries + b_up(K, k)`` from Hill over k = 1..K. Sample
    fractions with an undefined de Vries estimate (tied tails) are skipped and the mean is
    taken over the remaining terms.
    """
    cs = _hill_cumsum(tail_trace, K)
    value = _e_squared_from_cumsum(tail_trace, cs, K, rho)
    if math.isnan(value):
        raise UndefinedEntries(range(1, K + 1))
    return value


def e_squared_curve(
    tail_trace: TailTrace, K_values: np.ndarray, rho: Optional[float] = None
) -> np.ndarray:
    K_values = np.asarray(K_values, dtype=int)
    if K_values.size == 0:
        return np.array([], dtype=float)
    cs = _hill_cumsum(tail_trace, int(K_values.max()))
    return np.array([_e_squared_from_cumsum(tail_trace, cs, int(K), rho) for K in K_values])


def local_variation(e2: np.ndarray, h: int) -> np.ndarray:
    """sum_{L=K-h}^{K+h} (E2(K) - E2(L))^2 for the interior positions of ``e2``"""
    e2 = np.asarray(e2, dtype=float)
    m = e2.size - 2 * h
    if m <= 0:
        return np.array([], dtype=float)
    centre = e2[h : h + m]
    total = np.zeros(m)
    for offset in range(-h, h + 1):
        total += (centre - e2[h + offset : h + offset + m]) ** 2
    return total


def search_range(tail_trace: TailTrace) -> tuple[int, int]:
    lo = max(MIN_SEARCH_K, math.ceil(0.02 * tail_trace.n))
    return lo, tail_trace.k_max


def _k_star_search(
    tail_trace: TailTrace, window_h: int, rho: Optional[float]
) -> tuple[int, np.ndarray, np.ndarray]:
    if window_h < 1:
        raise ValueError("window_h must be at least 1")
    lo, hi = search_range(tail_trace)
    if lo + window_h > hi - window_h:
        raise NoSearchRange(lo + window_h, hi - window_h)

    Ks = np.arange(lo, hi + 1)
    e2 = e_squared_curve(tail_trace, Ks, rho)
    variation = local_variation(e2, window_h)
    if not np.any(np.isfinite(variation)):
        raise UndefinedEntries(Ks)
    K_star = int(Ks[window_h + argmin_first(variation)])
    LOG.debug(f"K* = {K_star} (searched {lo + window_h}..{hi - window_h}, h={window_h})")
    return K_star, Ks, e2


def select_K_star(
    tail_trace: TailTrace, window_h: int = DEFAULT_WINDOW, rho: RhoSpec = None
) -> int:
    K_star, _, _ = _k_star_search(tail_trace, window_h, resolve_rho(rho, tail_trace))
    return K_star


def samsee_curve(
    tail_trace: TailTrace, K_star: int, rho: Optional[float] = None
) -> tuple[np.ndarray, np.ndarray]:
    """SAMSEE(k) for k = 2..K*-1 as ``(k_grid, values)``"""
    gj = tail_trace.gj[K_star] if 1 <= K_star <= tail_trace.n - 1 else math.nan
    if not np.isfinite(gj):
        raise DegenerateJackknife(K_star)
    b = bias_bar_curve(tail_trace, K_star).b_up
    ks = np.arange(2, K_star)
    bias = b[ks]
    if rho is None or rho == -1:
        values = gj**2 / ks + 4 * bias**2
    else:
        factor = (1 - rho) * (K_star / ks - 1) / ((ks / K_star) ** rho - 1)
        values = gj**2 / ks + (factor * bias) ** 2
    return ks, values


def select_samsee(
    tail_trace: TailTrace, rho: RhoSpec = None, *, window_h: int = DEFAULT_WINDOW
) -> SamseeDiagnostics:
    rho_value = resolve_rho(rho, tail_trace)
    K_star, Ks, e2 = _k_star_search(tail_trace, window_h, rho_value)
    ks, values = samsee_curve(tail_trace, K_star, rho_value)
    if ks.size == 0:
        raise NoAdmissibleK(f"K*={K_star} leaves no sample fraction 1 < k < K*")
    k_hat = int(ks[argmin_first(values)])
    LOG.debug(f"SAMSEE selected k={k_hat} below K*={K_star} (rho={rho_value})")
    return SamseeDiagnostics(
        K_star=K_star,
        e2_K=Ks,
        e2_curve=e2,
        b_bar=bias_bar_curve(tail_trace, K_star).b_up,
        k_grid=ks,
        samsee_curve=values,
        k_hat=k_hat,
        gamma_hat=float(tail_trace.hill[k_hat]),
        gamma_hat_gj=float(tail_trace.gj[K_star]),
        rho_used=rho_value,
    )


def samsee_selector(
    rho: RhoSpec = None, window_h: int = DEFAULT_WINDOW
) -> Callable[[SortedSample], SelectionResult]:
    def _select(sample: SortedSample) -> SelectionResult:
        tail_trace = trace(sample)
        diag = select_samsee(tail_trace, rho, window_h=window_h)
        return SelectionResult.at(
            sample,
            tail_trace,
            diag.k_hat,
            method="samsee",
            k_grid=diag.k_grid,
            criterion=diag.samsee_curve,
            diagnostics={
                "K_star": diag.K_star,
                "gamma_hat_gj": diag.gamma_hat_gj,
                "rho_used": diag.rho_used,
                "e2_K": diag.e2_K,
                "e2_curve": diag.e2_curve,
            },
        )

    return _select
