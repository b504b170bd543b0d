"""
Extreme value index varying with a covariate (time).

Observations are ordered by time and mapped to ``s`` in [0, 1]. For every ``s`` of an evaluation
grid the Hill estimator is applied to the window ``{i : |s_i - s| <= h}``, either with the
rescaled global fraction ``floor(2kh)`` or with a fraction selected on the window itself.
"""
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from tailcut.errors import (
    EmptyWindow,
    InvalidSample,
    NonPositiveThreshold,
    OutOfRange,
    TailcutError,
)
from tailcut.estimators.core import SelectionResult, SortedSample, hill
from tailcut.estimators.ihs import ihs_selector
from tailcut.estimators.samsee import samsee_selector
from tailcut.io import read_timed_pairs
from tailcut.simulation.distributions import SeedSpec, frechet_variates
from tailcut.simulation.harness import default_threads

LOG = logging.getLogger(__name__)

MIN_WINDOW = 20
EPS = 1e-9

METHODS = ("global_k", "adaptive_samsee", "adaptive_sihs")

FIT_COLUMNS = ["s", "gamma_hat", "k_hat", "window_size", "method", "h"]


def _check_bandwidth(h: float) -> None:
    if not 0 < h < 0.5:
        raise OutOfRange(f"bandwidth h={h} must lie in (0, 1/2)")


def _check_position(s: float, h: float) -> None:
    _check_bandwidth(h)
    if not h - EPS <= s <= 1 - h + EPS:
        raise OutOfRange(f"s={s} outside [{h}, {1 - h}]")


@dataclass(frozen=True)
class TimedSample:
    """Observations with times normalized to [0, 1], ordered by time."""

    s: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.s.shape != self.values.shape or self.s.ndim != 1:
            raise InvalidSample("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.s) < 0):
            raise InvalidSample("times must be ordered")

    @classmethod
    def from_pairs(cls, times: Sequence[float], values: Sequence[float]) -> "TimedSample":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.size < 2:
            raise InvalidSample("need at least two observations")
        span = times.max() - times.min()
        if span <= 0:
            raise InvalidSample("all observations share one time, cannot normalize")
        order = np.argsort(times, kind="stable")
        return cls(s=(times[order] - times.min()) / span, values=values[order])

    @classmethod
    def equally_spaced(cls, values: Sequence[float]) -> "TimedSample":
        """X_i observed at s = i/n, i = 1..n"""
        values = np.asarray(values, dtype=float)
        return cls(s=np.arange(1, values.size + 1) / values.size, values=values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def window_mask(self, s: float, h: float) -> np.ndarray:
        _check_position(s, h)
        return np.abs(self.s - s) <= h + EPS

    def window(self, s: float, h: float) -> np.ndarray:
        return self.values[self.window_mask(s, h)]


def window_indices(n: int, s: float, h: float) -> np.ndarray:
    """1-based indices i with |i/n - s| <= h"""
    _check_position(s, h)
    lo = max(1, math.ceil(n * (s - h) - EPS))
    hi = min(n, math.floor(n * (s + h) + EPS))
    return np.arange(lo, hi + 1)


def _window_sample(ts: TimedSample, s: float, h: float) -> SortedSample:
    window = ts.window(s, h)
    positive = int(np.count_nonzero(window > 0))
    if positive < MIN_WINDOW:
        raise EmptyWindow(s, positive, MIN_WINDOW)
    return SortedSample.from_values(window)


def gamma_global_k(ts: TimedSample, s: float, h: float, k: int) -> float:
    """
    Local Hill estimate with the global fraction ``k`` rescaled to ``j = floor(2kh)`` on the
    window: ``sum (log X_i - log X_(m-j,m))^+ / (2kh)`` over the ``m`` window observations.
    """
    j = math.floor(2 * k * h)
    if j < 1:
        raise OutOfRange(f"global fraction k={k} gives floor(2kh) = 0 at h={h}")
    window = _window_sample(ts, s, h)
    if j > window.n - 1:
        raise OutOfRange(f"floor(2kh) = {j} exceeds the window size {window.n} minus one")
    threshold = window.threshold(j)
    if threshold <= 0:
        raise NonPositiveThreshold(j, threshold)
    return j * hill(window, j) / (2 * k * h)


def _selector(method: Union[str, Callable[[SortedSample], SelectionResult]]):
    if callable(method):
        return method
    if method in ("samsee", "adaptive_samsee"):
        return samsee_selector()
    if method in ("sihs", "adaptive_sihs"):
        return ihs_selector(smoothed=True)
    raise ValueError(f"unknown adaptive method {method!r}")


def gamma_adaptive(
    ts: TimedSample,
    s: float,
    h: float,
    selector: Union[str, Callable[[SortedSample], SelectionResult]] = "samsee",
) -> tuple[float, int]:
    """Local Hill estimate at a fraction selected on the window data itself."""
    result = _selector(selector)(_window_sample(ts, s, h))
    return result.gamma_hat, result.k_hat


@dataclass(frozen=True)
class VaryingFit:
    s_grid: np.ndarray
    gamma_hat: np.ndarray
    k_hat: np.ndarray
    window_size: np.ndarray
    h: float
    method: str
    flagged: dict[int, str] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "s": self.s_grid,
                "gamma_hat": self.gamma_hat,
                "k_hat": self.k_hat,
                "window_size": self.window_size,
                "method": self.method,
                "h": self.h,
            },
            columns=FIT_COLUMNS,
        )


def evaluation_grid(h: float, grid_size: int) -> np.ndarray:
    _check_bandwidth(h)
    if grid_size < 1:
        raise ValueError("grid_size must be at least 1")
    if grid_size == 1:
        return np.array([0.5])
    return np.linspace(h, 1 - h, grid_size)


def _fit_point(ts: TimedSample, s: float, h: float, method: str, global_k: Optional[int]):
    if method == "global_k":
        return gamma_global_k(ts, s, h, global_k), math.floor(2 * global_k * h)
    return gamma_adaptive(ts, s, h, method)


def fit_curve(
    ts: TimedSample,
    h: float,
    grid_size: int,
    method: str = "adaptive_samsee",
    *,
    global_k: Optional[int] = None,
    threads: Optional[int] = None,
) -> VaryingFit:
    """
    Fit the index curve on an equally spaced grid over [h, 1-h]. Grid points whose window cannot
    be estimated are flagged and left as NaN.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if method == "global_k" and global_k is None:
        raise ValueError("the global_k method needs a global sample fraction")
    grid = evaluation_grid(h, grid_size)

    def _evaluate(s: float):
        try:
            return _fit_point(ts, s, h, method, global_k), None
        except TailcutError as e:
            return None, f"{type(e).__name__}: {e}"

    with ThreadPoolExecutor(max_workers=threads or default_threads()) as executor:
        outcomes = list(executor.map(_evaluate, grid))

    gamma_hat = np.full(grid.size, np.nan)
    k_hat = np.full(grid.size, np.nan)
    sizes = np.array([np.count_nonzero(ts.window_mask(s, h)) for s in grid])
    flagged = {}
    for i, (value, error) in enumerate(outcomes):
        if error is not None:
            flagged[i] = error
            continue
        gamma_hat[i], k_hat[i] = value
    if flagged:
        LOG.warning(f"{len(flagged)} of {grid.size} grid points could not be estimated ({method})")
    return VaryingFit(grid, gamma_hat, k_hat, sizes, h, method, flagged)


def ingest_losses(path: Union[str, Path]) -> TimedSample:
    times, losses = read_timed_pairs(path)
    return TimedSample.from_pairs(times, losses)


def linear_gamma(s):
    return 1 + np.asarray(s, dtype=float)


def synthetic_fig6(
    n: int,
    seed: SeedSpec,
    gamma_fn: Callable[[np.ndarray], np.ndarray] = linear_gamma,
    replicate: int = 0,
) -> TimedSample:
    """X_i ~ Frechet(1/gamma(i/n)) observed at s = i/n"""
    s = np.arange(1, n + 1) / n
    u = seed.generator(replicate).random(n)
    u = np.where(u == 0, np.nextafter(0, 1), u)
    return TimedSample(s=s, values=frechet_variates(1 / gamma_fn(s), u))


def default_global_k(n: int) -> int:
    """n/20, i.e. a tenth of each window of bandwidth h = 0.1 (250 at n = 5000)"""
    return max(1, n // 20)


@dataclass(frozen=True)
class BandSummary:
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


@dataclass(frozen=True)
class Fig6Result:
    s_grid: np.ndarray
    true_gamma: np.ndarray
    h: float
    n: int
    reps: int
    global_k: int
    bands: dict[str, BandSummary]

    def band_width_ratio(self, method: str = "adaptive_samsee") -> float:
        """Average band width of ``method`` relative to the global-k band."""
        return float(np.nanmean(self.bands[method].width) / np.nanmean(self.bands["global_k"].width))

    def mean_absolute_deviation(self, method: str = "adaptive_samsee") -> float:
        return float(np.nanmean(np.abs(self.bands[method].mean - self.true_gamma)))

    def to_frame(self) -> pd.DataFrame:
        frames = []
        for method, band in self.bands.items():
            frames.append(
                pd.DataFrame(
                    {
                        "s": self.s_grid,
                        "gamma_hat": band.mean,
                        "k_hat": (
                            float(math.floor(2 * self.global_k * self.h))
                            if method == "global_k"
                            else np.nan
                        ),
                        "window_size": [len(window_indices(self.n, s, self.h)) for s in self.s_grid],
                        "method": method,
                        "h": self.h,
                        "lower": band.lower,
                        "upper": band.upper,
                        "true_gamma": self.true_gamma,
                    }
                )
            )
        return pd.concat(frames, ignore_index=True)


def fig6_experiment(
    n: int = 5000,
    h: float = 0.1,
    grid_size: int = 100,
    reps: int = 200,
    global_k: Optional[int] = None,
    seed: Optional[SeedSpec] = None,
    methods: Sequence[str] = ("global_k", "adaptive_samsee"),
    gamma_fn: Callable[[np.ndarray], np.ndarray] = linear_gamma,
    threads: Optional[int] = None,
) -> Fig6Result:
    """
    Repeat the synthetic varying-index fit ``reps`` times and summarize each method by its mean
    curve and its pointwise 2.5% and 97.5% empirical quantiles.
    """
    if seed is None:
        raise ValueError("fig6_experiment needs an explicit seed")
    global_k = global_k or default_global_k(n)
    grid = evaluation_grid(h, grid_size)
    curves = {method: np.full((reps, grid.size), np.nan) for method in methods}
    for rep in range(reps):
        ts = synthetic_fig6(n, seed, gamma_fn, replicate=rep)
        for method in methods:
            fit = fit_curve(ts, h, grid_size, method, global_k=global_k, threads=threads)
            curves[method][rep] = fit.gamma_hat
    bands = {}
    for method, values in curves.items():
        with warnings.catch_warnings():
            # grid points flagged in every replicate stay NaN
            warnings.simplefilter("ignore", RuntimeWarning)
            bands[method] = BandSummary(
                mean=np.nanmean(values, axis=0),
                lower=np.nanquantile(values, 0.025, axis=0),
                upper=np.nanquantile(values, 0.975, axis=0),
            )
    return Fig6Result(
        s_grid=grid,
        true_gamma=gamma_fn(grid),
        h=h,
        n=n,
        reps=reps,
        global_k=global_k,
        bands=bands,
    )
