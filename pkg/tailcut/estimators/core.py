"""
Order statistics and the pointwise tail estimators evaluated at a sample fraction ``k``.

Indexing follows the usual order statistic notation: ``X_(1,n) <= ... <= X_(n,n)`` and the
threshold for sample fraction ``k`` is ``X_(n-k,n)``. Per-k curves in a :class:`TailTrace` are
stored in arrays of length ``n`` where position ``k`` holds the value for sample fraction ``k``;
position ``0`` is always undefined (NaN).
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from tailcut.errors import (
    DegenerateHill,
    InvalidSample,
    InvalidTailProbability,
    NonPositiveThreshold,
)

LOG = logging.getLogger(__name__)

MIN_SAMPLE_SIZE = 3


class SortedSample:
    """Validated ascending observations, the substrate of all tail estimators."""

    values: np.ndarray

    def __init__(self, values: Sequence[float]):
        arr = np.array(values, dtype=float)
        if arr.ndim != 1:
            raise InvalidSample(f"expected a 1-d sequence, got shape {arr.shape}")
        if arr.size < MIN_SAMPLE_SIZE:
            raise InvalidSample(f"need at least {MIN_SAMPLE_SIZE} observations, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise InvalidSample("sample contains non-finite values")
        if np.any(np.diff(arr) < 0):
            raise InvalidSample("values must be sorted ascending, use SortedSample.from_values")
        if np.any(arr[-MIN_SAMPLE_SIZE:] <= 0):
            raise InvalidSample("the top 3 observations must be strictly positive")
        arr.setflags(write=False)
        self.values = arr

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "SortedSample":
        return cls(np.sort(np.asarray(values, dtype=float)))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def threshold(self, k: int) -> float:
        """X_(n-k,n)"""
        _check_fraction(k, self.n)
        return float(self.values[self.n - k - 1])

    def top(self, k: int) -> np.ndarray:
        """X_(n,n), X_(n-1,n), ..., X_(n-k+1,n)"""
        _check_fraction(k, self.n)
        return self.values[self.n - k :][::-1]

    def scaled(self, factor: float) -> "SortedSample":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return SortedSample(self.values * factor)

    def __len__(self) -> int:
        return self.n

    def __repr__(self):
        return f"SortedSample(n={self.n}, max={self.values[-1]:.6g})"


def _check_fraction(k: int, n: int) -> None:
    if not 1 <= k <= n - 1:
        raise ValueError(f"sample fraction k={k} outside 1..{n - 1}")


def log_spacings(sample: SortedSample, k: int) -> np.ndarray:
    """Y_(i,k) = log X_(n-i+1,n) - log X_(n-k,n) for i = 1..k"""
    threshold = sample.threshold(k)
    if threshold <= 0:
        raise NonPositiveThreshold(k, threshold)
    return np.log(sample.top(k)) - np.log(threshold)


def hill(sample: SortedSample, k: int) -> float:
    return float(np.mean(log_spacings(sample, k)))


def second_moment(sample: SortedSample, k: int) -> float:
    """M_{n,k}, the mean of the squared log-spacings."""
    return float(np.mean(log_spacings(sample, k) ** 2))


def devries(sample: SortedSample, k: int) -> float:
    spacings = log_spacings(sample, k)
    gamma = float(np.mean(spacings))
    if gamma <= 0:
        raise DegenerateHill(k, gamma)
    return float(np.mean(spacings**2)) / (2 * gamma)


def jackknife(sample: SortedSample, k: int) -> float:
    """Generalized Jackknife combination 2 * de Vries - Hill."""
    return 2 * devries(sample, k) - hill(sample, k)


def weissman_quantile(sample: SortedSample, k: int, p: float) -> float:
    """Extrapolated (1-p)-quantile X_(n-k,n) * (k/(np))^hill."""
    n = sample.n
    if not 0 < p < k / n:
        raise InvalidTailProbability(p, k, n)
    return sample.threshold(k) * (k / (n * p)) ** hill(sample, k)


@dataclass(frozen=True)
class TailTrace:
    """Hill, second moment, de Vries and generalized Jackknife curves over k = 1..n-1"""

    n: int
    hill: np.ndarray
    m2: np.ndarray
    devries: np.ndarray
    gj: np.ndarray

    @property
    def ks(self) -> np.ndarray:
        return np.arange(1, self.n)

    def defined(self, k: int) -> bool:
        return 1 <= k <= self.n - 1 and bool(np.isfinite(self.hill[k]))

    @property
    def k_max(self) -> int:
        """Largest K such that the Hill curve is defined on all of 1..K (0 if none)."""
        undefined = np.flatnonzero(~np.isfinite(self.hill[1:]))
        if undefined.size == 0:
            return self.n - 1
        return int(undefined[0])

    def defined_count(self) -> int:
        return int(np.count_nonzero(np.isfinite(self.hill[1:])))


def _running_moments(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Hill and second-moment curves for ascending samples along the last axis, computed from
    running sums of the centered log order statistics. Returns arrays shaped like ``values``
    with index ``k`` holding the estimate for sample fraction ``k``.
    """
    desc = values[..., ::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(desc > 0, np.log(np.where(desc > 0, desc, 1.0)), np.nan)
    centered = logs - logs[..., :1]
    cs1 = np.cumsum(centered, axis=-1)
    cs2 = np.cumsum(centered**2, axis=-1)

    n = values.shape[-1]
    ks = np.arange(1, n, dtype=float)
    z_k = centered[..., 1:]
    mean1 = cs1[..., :-1] / ks
    mean2 = cs2[..., :-1] / ks

    hill_k = np.maximum(mean1 - z_k, 0.0)
    m2_k = mean2 - 2 * z_k * mean1 + z_k**2
    m2_k = np.maximum(m2_k, hill_k**2)

    pad = np.full(values.shape[:-1] + (1,), np.nan)
    return np.concatenate([pad, hill_k], axis=-1), np.concatenate([pad, m2_k], axis=-1)


def trace(sample: SortedSample) -> TailTrace:
    """All four per-k curves from a single incremental pass; undefined entries are NaN."""
    hill_k, m2_k = _running_moments(sample.values)
    with np.errstate(divide="ignore", invalid="ignore"):
        devries_k = np.where(hill_k > 0, m2_k / (2 * hill_k), np.nan)
    gj_k = 2 * devries_k - hill_k

    for arr in (hill_k, m2_k, devries_k, gj_k):
        arr.setflags(write=False)

    result = TailTrace(n=sample.n, hill=hill_k, m2=m2_k, devries=devries_k, gj=gj_k)
    undefined = result.n - 1 - result.defined_count()
    if undefined:
        LOG.debug(f"trace: {undefined} of {result.n - 1} sample fractions have a non-positive threshold")
    return result


def hill_matrix(samples: np.ndarray) -> np.ndarray:
    """Hill curves for a batch of ascending samples, one sample per row."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise ValueError("expected a 2-d array of sorted samples")
    hill_k, _ = _running_moments(samples)
    return hill_k


def weissman_curve(sample: SortedSample, tail_trace: TailTrace, p: float) -> np.ndarray:
    """Weissman estimates for every k with k/(np) > 1 and a defined Hill entry (NaN otherwise)."""
    n = sample.n
    ks = np.arange(n)
    thresholds = np.concatenate([[np.nan], sample.values[::-1][1:]])
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        curve = thresholds * (ks / (n * p)) ** tail_trace.hill
    curve[ks <= n * p] = np.nan
    return curve


def argmin_first(values: np.ndarray, rtol: float = 1e-12) -> int:
    """Position of the minimum; values equal to it up to rounding count as ties, the first wins."""
    values = np.asarray(values, dtype=float)
    if values.size == 0 or not np.any(np.isfinite(values)):
        raise ValueError("no finite values to minimize")
    finite = np.where(np.isfinite(values), values, np.inf)
    lowest = finite.min()
    tol = rtol * max(abs(lowest), 1e-300)
    return int(np.flatnonzero(finite <= lowest + tol)[0])


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of a threshold selector on one sample."""

    k_hat: int
    threshold: float
    gamma_hat: float
    method: str
    k_grid: np.ndarray = field(repr=False)
    criterion: np.ndarray = field(repr=False)
    diagnostics: Mapping[str, Any] = field(default_factory=dict, repr=False)

    @classmethod
    def at(
        cls,
        sample: SortedSample,
        tail_trace: TailTrace,
        k_hat: int,
        *,
        method: str,
        k_grid: Optional[np.ndarray] = None,
        criterion: Optional[np.ndarray] = None,
        diagnostics: Optional[Mapping[str, Any]] = None,
    ) -> "SelectionResult":
        gamma_hat = float(tail_trace.hill[k_hat])
        if not np.isfinite(gamma_hat):
            raise NonPositiveThreshold(k_hat, sample.threshold(k_hat))
        return cls(
            k_hat=int(k_hat),
            threshold=sample.threshold(k_hat),
            gamma_hat=gamma_hat,
            method=method,
            k_grid=np.asarray(k_grid if k_grid is not None else [], dtype=int),
            criterion=np.asarray(criterion if criterion is not None else [], dtype=float),
            diagnostics=dict(diagnostics or {}),
        )

    def quantile(self, sample: SortedSample, p: float) -> float:
        return weissman_quantile(sample, self.k_hat, p)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "k_hat": self.k_hat,
            "threshold": self.threshold,
            "gamma_hat": self.gamma_hat,
            "diagnostics": {
                "k_grid": self.k_grid,
                "criterion": self.criterion,
                **self.diagnostics,
            },
        }
