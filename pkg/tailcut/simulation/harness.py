"""
Monte-Carlo efficiency study of threshold selectors.

For a distribution with known extreme value index, every replicate sample is drawn from its own
seed stream and handed to each selector. Efficiencies are root empirical MSEs of the adaptive
estimates divided by those of the oracle that uses the empirical optimal fraction ``k_opt`` on
every sample. ``k_opt`` itself is the rounded mean of the MSE minimizers of independent groups of
samples.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from rich.table import Table

from tailcut.errors import TailcutError
from tailcut.estimators.core import (
    SortedSample,
    argmin_first,
    hill_matrix,
    trace,
    weissman_quantile,
)
from tailcut.simulation.distributions import DistributionSpec, SeedSpec, sample, sorted_batch
from tailcut.simulation.registry import REGISTRY, SelectorContext, SelectorRegistry

LOG = logging.getLogger(__name__)

CSV_COLUMNS = [
    "distribution",
    "n",
    "reps",
    "selector",
    "mean_gamma",
    "rmse_gamma",
    "eff_gamma",
    "eff_q",
    "mean_k",
    "sd_k",
    "k_opt_emp",
    "seed",
]

# substreams below the stream index of a study
REPLICATE_STREAM = 0
KOPT_STREAM = 1

KOPT_CHUNK = 250


def default_threads() -> int:
    if value := os.environ.get("TAILCUT_THREADS"):
        return max(1, int(value))
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class KoptProtocol:
    groups: int = 20
    samples_per_group: int = 1000

    def __post_init__(self):
        if self.groups < 1 or self.samples_per_group < 1:
            raise ValueError("k_opt protocol needs at least one group of one sample")


@dataclass(frozen=True)
class StudyConfig:
    spec: DistributionSpec
    n: int
    reps: int
    p: float
    selectors: tuple[str, ...]
    seed: SeedSpec
    kopt_protocol: KoptProtocol = field(default_factory=KoptProtocol)
    threads: Optional[int] = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.n < 3:
            raise ValueError("sample size must be at least 3")
        if not 0 < self.p < 0.5:
            raise ValueError("tail probability must lie in (0, 1/2)")
        if not self.selectors:
            raise ValueError("no selectors configured")


@dataclass(frozen=True)
class ReplicateFailure:
    replicate: int
    selector: str
    reason: str


@dataclass(frozen=True)
class SelectorSummary:
    selector: str
    mean_gamma: float
    rmse_gamma: float
    eff_gamma: float
    eff_q: float
    mean_k: float
    sd_k: float
    failures: int = 0
    quantile_failures: int = 0


@dataclass(frozen=True)
class EffReport:
    spec: DistributionSpec
    n: int
    reps: int
    seed: SeedSpec
    k_opt_empirical: int
    rows: tuple[SelectorSummary, ...]
    failures: tuple[ReplicateFailure, ...] = ()

    def row(self, selector: str) -> SelectorSummary:
        for row in self.rows:
            if row.selector == selector:
                return row
        raise KeyError(selector)

    def eff_gamma(self) -> dict[str, float]:
        return {row.selector: row.eff_gamma for row in self.rows}

    def eff_quantile(self) -> dict[str, float]:
        return {row.selector: row.eff_q for row in self.rows}

    def to_frame(self) -> pd.DataFrame:
        records = [
            {
                "distribution": self.spec.name,
                "n": self.n,
                "reps": self.reps,
                "selector": row.selector,
                "mean_gamma": row.mean_gamma,
                "rmse_gamma": row.rmse_gamma,
                "eff_gamma": row.eff_gamma,
                "eff_q": row.eff_q,
                "mean_k": row.mean_k,
                "sd_k": row.sd_k,
                "k_opt_emp": self.k_opt_empirical,
                "seed": self.seed.base_seed,
            }
            for row in self.rows
        ]
        return pd.DataFrame(records, columns=CSV_COLUMNS)


def empirical_kopt(
    spec: DistributionSpec, n: int, seed: SeedSpec, protocol: KoptProtocol = KoptProtocol()
) -> int:
    """
    Rounded mean over groups of the fraction minimizing the empirical MSE of the Hill estimator,
    each group averaging squared errors over ``samples_per_group`` samples of size ``n``.
    """
    gamma = spec.true_gamma
    minimizers = []
    for group in range(protocol.groups):
        rng = seed.generator(KOPT_STREAM, group)
        squared = np.zeros(n)
        counts = np.zeros(n)
        remaining = protocol.samples_per_group
        while remaining:
            rows = min(KOPT_CHUNK, remaining)
            errors = (hill_matrix(sorted_batch(spec, rows, n, rng)) - gamma) ** 2
            squared += np.nansum(errors, axis=0)
            counts += np.sum(np.isfinite(errors), axis=0)
            remaining -= rows
        with np.errstate(invalid="ignore", divide="ignore"):
            mse = np.where(counts > 0, squared / counts, np.nan)
        minimizers.append(1 + argmin_first(mse[1:]))
    k_opt = int(math.floor(float(np.mean(minimizers)) + 0.5))
    LOG.debug(f"empirical k_opt for {spec.name}, n={n}: {k_opt} (group minimizers {minimizers})")
    return k_opt


@dataclass(frozen=True)
class _Outcome:
    k_hat: float = math.nan
    gamma_hat: float = math.nan
    q_hat: float = math.nan
    error: Optional[str] = None
    quantile_error: Optional[str] = None


def _quantile(sample: SortedSample, k: int, p: float) -> tuple[float, Optional[str]]:
    try:
        return weissman_quantile(sample, k, p), None
    except (TailcutError, ValueError) as e:
        return math.nan, str(e)


def _run_replicate(config: StudyConfig, selectors: dict, k_opt: int, replicate: int):
    draw = sample(config.spec, config.n, config.seed, REPLICATE_STREAM, replicate)
    outcomes = {}
    for name, selector in selectors.items():
        try:
            result = selector(draw)
        except TailcutError as e:
            outcomes[name] = _Outcome(error=f"{type(e).__name__}: {e}")
            continue
        except Exception as e:
            LOG.exception(f"selector {name} crashed on replicate {replicate}")
            outcomes[name] = _Outcome(error=f"{type(e).__name__}: {e}")
            continue
        q_hat, q_error = _quantile(draw, result.k_hat, config.p)
        outcomes[name] = _Outcome(result.k_hat, result.gamma_hat, q_hat, quantile_error=q_error)

    # oracle denominators use the estimates at the empirical optimum on every sample
    oracle_gamma = float(trace(draw).hill[k_opt])
    oracle_q, _ = _quantile(draw, k_opt, config.p)
    return outcomes, oracle_gamma, oracle_q


def _rmse(estimates: np.ndarray, target: float) -> float:
    estimates = estimates[np.isfinite(estimates)]
    if estimates.size == 0:
        return math.nan
    return float(np.sqrt(np.mean((estimates - target) ** 2)))


def _ratio(numerator: float, denominator: float) -> float:
    if not math.isfinite(denominator) or denominator == 0:
        return math.nan
    return numerator / denominator


def run_table(
    config: StudyConfig,
    registry: Optional[SelectorRegistry] = None,
    k_opt: Optional[int] = None,
) -> EffReport:
    """
    Run the study. Replicates are computed concurrently and assembled by replicate index, so the
    report depends only on the configuration.

    :param config: the study
    :param registry: selector registry, the built-in one by default
    :param k_opt: precomputed empirical optimal fraction (computed from the seed if omitted)
    """
    registry = registry or REGISTRY
    spec, gamma = config.spec, config.spec.true_gamma
    if k_opt is None:
        k_opt = empirical_kopt(spec, config.n, config.seed, config.kopt_protocol)
    if not 1 <= k_opt <= config.n - 1:
        raise ValueError(f"optimal fraction {k_opt} outside 1..{config.n - 1}")
    context = SelectorContext(spec=spec, n=config.n, k_opt=k_opt)
    selectors = {name: registry.resolve(name, context) for name in config.selectors}
    q_true = spec.true_quantile(config.p)

    threads = config.threads or default_threads()
    LOG.debug(f"running {config.reps} replicates of {spec.name} (n={config.n}) on {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as executor:
        results = list(
            executor.map(
                lambda r: _run_replicate(config, selectors, k_opt, r), range(config.reps)
            )
        )

    oracle_gamma = np.array([r[1] for r in results])
    oracle_q = np.array([r[2] for r in results])
    denominator_gamma = _rmse(oracle_gamma, gamma)
    denominator_q = _rmse(oracle_q / q_true, 1.0)

    rows, failures = [], []
    for name in config.selectors:
        outcomes = [r[0][name] for r in results]
        failed = [i for i, o in enumerate(outcomes) if o.error is not None]
        failures.extend(ReplicateFailure(i, name, outcomes[i].error) for i in failed)
        if failed:
            LOG.warning(f"{name}: {len(failed)} of {config.reps} replicates failed and are excluded")
        k_hat = np.array([o.k_hat for o in outcomes if o.error is None], dtype=float)
        gamma_hat = np.array([o.gamma_hat for o in outcomes if o.error is None], dtype=float)
        q_hat = np.array([o.q_hat for o in outcomes if o.error is None], dtype=float)
        quantile_failures = int(np.count_nonzero(~np.isfinite(q_hat)))
        rmse_gamma = _rmse(gamma_hat, gamma)
        rows.append(
            SelectorSummary(
                selector=name,
                mean_gamma=float(np.mean(gamma_hat)) if gamma_hat.size else math.nan,
                rmse_gamma=rmse_gamma,
                eff_gamma=_ratio(rmse_gamma, denominator_gamma),
                eff_q=_ratio(_rmse(q_hat / q_true, 1.0), denominator_q),
                mean_k=float(np.mean(k_hat)) if k_hat.size else math.nan,
                sd_k=float(np.std(k_hat, ddof=1)) if k_hat.size > 1 else math.nan,
                failures=len(failed),
                quantile_failures=quantile_failures,
            )
        )
    return EffReport(
        spec=spec,
        n=config.n,
        reps=config.reps,
        seed=config.seed,
        k_opt_empirical=k_opt,
        rows=tuple(rows),
        failures=tuple(failures),
    )


def eff_gamma(config: StudyConfig, **kwargs) -> dict[str, float]:
    return run_table(config, **kwargs).eff_gamma()


def eff_quantile(config: StudyConfig, **kwargs) -> dict[str, float]:
    return run_table(config, **kwargs).eff_quantile()


def render_csv(report: EffReport) -> str:
    return report.to_frame().to_csv(index=False, float_format="%.6g", lineterminator="\n")


def write_csv(report: EffReport, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fd:
        fd.write(render_csv(report))


def summary_table(report: EffReport) -> Table:
    table = Table(
        title=f"{report.spec.name}, n={report.n}, {report.reps} replicates, "
        f"k_opt={report.k_opt_empirical}"
    )
    for column in ("selector", "mean γ", "RMSE", "EFF_γ", "EFF_q", "mean k", "sd k", "failed"):
        table.add_column(column, justify="left" if column == "selector" else "right")
    for row in report.rows:
        failed = str(row.failures)
        if row.quantile_failures:
            failed += f" (+{row.quantile_failures} q)"
        table.add_row(
            row.selector,
            f"{row.mean_gamma:.4g}",
            f"{row.rmse_gamma:.4g}",
            f"{row.eff_gamma:.4g}",
            f"{row.eff_q:.4g}",
            f"{row.mean_k:.1f}",
            f"{row.sd_k:.1f}",
            failed,
        )
    return table
