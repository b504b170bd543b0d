"""
Numerical checks of the asymptotic theory.

Each check computes a handful of quantities (mostly by Monte-Carlo over exact Pareto or
exponential samples) and compares them against their theoretical targets. The comparison is a
DeepDiff with ``math_epsilon`` as the tolerance; relative tolerances are expressed by comparing
``computed / target`` against 1.
"""
import inspect
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Optional

import numpy as np
from deepdiff import DeepDiff

from tailcut.errors import UnknownName
from tailcut.estimators.core import hill_matrix
from tailcut.estimators.ihs import (
    c_of_k,
    c_of_k_continued_fraction,
    expected_ihs_h0,
    ihs,
    ise_decomposition,
    mise_h0,
)
from tailcut.simulation.distributions import DEFAULT_SEED, SeedSpec, pareto, sorted_batch
from tailcut.theory.asymptotics import (
    PQR_COVARIANCE,
    HallModel,
    amse_grid_argmin,
    averaged_hill_variance_limit,
    bias_mean_limit,
    bias_variance_limit,
    cov_rp_limit,
    cov_rr_limit,
    k_opt_closed,
    kopt_ratio_table,
    pqr_matrix,
    pqr_weights,
    upper_mean_variance_limit,
)

LOG = logging.getLogger(__name__)

CHUNK_SIZE = 500


@dataclass(frozen=True)
class Expectation:
    key: str
    target: Any
    tolerance: float
    relative: bool = False


def _plain(value):
    return np.asarray(value).tolist()


class CheckResult:
    def __init__(
        self,
        name: str,
        computed: dict,
        expectations: list[Expectation],
        parameters: Optional[dict] = None,
    ):
        self.name = name
        self.computed = computed
        self.expectations = expectations
        self.parameters = parameters or {}
        self.diffs = [self._compare(e) for e in expectations]

    def _compare(self, expectation: Expectation) -> DeepDiff:
        actual = self.computed[expectation.key]
        if expectation.relative:
            target = np.asarray(expectation.target, dtype=float)
            expected = np.ones_like(target).tolist()
            actual = (np.asarray(actual, dtype=float) / target).tolist()
        else:
            expected = _plain(expectation.target)
            actual = _plain(actual)
        return DeepDiff(
            {expectation.key: expected},
            {expectation.key: actual},
            math_epsilon=expectation.tolerance,
            ignore_numeric_type_changes=True,
            verbose_level=2,
            view="tree",
        )

    def failed(self) -> list[tuple[Expectation, DeepDiff]]:
        return [(e, d) for e, d in zip(self.expectations, self.diffs) if d]

    def __bool__(self) -> bool:
        return not any(self.diffs)

    def __repr__(self):
        status = "passed" if self else "failed"
        return f"CheckResult({self.name!r}, {status})"

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "passed": bool(self),
            "parameters": self.parameters,
            "computed": self.computed,
            "expectations": [
                {
                    "key": e.key,
                    "target": e.target,
                    "tolerance": e.tolerance,
                    "relative": e.relative,
                    "passed": not d,
                }
                for e, d in zip(self.expectations, self.diffs)
            ],
        }


class CheckAssertionError(AssertionError):
    def __init__(self, msg: str, result: list[CheckResult]):
        self.msg = msg
        self.result = result
        super(CheckAssertionError, self).__init__(msg)


def assert_checks(*results: CheckResult) -> None:
    failed = [r for r in results if not r]
    if failed:
        names = ", ".join(r.name for r in failed)
        raise CheckAssertionError(f"theory checks failed: {names}", list(results))


def _chunks(reps: int, size: int = CHUNK_SIZE) -> Iterator[tuple[int, int]]:
    for index, start in enumerate(range(0, reps, size)):
        yield index, min(size, reps - start)


def _pareto_hill_curves(gamma: float, n: int, reps: int, seed: SeedSpec) -> Iterator[np.ndarray]:
    spec = pareto(gamma)
    for index, count in _chunks(reps):
        yield hill_matrix(sorted_batch(spec, count, n, seed.generator(index)))


def _seed(seed: Optional[SeedSpec]) -> SeedSpec:
    return seed if seed is not None else SeedSpec(DEFAULT_SEED)


# (key, row, column, absolute tolerance); the Q entries carry the largest sampling error, the
# standard error of Var(Q) being close to 0.4 at 5000 replicates
PQR_ENTRIES = (
    ("var_p", 0, 0, 0.15),
    ("var_r", 2, 2, 0.15),
    ("cov_pr", 0, 2, 0.15),
    ("cov_pq", 0, 1, 0.3),
    ("cov_qr", 1, 2, 0.3),
    ("var_q", 1, 1, 1.2),
)


def check_pqr(*, k: int = 2000, reps: int = 5000, seed: Optional[SeedSpec] = None) -> CheckResult:
    """Empirical covariance of (P, Q, R) over standard exponential samples."""
    seed = _seed(seed)
    rows = np.concatenate(
        [pqr_matrix(seed.generator(i).standard_exponential((c, k)), k) for i, c in _chunks(reps)]
    )
    covariance = np.cov(rows, rowvar=False)
    computed = {key: float(covariance[i, j]) for key, i, j, _ in PQR_ENTRIES}
    return CheckResult(
        "pqr",
        {**computed, "covariance": covariance.tolist(), "mean": rows.mean(axis=0).tolist()},
        [Expectation(key, PQR_COVARIANCE[i][j], tol) for key, i, j, tol in PQR_ENTRIES],
        {"k": k, "reps": reps, "seed": seed.base_seed},
    )


def check_hill_gamma(
    *, gamma: float = 1.0, k: int = 50, reps: int = 10_000, seed: Optional[SeedSpec] = None
) -> CheckResult:
    """Under exact Pareto tails the Hill estimator is Gamma(k, gamma/k)."""
    seed = _seed(seed)
    values = np.concatenate([h[:, k] for h in _pareto_hill_curves(gamma, k + 1, reps, seed)])
    return CheckResult(
        "hill-gamma",
        {"mean_hill": float(values.mean()), "var_hill": float(values.var(ddof=1))},
        [
            Expectation("mean_hill", gamma, 0.01 * gamma),
            Expectation("var_hill", gamma**2 / k, 0.1, relative=True),
        ],
        {"gamma": gamma, "k": k, "reps": reps, "seed": seed.base_seed},
    )


def check_delta_method(
    *, gamma: float = 1.0, k: int = 1000, reps: int = 2000, seed: Optional[SeedSpec] = None
) -> CheckResult:
    """Var(sqrt(k) (1/hill - 1/gamma)) -> 1/gamma^2"""
    seed = _seed(seed)
    values = np.concatenate([h[:, k] for h in _pareto_hill_curves(gamma, k + 1, reps, seed)])
    scaled = math.sqrt(k) * (1 / values - 1 / gamma)
    return CheckResult(
        "delta-method",
        {"var_inverse_hill": float(scaled.var(ddof=1))},
        [Expectation("var_inverse_hill", 1 / gamma**2, 0.1, relative=True)],
        {"gamma": gamma, "k": k, "reps": reps, "seed": seed.base_seed},
    )


def check_bias_variance(
    *,
    gamma: float = 1.0,
    k: int = 500,
    K: int = 1000,
    reps: int = 2000,
    seed: Optional[SeedSpec] = None,
) -> CheckResult:
    """Variance of the bias proxy and of the averaged Hill estimator under exact Pareto tails."""
    if not 2 <= k < K:
        raise ValueError(f"need 2 <= k < K, got k={k}, K={K}")
    seed = _seed(seed)
    b_bar, averaged = [], []
    for hills in _pareto_hill_curves(gamma, K + 1, reps, seed):
        cs = np.cumsum(hills[:, 1 : K + 1], axis=1)
        mean_K = cs[:, K - 1] / K
        upper = (cs[:, K - 1] - cs[:, k - 2]) / (K - k + 1)
        b_bar.append(upper - mean_K)
        averaged.append(cs[:, k - 1] / k)
    b_bar = np.concatenate(b_bar)
    averaged = np.concatenate(averaged)
    c = k / K
    return CheckResult(
        "bias-variance",
        {
            "mean_b_bar": float(b_bar.mean()),
            "var_b_bar": float(k * b_bar.var(ddof=1)),
            "var_averaged_hill": float(k * averaged.var(ddof=1)),
        },
        [
            Expectation("mean_b_bar", 0.0, 0.02),
            Expectation("var_b_bar", bias_variance_limit(c, gamma), 0.15, relative=True),
            Expectation(
                "var_averaged_hill", averaged_hill_variance_limit(gamma), 0.15, relative=True
            ),
        ],
        {"gamma": gamma, "k": k, "K": K, "reps": reps, "seed": seed.base_seed},
    )


def _hall_batch(m: HallModel, count: int, rng: np.random.Generator) -> np.ndarray:
    """Ascending samples from U(t) = t^gamma exp(c_A t^rho / rho), for which A(t) = c_A t^rho."""
    v = 1 - rng.random((count, m.n))
    return np.sort(v ** (-m.gamma) * np.exp(m.c_A * v ** (-m.rho) / m.rho), axis=1)


def check_bias_mean(
    *,
    gamma: float = 1.0,
    rho: float = -1.0,
    c: float = 1.0,
    n: int = 2000,
    k: int = 200,
    K: int = 400,
    reps: int = 2000,
    seed: Optional[SeedSpec] = None,
) -> CheckResult:
    """Mean of the bias proxy b_up(K, k) against its asymptotic value under a second order model."""
    if not 2 <= k < K < n:
        raise ValueError(f"need 2 <= k < K < n, got k={k}, K={K}, n={n}")
    seed = _seed(seed)
    m = HallModel(gamma=gamma, rho=rho, c_A=c, n=n)
    b_bar = []
    for index, count in _chunks(reps):
        hills = hill_matrix(_hall_batch(m, count, seed.generator(index)))
        cs = np.cumsum(hills[:, 1 : K + 1], axis=1)
        b_bar.append((cs[:, K - 1] - cs[:, k - 2]) / (K - k + 1) - cs[:, K - 1] / K)
    b_bar = np.concatenate(b_bar)
    return CheckResult(
        "bias-mean",
        {"mean_b_bar": float(b_bar.mean())},
        [Expectation("mean_b_bar", bias_mean_limit(m, k, K), 0.15, relative=True)],
        {
            "gamma": gamma,
            "rho": rho,
            "c_A": c,
            "n": n,
            "k": k,
            "K": K,
            "lambda": m.lam(k),
            "reps": reps,
            "seed": seed.base_seed,
        },
    )


def check_upper_mean(
    *,
    gamma: float = 1.0,
    k: int = 500,
    c: float = 0.5,
    reps: int = 2000,
    seed: Optional[SeedSpec] = None,
) -> CheckResult:
    """Upper-mean variance under exact Pareto tails and the limiting covariances of R_K with R_k, P_k."""
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    seed = _seed(seed)
    K = int(round(k / c))
    upper = []
    for hills in _pareto_hill_curves(gamma, K + 1, reps, seed):
        cs = np.cumsum(hills[:, 1 : K + 1], axis=1)
        upper.append((cs[:, K - 1] - cs[:, k - 2]) / (K - k + 1))
    upper = np.concatenate(upper)

    # R_K, R_k and P_k share one exponential stream
    weights_K, weights_k = pqr_weights(K), pqr_weights(k)
    shared = []
    exponential_seed = seed.child(seed.stream_index + 1)
    for index, count in _chunks(reps):
        E = exponential_seed.generator(index).standard_exponential((count, K))
        R_K = math.sqrt(K) * ((E * weights_K).mean(axis=1) - 1)
        R_k = math.sqrt(k) * ((E[:, :k] * weights_k).mean(axis=1) - 1)
        P_k = math.sqrt(k) * (E[:, :k].mean(axis=1) - 1)
        shared.append(np.column_stack([R_K, R_k, P_k]))
    covariance = np.cov(np.concatenate(shared), rowvar=False)
    c_used = k / K
    return CheckResult(
        "upper-mean",
        {
            "var_upper_mean": float(k * upper.var(ddof=1)),
            "cov_rr": float(covariance[0, 1]),
            "cov_rp": float(covariance[0, 2]),
        },
        [
            Expectation(
                "var_upper_mean", upper_mean_variance_limit(c_used, gamma), 0.15, relative=True
            ),
            Expectation("cov_rr", cov_rr_limit(c_used), 0.1, relative=True),
            Expectation("cov_rp", cov_rp_limit(c_used), 0.1, relative=True),
        ],
        {"gamma": gamma, "k": k, "K": K, "reps": reps, "seed": seed.base_seed},
    )


def check_kopt_ratio(
    *,
    rhos: Iterable[float] = (-0.5, -1.0, -2.0),
    ns: Iterable[int] = (500, 5000, 50_000),
    gamma: float = 1.0,
    c: float = 1.0,
) -> CheckResult:
    rhos, ns = [float(r) for r in rhos], sorted(int(n) for n in ns)
    table = kopt_ratio_table(rhos, ns, gamma=gamma, c=c)
    decreasing = all(
        bool(np.all(np.diff(group.sort_values("n")["ratio"].to_numpy()) < 0))
        for _, group in table.groupby("rho")
    )
    gaps = [
        abs(k_opt_closed(m) - amse_grid_argmin(m))
        for m in (HallModel(gamma, rho, c, n) for rho in rhos for n in ns)
    ]
    return CheckResult(
        "kopt-ratio",
        {
            "table": table.to_dict(orient="records"),
            "ratio_decreasing_in_n": decreasing,
            "max_grid_gap": int(max(gaps)),
        },
        [
            Expectation("ratio_decreasing_in_n", True, 0),
            Expectation("max_grid_gap", 0, 1),
        ],
        {"rhos": rhos, "ns": ns, "gamma": gamma, "c": c},
    )


def check_c_of_k(*, ks: Iterable[int] = (5, 20, 100)) -> CheckResult:
    ks = [int(k) for k in ks]
    quad = [c_of_k(k) for k in ks]
    continued = [c_of_k_continued_fraction(k) for k in ks]
    gaps = np.abs(np.array([c_of_k(k) for k in range(5, 201)]) - 1)
    mise = np.array([mise_h0(k, 1.0) for k in range(2, 501)])
    return CheckResult(
        "c-of-k",
        {
            "c_quadrature": quad,
            "c_gap_50": float(abs(c_of_k(50) - 1)),
            "c_gap_decreasing": bool(np.all(np.diff(gaps) < 0)),
            "mise_decreasing": bool(np.all(np.diff(mise) < 0)),
        },
        [
            Expectation("c_quadrature", continued, 1e-6, relative=True),
            Expectation("c_gap_50", 0.0, 0.02),
            Expectation("c_gap_decreasing", True, 0),
            Expectation("mise_decreasing", True, 0),
        ],
        {"ks": ks},
    )


def check_ihs_ise(*, reps: int = 10_000, seed: Optional[SeedSpec] = None) -> CheckResult:
    """IHS + 1/(2 gamma) equals the ISE decomposition for arbitrary (gamma, gamma_hat, k)."""
    seed = _seed(seed)
    rng = seed.generator()
    gammas = rng.uniform(0.1, 5.0, reps)
    gamma_hats = rng.uniform(0.1, 5.0, reps)
    ks = rng.integers(2, 1001, reps)
    deviation = 0.0
    for gamma, gamma_hat, k in zip(gammas, gamma_hats, ks):
        lhs = ihs(gamma_hat, int(k)) + 1 / (2 * gamma)
        rhs = ise_decomposition(gamma_hat, gamma, int(k))
        deviation = max(deviation, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return CheckResult(
        "ihs-ise",
        {"max_deviation": deviation},
        [Expectation("max_deviation", 0.0, 1e-12)],
        {"reps": reps, "seed": seed.base_seed},
    )


def check_ihs_mean(
    *, gamma: float = 1.0, k: int = 10, reps: int = 20_000, seed: Optional[SeedSpec] = None
) -> CheckResult:
    """E[IHS(k)] + 1/(2 gamma) = 3/(2 gamma (k-1)) for exact Pareto tails."""
    seed = _seed(seed)
    values = np.concatenate([h[:, k] for h in _pareto_hill_curves(gamma, k + 1, reps, seed)])
    shifted = (4 - k) / (2 * values * k) + 1 / (2 * gamma)
    return CheckResult(
        "ihs-mean",
        {"mean_shifted_ihs": float(shifted.mean())},
        [
            Expectation(
                "mean_shifted_ihs",
                expected_ihs_h0(k, gamma) + 1 / (2 * gamma),
                0.05,
                relative=True,
            )
        ],
        {"gamma": gamma, "k": k, "reps": reps, "seed": seed.base_seed},
    )


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "pqr": check_pqr,
    "bias-variance": check_bias_variance,
    "bias-mean": check_bias_mean,
    "upper-mean": check_upper_mean,
    "kopt-ratio": check_kopt_ratio,
    "c-of-k": check_c_of_k,
    "hill-gamma": check_hill_gamma,
    "delta-method": check_delta_method,
    "ihs-ise": check_ihs_ise,
    "ihs-mean": check_ihs_mean,
}


def run_check(name: str, **options) -> CheckResult:
    """Run a check by name; options the check does not accept are ignored."""
    try:
        check = CHECKS[name]
    except KeyError:
        raise UnknownName(name, kind="check")
    accepted = inspect.signature(check).parameters
    kwargs = {key: value for key, value in options.items() if key in accepted and value is not None}
    LOG.debug(f"running check {name} with {kwargs}")
    return check(**kwargs)
