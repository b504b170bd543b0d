"""
Closed-form asymptotics of the Hill estimator under a Hall-type second order model
``A(t) = c t^rho`` and the exponential-sample statistics P, Q and R whose joint normal
limit drives the variance results for averaged Hill estimators.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from tailcut.errors import InvalidTailProbability
from tailcut.estimators.samsee import delta_rho, nu

# limiting covariance of (P, Q, R)
PQR_COVARIANCE = ((1.0, 4.0, 1.0), (4.0, 20.0, 4.0), (1.0, 4.0, 2.0))


@dataclass(frozen=True)
class HallModel:
    gamma: float
    rho: float
    c_A: float
    n: int

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.rho >= 0:
            raise ValueError("rho must be negative")
        if self.n < 2:
            raise ValueError("n must be at least 2")

    def A(self, t):
        return self.c_A * np.power(t, self.rho)

    def lam(self, k: int) -> float:
        """sqrt(k) A(n/k)"""
        return float(math.sqrt(k) * self.A(self.n / k))


def amse_closed(m: HallModel, k) -> float:
    """gamma^2/k + A(n/k)^2/(1-rho)^2"""
    k = np.asarray(k, dtype=float)
    value = m.gamma**2 / k + m.A(m.n / k) ** 2 / (1 - m.rho) ** 2
    return float(value) if value.ndim == 0 else value


def _clip_fraction(value: float, n: int) -> int:
    if not math.isfinite(value):
        return n - 1
    return int(min(max(math.floor(value), 1), n - 1))


def k_opt_closed(m: HallModel) -> int:
    if m.c_A == 0:
        return m.n - 1
    rho = m.rho
    scale = (m.gamma**2 * (1 - rho) ** 2 / (-2 * rho * m.c_A**2)) ** (1 / (1 - 2 * rho))
    return _clip_fraction(scale * m.n ** (-2 * rho / (1 - 2 * rho)), m.n)


def k_ihs_closed(m: HallModel) -> int:
    """Asymptotic minimizer of E[IHS]; the negative-bias variant only needs |c|."""
    if m.c_A == 0:
        return m.n - 1
    rho = m.rho
    scale = (4 * m.gamma * (1 - rho) / (-rho * abs(m.c_A))) ** (1 / (1 - rho))
    return _clip_fraction(scale * m.n ** (-rho / (1 - rho)), m.n)


def amse_grid_argmin(m: HallModel) -> int:
    ks = np.arange(1, m.n)
    return int(ks[np.argmin(amse_closed(m, ks))])


def kopt_ratio_table(
    rhos: Iterable[float], ns: Iterable[int], gamma: float = 1.0, c: float = 1.0
) -> pd.DataFrame:
    rows = []
    for rho in rhos:
        for n in ns:
            m = HallModel(gamma=gamma, rho=float(rho), c_A=c, n=int(n))
            k_opt, k_ihs = k_opt_closed(m), k_ihs_closed(m)
            rows.append(
                {"rho": m.rho, "n": m.n, "k_opt": k_opt, "k_ihs": k_ihs, "ratio": k_ihs / k_opt}
            )
    return pd.DataFrame(rows, columns=["rho", "n", "k_opt", "k_ihs", "ratio"])


def harmonic_tails(k: int) -> np.ndarray:
    """Array ``e`` of length k + 2 with ``e[i] = sum_{l=i}^k 1/l`` for 1 <= i <= k + 1 (e[k+1] = 0)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    reciprocals = 1.0 / np.arange(1, k + 1)
    tails = np.cumsum(reciprocals[::-1])[::-1]
    return np.concatenate([[np.nan], tails, [0.0]])


def harmonic_tail(i: int, k: int) -> float:
    if not 1 <= i <= k + 1:
        raise ValueError(f"need 1 <= i <= k + 1, got i={i}, k={k}")
    return math.fsum(1.0 / l for l in range(i, k + 1))


@dataclass(frozen=True)
class PqrSample:
    P: float
    Q: float
    R: float


def pqr_weights(k: int) -> np.ndarray:
    """e_{i+1}^k for i = 1..k"""
    return harmonic_tails(k)[2:]


def pqr_matrix(exponentials: np.ndarray, k: int) -> np.ndarray:
    """P, Q and R for every row of ``exponentials`` (first k columns), shape (rows, 3)."""
    E = np.asarray(exponentials, dtype=float)
    if E.ndim == 1:
        E = E[np.newaxis, :]
    if E.shape[-1] < k:
        raise ValueError(f"need at least k={k} exponentials, got {E.shape[-1]}")
    E = E[:, :k]
    root_k = math.sqrt(k)
    P = root_k * (E.mean(axis=1) - 1)
    Q = root_k * ((E**2).mean(axis=1) - 2)
    R = root_k * ((E * pqr_weights(k)).mean(axis=1) - 1)
    return np.column_stack([P, Q, R])


def pqr_compute(exponentials: Sequence[float], k: int) -> PqrSample:
    P, Q, R = pqr_matrix(np.asarray(exponentials, dtype=float), k)[0]
    return PqrSample(P=float(P), Q=float(Q), R=float(R))


def cov_rr_limit(c: float) -> float:
    """Limit of Cov(R_K, R_k) for k/K -> c"""
    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    return (2 * c - c * math.log(c)) / math.sqrt(c)


def cov_rp_limit(c: float) -> float:
    """Limit of Cov(R_K, P_k) for k/K -> c"""
    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    return (c - c * math.log(c)) / math.sqrt(c)


def averaged_hill_variance_limit(gamma: float = 1.0) -> float:
    """Var(sqrt(k) (mean of hill_1..hill_k - gamma)) in the limit"""
    return 2 * gamma**2


def upper_mean_variance_limit(c: float, gamma: float = 1.0) -> float:
    """Var(sqrt(k) (upper mean over k..K - gamma)) in the limit, k/K -> c"""
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    return 2 * gamma**2 * c / (1 - c) * (1 + c * math.log(c) / (1 - c))


def bias_variance_limit(c: float, gamma: float = 1.0) -> float:
    """gamma^2 nu(c), the limiting variance of sqrt(k) b_up(K, k)"""
    return gamma**2 * nu(c)


def bias_mean_limit(m: HallModel, k: int, K: int) -> float:
    """Asymptotic mean of b_up(K, k): -rho A(n/k) / (1-rho)^2 * delta_rho(k/K)"""
    return float(-m.rho * m.A(m.n / k) / (1 - m.rho) ** 2 * delta_rho(k / K, m.rho))


def mseq(quantile_estimates: Sequence[float], true_q: float, k: int, n: int, p: float) -> float:
    """Relative MSE of extreme quantile estimates normalized by log(k/(np))"""
    if not 0 < p < k / n:
        raise InvalidTailProbability(p, k, n)
    q_hat = np.asarray(quantile_estimates, dtype=float)
    if q_hat.size == 0:
        raise ValueError("no quantile estimates")
    return float(np.mean((q_hat / true_q - 1) ** 2) / math.log(k / (n * p)))
