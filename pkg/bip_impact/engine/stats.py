"""
Numerical statistics kernels: distribution tails, OLS, F-tests, VIF, AIC,
partial autocorrelation and the augmented Dickey-Fuller test.

Every function is deterministic and free of shared state, so callers may run
them from parallel workers.
"""
from __future__ import annotations

import json
import logging
import math
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, special

from ..core.config import settings
from ..core.errors import (
    AlignmentError,
    DegenerateFitError,
    DegenerateSeriesError,
    DomainError,
    InsufficientDataError,
    LengthError,
    SingularityError,
)
from ..schemas.regression import INTERCEPT, AdfResult, FTestResult, RegressionFit

logger = logging.getLogger(__name__)

AIC_TIE_TOLERANCE = 1e-12


# -------- Distribution tails --------
def _t_two_sided(t: np.ndarray, df: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(np.isnan(t)):
        raise DomainError("t statistic is NaN")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        x = np.where(np.isinf(t), 0.0, df / (df + t * t))
    return np.clip(special.betainc(df / 2.0, 0.5, x), 0.0, 1.0)


def student_t_two_sided_p(t: float, df: float) -> float:
    """2 * P(T_df >= |t|) through the regularized incomplete beta function"""
    if not df >= 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {df}")
    return float(_t_two_sided(np.asarray(t), float(df)))


def f_upper_tail_p(f: float, df1: float, df2: float) -> float:
    """P(F_{df1,df2} >= f) through the regularized incomplete beta function"""
    if not (df1 >= 1 and df2 >= 1):
        raise DomainError(f"degrees of freedom must be >= 1, got ({df1}, {df2})")
    if math.isnan(f) or f < 0:
        raise DomainError(f"F statistic must be >= 0, got {f}")
    if math.isinf(f):
        return 0.0
    x = df2 / (df2 + df1 * f)
    return float(min(max(special.betainc(df2 / 2.0, df1 / 2.0, x), 0.0), 1.0))


# -------- Least squares --------
def lag_matrix(values: np.ndarray, lags: Sequence[int], start: int) -> np.ndarray:
    """Columns values[t - lag] for rows t = start .. len(values) - 1"""
    n = len(values)
    if not lags:
        return np.empty((n - start, 0))
    return np.column_stack([values[start - lag : n - lag] for lag in lags])


def _dependent_columns(X: np.ndarray, names: Sequence[str]) -> List[str]:
    kept: List[int] = []
    dependent: List[str] = []
    for j in range(X.shape[1]):
        candidate = kept + [j]
        if np.linalg.matrix_rank(X[:, candidate]) == len(candidate):
            kept.append(j)
        else:
            dependent.append(names[j])
    return dependent


def ols_fit(
    X: np.ndarray,
    y: np.ndarray,
    intercept: bool = True,
    names: Optional[Sequence[str]] = None,
) -> RegressionFit:
    """
    Ordinary least squares through a QR decomposition.

    Standard errors come from sigma^2 (X'X)^-1 with sigma^2 = RSS / (n - k);
    t-tests are two-sided with n - k degrees of freedom. With `intercept` a
    column of ones named "const" is prepended.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    n = len(y)
    if X.shape[0] != n:
        raise AlignmentError(f"design matrix has {X.shape[0]} rows but y has {n}")

    labels = list(names) if names is not None else [f"x{i + 1}" for i in range(X.shape[1])]
    if len(labels) != X.shape[1]:
        raise DomainError(f"{len(labels)} names for {X.shape[1]} columns")
    if intercept:
        X = np.column_stack([np.ones(n), X])
        labels = [INTERCEPT] + labels

    k = X.shape[1]
    if k == 0:
        raise DomainError("regression without regressors")
    if n <= k:
        raise InsufficientDataError(f"{n} observations for {k} regressors")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DomainError("design matrix and response must be finite")
    if np.linalg.matrix_rank(X) < k:
        dependent = _dependent_columns(X, labels)
        raise SingularityError(f"design matrix is rank deficient in {dependent}", dependent)

    q, r = linalg.qr(X, mode="economic")
    beta = linalg.solve_triangular(r, q.T @ y)
    residuals = y - X @ beta
    rss = float(residuals @ residuals)
    df = n - k

    r_inv = linalg.solve_triangular(r, np.eye(k))
    se = np.sqrt(rss / df * np.sum(r_inv * r_inv, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / np.where(se > 0, se, 1.0), np.copysign(np.inf, beta))
    t = np.where((se == 0) & (beta == 0), 0.0, t)
    p = _t_two_sided(t, float(df))

    return RegressionFit(
        names=tuple(labels),
        coefficients=tuple(beta.tolist()),
        standard_errors=tuple(se.tolist()),
        t_statistics=tuple(t.tolist()),
        p_values=tuple(p.tolist()),
        residuals=tuple(residuals.tolist()),
        rss=rss,
        n_observations=n,
        has_intercept=intercept,
    )


def vif(X: np.ndarray) -> np.ndarray:
    """
    Variance inflation factor of every column: 1 / (1 - R^2) of that column
    regressed on the others plus an intercept. Perfect collinearity gives inf.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise DomainError("VIF needs a design matrix with at least 2 columns")
    n, k = X.shape
    out = np.empty(k)
    for j in range(k):
        target = X[:, j]
        others = np.column_stack([np.ones(n), np.delete(X, j, axis=1)])
        centered = target - target.mean()
        tss = float(centered @ centered)
        if tss <= np.finfo(float).eps * max(1.0, float(target @ target)):
            out[j] = np.inf
            continue
        beta, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ beta
        rss = float(resid @ resid)
        out[j] = np.inf if rss <= 1e-12 * tss else max(tss / rss, 1.0)
    return out


def aic(rss: float, n: int, k: int) -> float:
    """n ln(RSS/n) + 2k; -inf for an exact fit and +inf for a non-finite RSS"""
    if n <= 0:
        raise DomainError(f"AIC needs n > 0, got {n}")
    if not math.isfinite(rss):
        return math.inf
    if rss < 0:
        raise DomainError(f"RSS cannot be negative, got {rss}")
    if rss == 0:
        return -math.inf
    return n * math.log(rss / n) + 2 * k


def f_test_nested(nested: RegressionFit, parent: RegressionFit) -> FTestResult:
    """F-test of the regressors the parent adds to the nested model"""
    if nested.n_observations != parent.n_observations:
        raise AlignmentError(
            f"nested model has {nested.n_observations} rows, parent {parent.n_observations}"
        )
    extra = parent.k - nested.k
    if extra < 1:
        raise DomainError("parent model must have strictly more regressors than the nested one")
    if parent.rss == 0:
        raise DegenerateFitError("parent model fits exactly (RSS = 0)")
    df_den = parent.df_resid
    f = ((nested.rss - parent.rss) / extra) / (parent.rss / df_den)
    # Round-off can push an absent RSS reduction slightly below zero
    f = max(f, 0.0)
    return FTestResult(
        f_statistic=f,
        p_value=f_upper_tail_p(f, extra, df_den),
        df_numerator=extra,
        df_denominator=df_den,
    )


# -------- Autocorrelation --------
def _autocovariances(x: np.ndarray, max_lag: int) -> np.ndarray:
    centered = x - x.mean()
    n = len(x)
    return np.array([centered[k:] @ centered[: n - k] / n for k in range(max_lag + 1)])


def pacf(ts: Sequence[float], max_lag: int) -> np.ndarray:
    """
    Partial autocorrelations at lags 1..max_lag from the biased sample
    autocovariances through the Durbin-Levinson recursion.
    """
    x = np.asarray(ts, dtype=float)
    if max_lag < 1:
        raise DomainError(f"max_lag must be >= 1, got {max_lag}")
    if len(x) <= max_lag + 1:
        raise LengthError(f"PACF to lag {max_lag} needs more than {max_lag + 1} points, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise DomainError("PACF input must be finite")
    if np.ptp(x) == 0:
        raise DegenerateSeriesError("PACF of a zero-variance series is undefined")

    gamma = _autocovariances(x, max_lag)
    out = np.zeros(max_lag)
    phi = np.zeros(0)
    v = gamma[0]
    for k in range(1, max_lag + 1):
        if v <= 0:
            break
        # gamma[k-1:0:-1] lines up gamma[k-j] with phi_{k-1,j}
        phi_kk = (gamma[k] - phi @ gamma[k - 1 : 0 : -1]) / v
        phi_kk = min(max(phi_kk, -1.0), 1.0)
        phi = np.append(phi - phi_kk * phi[::-1], phi_kk)
        v *= 1.0 - phi_kk * phi_kk
        out[k - 1] = phi_kk
    return out


# -------- Unit root --------
@lru_cache(maxsize=None)
def _critical_value_table(path: str) -> dict:
    with Path(path).open("r", encoding="utf-8") as f:
        table = json.load(f)
    logger.debug("Loaded critical value surfaces from %s", path)
    return table


def mackinnon_critical_value(n_variables: int, nobs: int, level: str = "5%") -> float:
    """
    Finite-sample critical value b0 + b1/T + b2/T^2 + b3/T^3 of the
    constant-only Dickey-Fuller distribution. `n_variables` is 1 for a plain
    ADF test and 2 for Engle-Granger residuals of a single regressor.
    """
    table = _critical_value_table(str(settings.resources_dir / "mackinnon_critical_values.json"))
    try:
        b = table["constant"][str(n_variables)][level]
    except KeyError as e:
        raise DomainError(f"no critical value surface for N={n_variables} at {level}") from e
    if nobs < 1:
        raise DomainError(f"sample size must be positive, got {nobs}")
    return float(sum(coef / nobs**power for power, coef in enumerate(b)))


def default_adf_max_lag(n: int) -> int:
    """Schwert's rule floor(12 (n/100)^(1/4)), capped so every candidate stays estimable"""
    return max(0, min(int(12 * (n / 100.0) ** 0.25), (n - 4) // 2))


def adf_test(ts: Sequence[float], max_lag: int, n_variables: int = 1) -> AdfResult:
    """
    Augmented Dickey-Fuller test with a constant and no trend:
    dy_t = c + gamma y_{t-1} + sum_i delta_i dy_{t-i}. Augmentation lags
    0..max_lag are compared by AIC on the sample implied by max_lag.
    """
    y = np.asarray(ts, dtype=float)
    n = len(y)
    if max_lag < 0:
        raise DomainError(f"max_lag must be >= 0, got {max_lag}")
    # Lag 0 still needs more rows than its two regressors once max_lag rows are dropped
    if n <= max_lag + 3:
        raise LengthError(f"ADF with {max_lag} lags needs more than {max_lag + 3} points, got {n}")
    if np.ptp(y) == 0:
        raise DegenerateSeriesError("ADF on a constant series")

    dy = np.diff(y)
    rows = np.arange(max_lag, n - 1)
    target = dy[rows]
    level = y[rows]

    best: Optional[Tuple[int, RegressionFit, float]] = None
    for lag in range(max_lag + 1):
        X = np.column_stack([level] + [dy[rows - i] for i in range(1, lag + 1)])
        names = ["level"] + [f"dlag{i}" for i in range(1, lag + 1)]
        try:
            fit = ols_fit(X, target, intercept=True, names=names)
        except (SingularityError, InsufficientDataError):
            continue
        score = aic(fit.rss, fit.n_observations, fit.k)
        if not math.isfinite(score):
            continue
        if best is None or score < best[2] - AIC_TIE_TOLERANCE:
            best = (lag, fit, score)

    if best is None:
        raise DegenerateSeriesError("no estimable ADF regression")
    lag, fit, _ = best
    statistic = fit.t_statistics[fit.names.index("level")]
    critical = mackinnon_critical_value(n_variables, fit.n_observations)
    return AdfResult(
        test_statistic=statistic,
        critical_value_5pct=critical,
        lag_used=lag,
        n_observations=fit.n_observations,
        reject_unit_root=statistic < critical,
    )
