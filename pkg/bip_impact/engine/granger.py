"""
Granger-causality tests of event signals against cleaned buckets.

The "Full" test picks the AR order of y from its partial autocorrelations,
the X lag order by AIC, filters insignificant X lags by t-test and finishes
with a nested-vs-parent F-test. The "Simple" test skips selection and
filtering and compares y-lags against y-lags plus X-lags at a fixed order.
Within one test every model is fitted on the same rows.
"""
from __future__ import annotations

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats as sps

from ..core.errors import (
    AlignmentError,
    DomainError,
    DegenerateFitError,
    InsufficientDataError,
    LengthError,
    SingularityError,
)
from ..schemas.events import EventSignal
from ..schemas.granger import (
    CausalityCell,
    CausalityMatrix,
    FailureReason,
    GrangerConfig,
    GrangerDiagnostics,
    GrangerVerdict,
    Variant,
)
from ..schemas.regression import CleanedSeries, FTestResult, RegressionFit
from ..workers.pool import map_tasks
from .stats import AIC_TIE_TOLERANCE, aic, f_test_nested, lag_matrix, ols_fit, pacf

logger = logging.getLogger(__name__)


# -------- Model construction --------
def _lag_model(
    y: np.ndarray,
    x: Optional[np.ndarray],
    y_lags: Sequence[int],
    x_lags: Sequence[int],
    start: int,
    intercept: bool = True,
) -> RegressionFit:
    blocks = [lag_matrix(y, y_lags, start)]
    names = [f"y.L{lag}" for lag in y_lags]
    if x is not None and x_lags:
        blocks.append(lag_matrix(x, x_lags, start))
        names += [f"x.L{lag}" for lag in x_lags]
    return ols_fit(np.column_stack(blocks), y[start:], intercept=intercept, names=names)


def _x_lag_of(name: str) -> int:
    return int(name.split(".L", 1)[1])


def _as_vectors(x: Sequence[float], y: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise AlignmentError(f"x and y must be aligned vectors, got shapes {xv.shape} and {yv.shape}")
    return xv, yv


# -------- Full test steps --------
def select_ar_order(y: Sequence[float], cfg: GrangerConfig) -> int:
    """Largest lag whose partial autocorrelation clears z_{1-a/2}/sqrt(n); 0 if none"""
    values = np.asarray(y, dtype=float)
    partial = pacf(values, cfg.pacf_max_lag)
    threshold = sps.norm.ppf(1.0 - cfg.pacf_critical / 2.0) / math.sqrt(len(values))
    significant = np.flatnonzero(np.abs(partial) > threshold)
    return int(significant[-1] + 1) if significant.size else 0


def select_x_order(
    y: Sequence[float], x: Sequence[float], ar_order: int, cfg: GrangerConfig
) -> Optional[int]:
    """
    AIC-minimising X lag order in 1..x_max_lag on the common sample. None
    when no candidate is estimable with a finite AIC (failure a).
    """
    xv, yv = _as_vectors(x, y)
    start = max(ar_order, cfg.x_max_lag)
    y_lags = list(range(1, ar_order + 1))
    best_order: Optional[int] = None
    best_score = math.inf
    for q in range(1, cfg.x_max_lag + 1):
        try:
            fit = _lag_model(yv, xv, y_lags, list(range(1, q + 1)), start)
        except (SingularityError, InsufficientDataError) as e:
            logger.debug("X order %d skipped: %s", q, e)
            continue
        score = aic(fit.rss, fit.n_observations, fit.k)
        logger.debug("X order %d: AIC %.6f", q, score)
        if not math.isfinite(score):
            continue
        if best_order is None or score < best_score - AIC_TIE_TOLERANCE:
            best_order, best_score = q, score
    return best_order


def filter_x_lags(
    y: Sequence[float], x: Sequence[float], ar_order: int, q: int, cfg: GrangerConfig
) -> Tuple[int, ...]:
    """
    Repeatedly drop every X lag with p >= t_level (y-lags and intercept stay)
    and refit. An empty result is failure b.
    """
    if q < 1:
        raise DomainError(f"X lag order must be >= 1, got {q}")
    xv, yv = _as_vectors(x, y)
    start = max(ar_order, cfg.x_max_lag)
    y_lags = list(range(1, ar_order + 1))
    x_lags = list(range(1, q + 1))
    while x_lags:
        fit = _lag_model(yv, xv, y_lags, x_lags, start)
        dropped = {
            _x_lag_of(name)
            for name, p in zip(fit.names, fit.p_values)
            if name.startswith("x.L") and p >= cfg.t_level
        }
        if not dropped:
            break
        x_lags = [lag for lag in x_lags if lag not in dropped]
    return tuple(x_lags)


def full_granger(x: Sequence[float], y: Sequence[float], cfg: GrangerConfig) -> GrangerVerdict:
    xv, yv = _as_vectors(x, y)
    needed = cfg.pacf_max_lag + cfg.x_max_lag + 2
    if len(yv) <= needed:
        raise LengthError(f"Full test needs more than {needed} observations, got {len(yv)}")

    ar_order = select_ar_order(yv, cfg)
    start = max(ar_order, cfg.x_max_lag)
    q = select_x_order(yv, xv, ar_order, cfg)
    if q is None:
        return GrangerVerdict(
            variant=Variant.full,
            accepted=False,
            failure_reason=FailureReason.a,
            diagnostics=GrangerDiagnostics(ar_order=ar_order, sample_start=start),
        )

    survivors = filter_x_lags(yv, xv, ar_order, q, cfg)
    if not survivors:
        return GrangerVerdict(
            variant=Variant.full,
            accepted=False,
            failure_reason=FailureReason.b,
            diagnostics=GrangerDiagnostics(ar_order=ar_order, x_order=q, sample_start=start),
        )

    y_lags = list(range(1, ar_order + 1))
    nested = _lag_model(yv, None, y_lags, [], start)
    parent = _lag_model(yv, xv, y_lags, list(survivors), start)
    f_result = _f_test(nested, parent)
    diagnostics = GrangerDiagnostics(
        ar_order=ar_order,
        x_order=q,
        surviving_lags=survivors,
        nested_fit=nested,
        parent_fit=parent,
        f_result=f_result,
        sample_start=start,
        n_observations=parent.n_observations,
    )
    if f_result.p_value < cfg.f_level:
        return GrangerVerdict(
            variant=Variant.full,
            accepted=True,
            longest_significant_lag=max(survivors),
            diagnostics=diagnostics,
        )
    return GrangerVerdict(
        variant=Variant.full, accepted=False, failure_reason=FailureReason.c, diagnostics=diagnostics
    )


def _f_test(nested: RegressionFit, parent: RegressionFit) -> FTestResult:
    try:
        return f_test_nested(nested, parent)
    except DegenerateFitError:
        # The added lags explain y exactly
        if nested.rss == 0:
            raise
        extra = parent.k - nested.k
        return FTestResult(
            f_statistic=math.inf, p_value=0.0, df_numerator=extra, df_denominator=parent.df_resid
        )


# -------- Simple test --------
def simple_granger(
    x: Sequence[float],
    y: Sequence[float],
    max_lag: int,
    f_level: float,
    intercept: bool = True,
) -> GrangerVerdict:
    """Lags 1..max_lag of y against the same plus lags 1..max_lag of x"""
    xv, yv = _as_vectors(x, y)
    if max_lag < 1:
        raise DomainError(f"max_lag must be >= 1, got {max_lag}")
    needed = 2 * max_lag + 2
    if len(yv) <= needed:
        raise LengthError(f"Simple test needs more than {needed} observations, got {len(yv)}")

    lags = list(range(1, max_lag + 1))
    nested = _lag_model(yv, None, lags, [], max_lag, intercept=intercept)
    try:
        parent = _lag_model(yv, xv, lags, lags, max_lag, intercept=intercept)
    except (SingularityError, InsufficientDataError):
        return GrangerVerdict(
            variant=Variant.simple,
            accepted=False,
            failure_reason=FailureReason.a,
            diagnostics=GrangerDiagnostics(
                ar_order=max_lag, x_order=max_lag, nested_fit=nested, sample_start=max_lag
            ),
        )

    f_result = _f_test(nested, parent)
    diagnostics = GrangerDiagnostics(
        ar_order=max_lag,
        x_order=max_lag,
        surviving_lags=tuple(lags),
        nested_fit=nested,
        parent_fit=parent,
        f_result=f_result,
        sample_start=max_lag,
        n_observations=parent.n_observations,
    )
    if f_result.p_value < f_level:
        return GrangerVerdict(
            variant=Variant.simple,
            accepted=True,
            longest_significant_lag=max_lag,
            diagnostics=diagnostics,
        )
    return GrangerVerdict(
        variant=Variant.simple, accepted=False, failure_reason=FailureReason.c, diagnostics=diagnostics
    )


# -------- Matrix --------
def _aligned(signal: EventSignal, bucket: CleanedSeries) -> Tuple[np.ndarray, np.ndarray]:
    by_month = dict(zip(signal.months, signal.values))
    missing = [m for m in bucket.months if m not in by_month]
    if missing:
        raise AlignmentError(
            f"signal '{signal.name}' does not cover {len(missing)} months of '{bucket.bucket}'"
        )
    return (
        np.array([by_month[m] for m in bucket.months], dtype=float),
        np.asarray(bucket.values, dtype=float),
    )


def run_cell(
    signal: EventSignal, bucket: CleanedSeries, variant: Variant, cfg: GrangerConfig
) -> GrangerVerdict:
    x, y = _aligned(signal, bucket)
    if variant == Variant.simple:
        return simple_granger(x, y, cfg.simple_lag, cfg.f_level, intercept=cfg.simple_intercept)
    return full_granger(x, y, cfg)


def run_causality_matrix(
    signals: Sequence[EventSignal],
    buckets: Sequence[CleanedSeries],
    cfg: GrangerConfig,
    name: str = "",
    n_jobs: Optional[int] = None,
) -> CausalityMatrix:
    """
    Every (bucket, variant, signal) cell, buckets in input order and columns
    ordered Simple x signals then Full x signals. A cell that raises keeps
    its error text instead of a verdict.
    """
    variants = (Variant.simple, Variant.full)
    jobs: List[Tuple[CleanedSeries, EventSignal, Variant]] = [
        (bucket, signal, variant)
        for bucket in buckets
        for variant in variants
        for signal in signals
    ]
    outcomes = map_tasks(lambda job: run_cell(job[1], job[0], job[2], cfg), jobs, n_jobs)

    cells = []
    for outcome, (bucket, signal, variant) in zip(outcomes, jobs):
        if outcome.ok:
            cells.append(
                CausalityCell(
                    bucket=bucket.bucket, signal=signal.name, variant=variant, verdict=outcome.result
                )
            )
        else:
            logger.warning(
                "%s test of %s on %s failed: %s", variant.value, signal.name, bucket.bucket, outcome.error
            )
            cells.append(
                CausalityCell(bucket=bucket.bucket, signal=signal.name, variant=variant, error=outcome.error)
            )

    matrix = CausalityMatrix(
        name=name or f"lag {cfg.x_max_lag}",
        max_lag=cfg.x_max_lag,
        buckets=tuple(b.bucket for b in buckets),
        signals=tuple(s.name for s in signals),
        variants=variants,
        cells=cells,
    )
    accepted = sum(1 for c in cells if c.verdict is not None and c.verdict.accepted)
    logger.info("Causality matrix '%s': %d cells, %d accepted", matrix.name, len(cells), accepted)
    return matrix
