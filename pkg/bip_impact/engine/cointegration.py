"""
Engle-Granger two-step cointegration screening between features and buckets.
"""
from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from ..core.errors import AlignmentError
from ..schemas.regression import (
    AdfResult,
    CointegrationCell,
    CointegrationMatrix,
    CointegrationResult,
)
from ..schemas.timeseries import TimeSeries
from ..workers.pool import map_tasks
from .stats import adf_test, default_adf_max_lag, mackinnon_critical_value, ols_fit

logger = logging.getLogger(__name__)

MIN_SHARED_OBSERVATIONS = 30
# Residual energy below this fraction of the response's variation counts as an exact fit
DEGENERATE_RSS_RATIO = 1e-20


def _align(x: TimeSeries, y: TimeSeries) -> Tuple[np.ndarray, np.ndarray]:
    x_by_date = dict(zip(x.dates, x.values))
    shared = [d for d in y.dates if d in x_by_date]
    if len(shared) < MIN_SHARED_OBSERVATIONS:
        raise AlignmentError(
            f"'{x.label}' and '{y.label}' share {len(shared)} observations, "
            f"need {MIN_SHARED_OBSERVATIONS}"
        )
    y_by_date = dict(zip(y.dates, y.values))
    return (
        np.array([x_by_date[d] for d in shared]),
        np.array([y_by_date[d] for d in shared]),
    )


def engle_granger(x: TimeSeries, y: TimeSeries, max_lag: Optional[int] = None) -> CointegrationResult:
    """
    Step 1 regresses y on x with an intercept; step 2 runs a constant-only ADF
    on the residuals against Engle-Granger critical values.
    """
    xs, ys = _align(x, y)
    step1 = ols_fit(xs, ys, intercept=True, names=[x.label])
    residuals = np.asarray(step1.residuals)
    lags = default_adf_max_lag(len(residuals)) if max_lag is None else max_lag

    centered = ys - ys.mean()
    scale = max(float(centered @ centered), float(ys @ ys), 1.0)
    if step1.rss <= DEGENERATE_RSS_RATIO * scale:
        nobs = len(residuals) - 1
        adf = AdfResult(
            test_statistic=-np.inf,
            critical_value_5pct=mackinnon_critical_value(2, nobs),
            lag_used=0,
            n_observations=nobs,
            reject_unit_root=True,
        )
        note = "degenerate: exact linear relation, residuals are zero"
        logger.warning("Cointegration %s ~ %s: %s", y.label, x.label, note)
        return CointegrationResult(
            pair=(x.label, y.label), step1_fit=step1, adf=adf, cointegrated_at_5pct=True, note=note
        )

    adf = adf_test(residuals, lags, n_variables=2)
    return CointegrationResult(
        pair=(x.label, y.label),
        step1_fit=step1,
        adf=adf,
        cointegrated_at_5pct=adf.reject_unit_root,
    )


def screen_all_pairs(
    features: Sequence[TimeSeries],
    buckets: Sequence[TimeSeries],
    max_lag: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> CointegrationMatrix:
    """Every feature against every bucket; failing pairs are kept with their error"""
    pairs = [(f, b) for f in features for b in buckets]
    outcomes = map_tasks(lambda pair: engle_granger(pair[0], pair[1], max_lag), pairs, n_jobs)

    cells = [[CointegrationCell() for _ in buckets] for _ in features]
    for outcome, (feature, bucket) in zip(outcomes, pairs):
        i, j = outcome.index // len(buckets), outcome.index % len(buckets)
        if outcome.ok:
            result: CointegrationResult = outcome.result
            cells[i][j] = CointegrationCell(result=result)
            if not result.cointegrated_at_5pct:
                logger.warning(
                    "Pair (%s, %s) is not cointegrated at 5%% (ADF %.3f vs %.3f)",
                    feature.label,
                    bucket.label,
                    result.adf.test_statistic,
                    result.adf.critical_value_5pct,
                )
        else:
            cells[i][j] = CointegrationCell(error=outcome.error)
            logger.warning(
                "Pair (%s, %s) could not be screened: %s", feature.label, bucket.label, outcome.error
            )

    logger.info("Cointegration screen: %d features x %d buckets", len(features), len(buckets))
    return CointegrationMatrix(
        features=tuple(f.label for f in features),
        buckets=tuple(b.label for b in buckets),
        cells=cells,
    )
