"""
Per-bucket global regression, iterative significance filtering and residual
extraction ("cleaning") of the transformed wealth buckets.
"""
from __future__ import annotations

import logging
from typing import Dict, List

import numpy as np

from ..core.errors import ConfigurationError
from ..schemas.pipeline import FilterMode
from ..schemas.regression import INTERCEPT, CleanedSeries, Elimination, FilteredModel, RegressionFit
from ..schemas.timeseries import Panel
from .stats import ols_fit, vif

logger = logging.getLogger(__name__)


def fit_global_model(panel: Panel) -> RegressionFit:
    """OLS of the dependent bucket on every feature plus an intercept"""
    features = panel.feature_names
    return ols_fit(
        panel.matrix(features), panel.column(panel.dependent), intercept=True, names=features
    )


def panel_vif(panel: Panel) -> Dict[str, float]:
    features = panel.feature_names
    if len(features) < 2:
        return {name: 1.0 for name in features}
    return dict(zip(features, vif(panel.matrix(features)).tolist()))


def _refit(panel: Panel, active: List[str]) -> RegressionFit:
    features = [name for name in active if name != INTERCEPT]
    return ols_fit(
        panel.matrix(features),
        panel.column(panel.dependent),
        intercept=INTERCEPT in active,
        names=features,
    )


def iterative_filter(
    panel: Panel, level: float = 0.05, mode: FilterMode = FilterMode.all
) -> FilteredModel:
    """
    Fit, drop insignificant regressors (p >= level, intercept included), refit,
    until every remaining regressor is significant or none is left.

    In `all` mode every insignificant regressor leaves per iteration; in
    `one_at_a_time` mode only the one with the largest p-value does.
    """
    active: List[str] = [INTERCEPT] + panel.feature_names
    log: List[List[Elimination]] = []
    iterations = 0
    fit = None

    while active:
        fit = _refit(panel, active)
        iterations += 1
        insignificant = [
            (name, p) for name, p in zip(fit.names, fit.p_values) if p >= level
        ]
        if not insignificant:
            break
        if mode == FilterMode.one_at_a_time:
            # max() keeps the first of equal p-values
            insignificant = [max(insignificant, key=lambda item: item[1])]
        removed = {name for name, _ in insignificant}
        log.append([Elimination(name=name, p_value=p) for name, p in insignificant])
        logger.debug("%s iteration %d removed %s", panel.dependent, iterations, sorted(removed))
        active = [name for name in active if name not in removed]
        fit = None

    survivors = tuple(name for name in active if name != INTERCEPT)
    logger.info(
        "Filtered model for %s: %d iterations, survivors %s%s",
        panel.dependent,
        iterations,
        list(survivors),
        " with intercept" if INTERCEPT in active else "",
    )
    return FilteredModel(
        bucket=panel.dependent,
        surviving_features=survivors,
        has_intercept=INTERCEPT in active,
        fit=fit,
        iterations=iterations,
        elimination_log=log,
        level=level,
    )


def predict(model: FilteredModel, panel: Panel) -> np.ndarray:
    prediction = np.zeros(panel.n_rows)
    if model.fit is None:
        return prediction
    for name, coefficient in zip(model.fit.names, model.fit.coefficients):
        prediction += coefficient if name == INTERCEPT else coefficient * panel.column(name)
    return prediction


def extract_cleaned(model: FilteredModel, panel: Panel) -> CleanedSeries:
    """Residual of the bucket after the surviving regressors; the bucket itself if none survived"""
    if model.bucket != panel.dependent:
        raise ConfigurationError(
            f"model was fitted for '{model.bucket}', panel is for '{panel.dependent}'"
        )
    missing = [name for name in model.surviving_features if name not in panel.columns]
    if missing:
        raise ConfigurationError(f"panel for '{panel.dependent}' lacks model features {missing}")
    values = panel.column(panel.dependent) - predict(model, panel)
    return CleanedSeries(bucket=model.bucket, months=panel.months, values=tuple(values.tolist()))
