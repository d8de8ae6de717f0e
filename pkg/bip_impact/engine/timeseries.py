"""
Stationarity transforms, monthly downsampling and panel assembly.

All functions are pure: they take immutable TimeSeries records and return new
ones.
"""
from __future__ import annotations

import logging
from datetime import date
from typing import List, Sequence

import numpy as np
import pandas as pd

from ..core.errors import DomainError, EmptyPanelError, LengthError
from ..schemas.pipeline import TransformKind, TransformOrder
from ..schemas.timeseries import Frequency, Panel, TimeSeries

logger = logging.getLogger(__name__)


# -------- Transforms --------
def _require_pairs(ts: TimeSeries) -> None:
    if len(ts) < 2:
        raise LengthError(f"{ts.label}: need at least 2 points, got {len(ts)}")


def diff_transform(ts: TimeSeries) -> TimeSeries:
    """First-order differencing; each increment is dated at the later point"""
    _require_pairs(ts)
    values = np.diff(ts.array())
    return TimeSeries(
        label=ts.label, frequency=ts.frequency, dates=ts.dates[1:], values=tuple(values.tolist())
    )


def log_change_transform(ts: TimeSeries) -> TimeSeries:
    """ln(x_t) - ln(x_{t-1}); every value must be strictly positive"""
    _require_pairs(ts)
    raw = ts.array()
    for d, v in zip(ts.dates, raw):
        if v <= 0:
            raise DomainError(f"{ts.label}: non-positive value {v} on {d.isoformat()}")
    values = np.diff(np.log(raw))
    return TimeSeries(
        label=ts.label, frequency=ts.frequency, dates=ts.dates[1:], values=tuple(values.tolist())
    )


TRANSFORMS = {
    TransformKind.diff: diff_transform,
    TransformKind.log_change: log_change_transform,
}


# -------- Frequency alignment --------
def month_key(day: date) -> date:
    return day.replace(day=1)


def downsample_monthly(ts: TimeSeries) -> TimeSeries:
    """Last observation of every calendar month, keyed to the month's first day"""
    if len(ts) == 0:
        raise LengthError(f"{ts.label}: cannot downsample an empty series")
    index = pd.PeriodIndex([pd.Period(d, freq="M") for d in ts.dates])
    monthly = pd.Series(ts.values, index=index).groupby(level=0, sort=True).last()
    return TimeSeries(
        label=ts.label,
        frequency=Frequency.monthly,
        dates=tuple(period.start_time.date() for period in monthly.index),
        values=tuple(float(v) for v in monthly.to_numpy()),
    )


def prepare_series(ts: TimeSeries, transform: TransformKind, order: TransformOrder) -> TimeSeries:
    """Bring one raw series to a transformed monthly series in the requested order"""
    fn = TRANSFORMS[transform]
    if order == TransformOrder.transform_then_downsample:
        return downsample_monthly(fn(ts))
    return fn(downsample_monthly(ts))


# -------- Panel assembly --------
def build_panel(dependent: TimeSeries, features: Sequence[TimeSeries]) -> Panel:
    """
    Inner-join the dependent and every feature on month keys. Column order is
    the dependent followed by the features in input order.
    """
    inputs: List[TimeSeries] = [dependent, *features]
    labels = [ts.label for ts in inputs]
    if len(set(labels)) != len(labels):
        raise DomainError(f"panel column labels must be unique: {labels}")
    for ts in inputs:
        if ts.frequency != Frequency.monthly:
            raise DomainError(f"{ts.label}: panel inputs must be monthly, got {ts.frequency.value}")
        if any(d.day != 1 for d in ts.dates):
            raise DomainError(f"{ts.label}: monthly dates must be keyed to the first of the month")

    frame = pd.concat(
        [pd.Series(ts.values, index=pd.Index(ts.dates), name=ts.label) for ts in inputs],
        axis=1,
        join="inner",
    ).sort_index()
    if frame.empty:
        raise EmptyPanelError(f"no month shared by '{dependent.label}' and its {len(features)} features")

    logger.debug("Panel for %s: %d rows x %d features", dependent.label, len(frame), len(features))
    return Panel(
        months=tuple(frame.index),
        columns={label: tuple(frame[label].tolist()) for label in labels},
        dependent=dependent.label,
    )
