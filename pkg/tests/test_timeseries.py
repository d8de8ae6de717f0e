import math
from datetime import date, timedelta

import numpy as np
import pytest

from bip_impact.core.errors import DomainError, EmptyPanelError, LengthError
from bip_impact.engine.timeseries import (
    build_panel,
    diff_transform,
    downsample_monthly,
    log_change_transform,
    prepare_series,
)
from bip_impact.schemas.pipeline import TransformKind, TransformOrder
from bip_impact.schemas.timeseries import Frequency, TimeSeries


def _daily(label, start, values):
    dates = [start + timedelta(days=i) for i in range(len(values))]
    return TimeSeries(label=label, frequency=Frequency.daily, dates=tuple(dates), values=tuple(values))


def test_diff_transform_subtracts_consecutive_values(make_series):
    """Test first differences"""
    ts = make_series("x", [1, 3, 2])
    out = diff_transform(ts)
    assert out.values == (2.0, -1.0)
    # Increments are dated at the later point of each pair
    assert out.dates == ts.dates[1:]


def test_diff_transform_of_constant_is_zero(make_series):
    """Test first differences of a constant"""
    assert diff_transform(make_series("x", [5, 5, 5, 5])).values == (0.0, 0.0, 0.0)


def test_log_change_transform_values(make_series):
    """Test log changes"""
    assert log_change_transform(make_series("x", [1, math.e])).values[0] == pytest.approx(1.0, abs=1e-15)
    assert log_change_transform(make_series("x", [7, 7, 7])).values == (0.0, 0.0)
    assert log_change_transform(make_series("x", [100, 110])).values[0] == pytest.approx(0.0953102, abs=1e-7)


def test_log_change_rejects_non_positive_values_naming_the_date(make_series):
    """Test log changes reject non-positive values"""
    ts = make_series("M2", [3.0, 0.0, 2.0], start=date(2020, 1, 1))
    with pytest.raises(DomainError, match="2020-02-01"):
        log_change_transform(ts)


def test_transforms_need_two_points(make_series):
    """Test transforms need two points"""
    with pytest.raises(LengthError):
        diff_transform(make_series("x", [1.0]))
    with pytest.raises(LengthError):
        log_change_transform(make_series("x", [1.0]))


def test_transforms_reconstruct_the_original(make_series):
    """Cumulating the increments from the first value gives back the series"""
    rng = np.random.default_rng(11)
    for _ in range(50):
        values = np.exp(rng.normal(0.0, 0.3, 40).cumsum()) * 100.0
        ts = make_series("x", values)

        diffs = np.asarray(diff_transform(ts).values)
        rebuilt = values[0] + np.concatenate([[0.0], np.cumsum(diffs)])
        np.testing.assert_allclose(rebuilt, values, rtol=1e-12)

        logs = np.asarray(log_change_transform(ts).values)
        rebuilt = values[0] * np.exp(np.concatenate([[0.0], np.cumsum(logs)]))
        np.testing.assert_allclose(rebuilt, values, rtol=1e-10)
        assert len(logs) == len(values) - 1


def test_downsample_keeps_last_observation_per_month():
    """Test downsampling keeps the last reading of each month"""
    ts = _daily("x", date(2021, 1, 1), [float(i) for i in range(59)])  # Jan 1 .. Feb 28
    monthly = downsample_monthly(ts)
    assert monthly.dates == (date(2021, 1, 1), date(2021, 2, 1))
    assert monthly.values == (30.0, 58.0)
    assert monthly.frequency == Frequency.monthly


def test_downsample_weekly_takes_fifth_reading():
    """Test downsampling a weekly series"""
    # Feb 22, the five March 2021 Mondays (1, 8, 15, 22, 29), Apr 5
    mondays = [date(2021, 2, 22) + timedelta(weeks=i) for i in range(7)]
    ts = TimeSeries(
        label="m2",
        frequency=Frequency.weekly,
        dates=tuple(mondays),
        values=tuple(float(i) for i in range(7)),
    )
    monthly = downsample_monthly(ts)
    assert dict(zip(monthly.dates, monthly.values))[date(2021, 3, 1)] == 5.0


def test_downsample_is_idempotent_and_rekeys_monthly_series():
    """Test downsampling a monthly series"""
    ts = TimeSeries(
        label="u",
        frequency=Frequency.monthly,
        dates=(date(2020, 1, 15), date(2020, 2, 15), date(2020, 3, 15)),
        values=(1.0, 2.0, 3.0),
    )
    once = downsample_monthly(ts)
    assert once.dates == (date(2020, 1, 1), date(2020, 2, 1), date(2020, 3, 1))
    assert downsample_monthly(once) == once


def test_prepare_series_respects_transform_order():
    """Test series preparation order"""
    # Jan 1..Mar 31, values 1, 2, 3, ...
    ts = _daily("x", date(2021, 1, 1), [float(i + 1) for i in range(90)])

    month_over_month = prepare_series(ts, TransformKind.diff, TransformOrder.downsample_then_transform)
    assert month_over_month.dates == (date(2021, 2, 1), date(2021, 3, 1))
    assert month_over_month.values == (28.0, 31.0)

    last_increment = prepare_series(ts, TransformKind.diff, TransformOrder.transform_then_downsample)
    assert last_increment.dates == (date(2021, 1, 1), date(2021, 2, 1), date(2021, 3, 1))
    assert last_increment.values == (1.0, 1.0, 1.0)


def test_build_panel_inner_joins_months(make_series):
    """Test panels inner join on months"""
    y = make_series("Y", [1, 2, 3], start=date(2020, 1, 1))
    x = make_series("X", [10, 20, 30], start=date(2020, 2, 1))
    panel = build_panel(y, [x])
    assert panel.months == (date(2020, 2, 1), date(2020, 3, 1))
    assert panel.columns == {"Y": (2.0, 3.0), "X": (10.0, 20.0)}
    assert list(panel.columns) == ["Y", "X"]
    assert panel.feature_names == ["X"]


def test_build_panel_drops_gap_months_regardless_of_order(make_series):
    """Test panels drop gap months"""
    y = make_series("Y", [1, 2, 3, 4], start=date(2020, 1, 1))
    gappy = TimeSeries(
        label="X",
        frequency=Frequency.monthly,
        dates=(date(2020, 1, 1), date(2020, 2, 1), date(2020, 4, 1)),
        values=(5.0, 6.0, 8.0),
    )
    other = make_series("Z", [0, 0, 0, 0], start=date(2020, 1, 1))
    forward = build_panel(y, [gappy, other])
    backward = build_panel(y, [other, gappy])
    assert forward.months == backward.months == (date(2020, 1, 1), date(2020, 2, 1), date(2020, 4, 1))
    assert forward.columns["X"] == backward.columns["X"]


def test_build_panel_errors(make_series):
    """Test panel construction errors"""
    y = make_series("Y", [1, 2], start=date(2020, 1, 1))
    late = make_series("X", [1, 2], start=date(2021, 1, 1))
    with pytest.raises(EmptyPanelError):
        build_panel(y, [late])

    daily = _daily("D", date(2020, 1, 1), [1.0, 2.0])
    with pytest.raises(DomainError):
        build_panel(y, [daily])
    with pytest.raises(DomainError):
        build_panel(y, [make_series("Y", [1, 2])])


def test_timeseries_rejects_unordered_and_non_finite_points():
    """Test TimeSeries validation"""
    with pytest.raises(ValueError):
        TimeSeries(
            label="x",
            frequency=Frequency.daily,
            dates=(date(2020, 1, 2), date(2020, 1, 1)),
            values=(1.0, 2.0),
        )
    with pytest.raises(ValueError):
        TimeSeries(label="x", frequency=Frequency.daily, dates=(date(2020, 1, 1),), values=(float("nan"),))
