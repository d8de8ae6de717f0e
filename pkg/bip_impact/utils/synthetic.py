"""
Seeded data generating processes and the bundled synthetic fixture.

The fixture writes raw exports at daily, weekly and monthly frequency whose
month-end readings follow known monthly dynamics, plus a pipeline config that
runs against them.
"""
import calendar
import logging
from datetime import date
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import yaml

from ..core.config import settings
from ..engine.events import ALL_ECONOMY, build_signal, load_registry, sets_by_name

logger = logging.getLogger(__name__)


# -------- Processes --------
def white_noise(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return rng.normal(0.0, scale, n)


def ar_process(
    coefficients: Sequence[float], n: int, rng: np.random.Generator, scale: float = 1.0, burn: int = 200
) -> np.ndarray:
    """y_t = sum_i coefficients[i] y_{t-1-i} + e_t, started from zeros and burned in"""
    p = len(coefficients)
    phi = np.asarray(coefficients, dtype=float)
    shocks = rng.normal(0.0, scale, n + burn)
    y = np.zeros(n + burn)
    for t in range(n + burn):
        past = y[max(0, t - p) : t][::-1]
        y[t] = phi[: len(past)] @ past + shocks[t]
    return y[burn:]


def random_walk(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return np.cumsum(rng.normal(0.0, scale, n))


def causal_pair(
    n: int,
    rng: np.random.Generator,
    lag: int = 3,
    phi: float = 0.5,
    beta: float = 0.8,
) -> Tuple[np.ndarray, np.ndarray]:
    """x white noise, y_t = phi y_{t-1} + beta x_{t-lag} + e_t"""
    burn = 100
    x = rng.normal(0.0, 1.0, n + burn)
    e = rng.normal(0.0, 1.0, n + burn)
    y = np.zeros(n + burn)
    for t in range(n + burn):
        y[t] = (phi * y[t - 1] if t >= 1 else 0.0) + (beta * x[t - lag] if t >= lag else 0.0) + e[t]
    return x[burn:], y[burn:]


# -------- Calendar helpers --------
def month_grid(start: date, months: int) -> List[date]:
    grid = []
    year, month = start.year, start.month
    for _ in range(months):
        grid.append(date(year, month, 1))
        month += 1
        if month > 12:
            year, month = year + 1, 1
    return grid


def _days_of(month: date) -> List[date]:
    last = calendar.monthrange(month.year, month.month)[1]
    return [month.replace(day=d) for d in range(1, last + 1)]


def _weeks_of(month: date) -> List[date]:
    days = _days_of(month)
    # Readings every Monday of the month
    return [d for d in days if d.weekday() == 0]


def intramonth_path(
    grid: Sequence[date],
    month_ends: np.ndarray,
    rng: np.random.Generator,
    noise: float,
    weekly: bool = False,
) -> Tuple[List[date], List[float]]:
    """
    Readings inside every month moving from the previous month-end level to
    this month's, with the last reading of each month exactly at its level.
    """
    dates: List[date] = []
    values: List[float] = []
    previous = month_ends[0]
    for month, level in zip(grid, month_ends):
        days = _weeks_of(month) if weekly else _days_of(month)
        steps = len(days)
        for i, day in enumerate(days, start=1):
            if i == steps:
                value = level
            else:
                value = previous + (level - previous) * i / steps + rng.normal(0.0, noise)
            dates.append(day)
            values.append(float(value))
        previous = level
    return dates, values


def _write(path: Path, dates: Sequence[date], values: Sequence[float]) -> None:
    pd.DataFrame({"date": [d.isoformat() for d in dates], "value": values}).to_csv(
        path, index=False, lineterminator="\n", float_format="%.10g"
    )


# -------- Fixture --------
FIXTURE_BUCKETS = ["From 0 to 0.001", "From 0.01 to 0.1", "From 10 to 100", "From 10000 to 100000"]
FIXTURE_START = date(2012, 1, 1)
FIXTURE_MONTHS = 156


def write_fixture(
    directory: Union[str, Path],
    seed: int = 7,
    registry_path: Optional[Union[str, Path]] = None,
) -> Path:
    """
    Write the synthetic dataset and its config into `directory`; returns the
    config path. "From 0 to 0.001" follows the Federal Funds Rate,
    "From 10 to 100" follows M2, "From 10000 to 100000" reacts to
    economy-related BIPs two months later, and "From 0.01 to 0.1" is noise.
    """
    root = Path(directory)
    data = root / "data"
    data.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    grid = month_grid(FIXTURE_START, FIXTURE_MONTHS)
    n = len(grid)

    registry = load_registry(registry_path or settings.default_registry)
    economy = sets_by_name(registry, [ALL_ECONOMY])[0]
    signal = np.asarray(build_signal(economy, grid, registry).values, dtype=float)

    # Monthly month-end levels of the features
    ffr = np.clip(1.0 + random_walk(n, rng, 0.15), 0.05, None)
    log_m2 = np.log(10000.0) + np.cumsum(0.005 + rng.normal(0.0, 0.01, n))
    unemployment = np.clip(6.0 + random_walk(n, rng, 0.1), 2.0, None)
    gold = 1500.0 + random_walk(n, rng, 30.0)
    log_btc = np.log(500.0) + np.cumsum(rng.normal(0.02, 0.15, n))

    d_ffr = np.diff(ffr, prepend=ffr[0])
    d_m2 = np.diff(log_m2, prepend=log_m2[0])
    lagged_signal = np.concatenate([[0.0, 0.0], signal[:-2]])
    bucket_changes: Dict[str, np.ndarray] = {
        "From 0 to 0.001": 0.1 * d_ffr + rng.normal(0.0, 0.005, n),
        "From 0.01 to 0.1": rng.normal(0.0, 0.01, n),
        "From 10 to 100": 0.8 * (d_m2 - 0.005) + rng.normal(0.0, 0.004, n),
        "From 10000 to 100000": 0.03 * lagged_signal + ar_process([0.3], n, rng, 0.01),
    }
    bucket_levels = {
        label: np.exp(np.log(1000.0 * (i + 1)) + np.cumsum(changes))
        for i, (label, changes) in enumerate(bucket_changes.items())
    }

    files = []
    for label, levels in bucket_levels.items():
        dates, values = intramonth_path(grid, np.log(levels), rng, 0.001)
        path = data / f"bucket_{len(files)}.csv"
        _write(path, dates, np.exp(values))
        files.append((label, path, "daily"))

    feature_files = []
    dates, values = intramonth_path(grid, ffr, rng, 0.01)
    _write(data / "ffr.csv", dates, np.clip(values, 0.01, None))
    feature_files.append(("Federal Funds Rate", "data/ffr.csv", "daily"))
    dates, values = intramonth_path(grid, log_m2, rng, 0.001, weekly=True)
    _write(data / "m2.csv", dates, np.exp(values))
    feature_files.append(("M2 (US)", "data/m2.csv", "weekly"))
    _write(data / "unrate.csv", grid, unemployment)
    feature_files.append(("Unemployment Rate", "data/unrate.csv", "monthly"))
    dates, values = intramonth_path(grid, gold, rng, 5.0)
    _write(data / "gold.csv", dates, values)
    feature_files.append(("Gold Price Against USD", "data/gold.csv", "daily"))
    dates, values = intramonth_path(grid, log_btc, rng, 0.01)
    # Out-of-order rows and a duplicated date exercise ingestion
    btc = pd.DataFrame({"date": [d.isoformat() for d in dates], "value": np.exp(values)})
    btc = pd.concat([btc.iloc[::-1], btc.iloc[[0]]], ignore_index=True)
    btc.to_csv(data / "btc.csv", index=False, lineterminator="\n", float_format="%.10g")
    feature_files.append(("Bitcoin (Close Price)", "data/btc.csv", "daily"))

    config = {
        "output_dir": "reports",
        "buckets": [
            {"label": label, "path": f"data/{path.name}", "frequency": freq} for label, path, freq in files
        ],
        "features": [
            {"label": label, "path": path, "frequency": freq} for label, path, freq in feature_files
        ],
        "granger": {"max_lags": [10, 6, 12]},
    }
    if registry_path is not None:
        config["registry"] = str(Path(registry_path).resolve())
    config_path = root / "pipeline.yaml"
    with config_path.open("w", encoding="utf-8") as f:
        yaml.safe_dump(config, f, sort_keys=False)
    logger.info("Wrote synthetic fixture (%d months, seed %d) to %s", n, seed, root)
    return config_path
