from datetime import date
from typing import Sequence

import numpy as np
import pytest

from bip_impact.core.config import load_config, settings
from bip_impact.core.pipeline import Pipeline
from bip_impact.core.storage import ReportStorage
from bip_impact.engine.events import load_registry
from bip_impact.schemas.timeseries import Frequency, Panel, TimeSeries
from bip_impact.utils.synthetic import month_grid, write_fixture


@pytest.fixture
def rng():
    """Seeded generator for single-draw tests"""
    return np.random.default_rng(20240101)


@pytest.fixture(scope="session")
def registry():
    return load_registry(settings.default_registry)


@pytest.fixture
def make_series():
    """Monthly TimeSeries keyed from `start` (2015-01 by default)"""

    def _make(label: str, values: Sequence[float], start: date = date(2015, 1, 1)):
        months = month_grid(start, len(values))
        return TimeSeries(
            label=label,
            frequency=Frequency.monthly,
            dates=tuple(months),
            values=tuple(float(v) for v in values),
        )

    return _make


@pytest.fixture
def make_panel():
    """Panel from a dependent vector and named feature vectors"""

    def _make(y: Sequence[float], features: dict, dependent: str = "Y") -> Panel:
        months = month_grid(date(2010, 1, 1), len(y))
        columns = {dependent: tuple(float(v) for v in y)}
        columns.update({name: tuple(float(v) for v in values) for name, values in features.items()})
        return Panel(months=tuple(months), columns=columns, dependent=dependent)

    return _make


@pytest.fixture(scope="session")
def fixture_config_path(tmp_path_factory):
    """The seeded synthetic dataset and its config"""
    return write_fixture(tmp_path_factory.mktemp("fixture"), seed=7)


@pytest.fixture(scope="session")
def fixture_run(fixture_config_path, tmp_path_factory):
    """One full pipeline run over the synthetic fixture"""
    config = load_config(fixture_config_path)
    storage = ReportStorage(tmp_path_factory.mktemp("run"))
    pipeline = Pipeline(config, storage=storage)
    report = pipeline.run()
    return pipeline, report
