"""
CSV ingestion of `date,value` exports into labelled TimeSeries.
"""
import logging
import math
from datetime import date
from pathlib import Path
from typing import Dict, List, Tuple, Union

import pandas as pd

from ..core.errors import IngestError
from ..schemas.pipeline import PipelineConfig, SeriesSpec
from ..schemas.timeseries import Frequency, TimeSeries

logger = logging.getLogger(__name__)


def _cell(value: object) -> str:
    return value if isinstance(value, str) else ""


def read_series(path: Union[str, Path], label: str, frequency: Frequency) -> TimeSeries:
    """
    Parse one export. Rows may come in any order; a repeated date keeps the
    value of its last row in the file.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, skipinitialspace=True, skip_blank_lines=False
        )
    except pd.errors.EmptyDataError as e:
        raise IngestError("file is empty", str(path)) from e
    except (OSError, pd.errors.ParserError) as e:
        raise IngestError(str(e), str(path)) from e

    missing = [column for column in ("date", "value") if column not in frame.columns]
    if missing:
        raise IngestError(f"missing columns {missing}", str(path), 1)
    # Blank lines stay in the frame so row offsets map onto file lines
    rows = [
        (offset + 2, _cell(raw_date), _cell(raw_value))
        for offset, (raw_date, raw_value) in enumerate(zip(frame["date"], frame["value"]))
        if _cell(raw_date).strip() or _cell(raw_value).strip()
    ]
    if not rows:
        raise IngestError("file has a header but no rows", str(path))

    observations: Dict[date, float] = {}
    duplicates = 0
    for line, raw_date, raw_value in rows:
        try:
            day = date.fromisoformat(raw_date.strip())
        except ValueError:
            raise IngestError(f"unparseable date '{raw_date}'", str(path), line) from None
        try:
            value = float(raw_value)
        except ValueError:
            raise IngestError(f"unparseable value '{raw_value}'", str(path), line) from None
        if not math.isfinite(value):
            raise IngestError(f"non-finite value '{raw_value}'", str(path), line)
        if day in observations:
            duplicates += 1
        observations[day] = value

    if duplicates:
        logger.warning("%s: %d duplicate dates, kept the last row of each", path, duplicates)
    points: List[Tuple[date, float]] = sorted(observations.items())
    logger.debug("Read %d points for %s from %s", len(points), label, path)
    return TimeSeries.from_points(label, frequency, points)


def read_spec(spec: SeriesSpec) -> TimeSeries:
    return read_series(spec.path, spec.label, spec.frequency)


def ingest(config: PipelineConfig) -> Dict[str, TimeSeries]:
    """Every configured bucket and feature, keyed by label in config order"""
    collection = {spec.label: read_spec(spec) for spec in config.series}
    logger.info(
        "Ingested %d series (%d buckets, %d features)",
        len(collection),
        len(config.buckets),
        len(config.features),
    )
    return collection
