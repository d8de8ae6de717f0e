from datetime import date
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator


class Frequency(str, Enum):
    daily = "daily"
    weekly = "weekly"
    monthly = "monthly"


class TimeSeries(BaseModel):
    """
    Dated observations of one series at a declared frequency.

    Dates are strictly increasing and every value is finite; NaN and inf are
    rejected at construction.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    label: str
    frequency: Frequency
    dates: Tuple[date, ...]
    values: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_points(self) -> "TimeSeries":
        if len(self.dates) != len(self.values):
            raise ValueError(
                f"{self.label}: {len(self.dates)} dates but {len(self.values)} values"
            )
        for earlier, later in zip(self.dates, self.dates[1:]):
            if later <= earlier:
                raise ValueError(f"{self.label}: dates not strictly increasing at {later}")
        return self

    @classmethod
    def from_points(
        cls, label: str, frequency: Frequency, points: Sequence[Tuple[date, float]]
    ) -> "TimeSeries":
        return cls(
            label=label,
            frequency=frequency,
            dates=tuple(d for d, _ in points),
            values=tuple(float(v) for _, v in points),
        )

    @property
    def points(self) -> List[Tuple[date, float]]:
        return list(zip(self.dates, self.values))

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)


class Panel(BaseModel):
    """Monthly design matrix: the dependent bucket plus its feature columns"""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    months: Tuple[date, ...]
    columns: Dict[str, Tuple[float, ...]]
    dependent: str

    @model_validator(mode="after")
    def _check_shape(self) -> "Panel":
        if self.dependent not in self.columns:
            raise ValueError(f"dependent column '{self.dependent}' missing from panel")
        for name, column in self.columns.items():
            if len(column) != len(self.months):
                raise ValueError(
                    f"column '{name}' has {len(column)} rows, expected {len(self.months)}"
                )
        for earlier, later in zip(self.months, self.months[1:]):
            if later <= earlier:
                raise ValueError(f"month keys not strictly increasing at {later}")
        for month in self.months:
            if month.day != 1:
                raise ValueError(f"month key {month} is not the first day of a month")
        return self

    @property
    def feature_names(self) -> List[str]:
        return [name for name in self.columns if name != self.dependent]

    @property
    def n_rows(self) -> int:
        return len(self.months)

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name], dtype=float)

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        if not names:
            return np.empty((self.n_rows, 0))
        return np.column_stack([self.column(name) for name in names])
