import datetime
from typing import Dict, FrozenSet, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator


class BipRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    number: PositiveInt
    date: datetime.date
    kind: str
    status: str
    categories: FrozenSet[str] = frozenset()
    # "cited" for the dates quoted with the major set, "external" otherwise
    provenance: str = "external"


class BipRegistry(BaseModel):
    model_config = ConfigDict(frozen=True)

    records: Tuple[BipRecord, ...]

    @model_validator(mode="after")
    def _check_unique(self) -> "BipRegistry":
        seen = set()
        for record in self.records:
            if record.number in seen:
                raise ValueError(f"duplicate BIP number {record.number}")
            seen.add(record.number)
        return self

    @property
    def numbers(self) -> FrozenSet[int]:
        return frozenset(record.number for record in self.records)

    def by_number(self) -> Dict[int, BipRecord]:
        return {record.number: record for record in self.records}

    def __len__(self) -> int:
        return len(self.records)


class BipSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    members: FrozenSet[int]


class EventSignal(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    months: Tuple[datetime.date, ...]
    values: Tuple[int, ...]
    outside_grid: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_binary(self) -> "EventSignal":
        if len(self.months) != len(self.values):
            raise ValueError(f"{self.name}: months and values differ in length")
        if any(v not in (0, 1) for v in self.values):
            raise ValueError(f"{self.name}: signal values must be 0 or 1")
        return self

    @property
    def event_months(self) -> List[datetime.date]:
        return [m for m, v in zip(self.months, self.values) if v]
