"""
BIP registry loading, the built-in BIP sets and binary monthly event signals.
"""
from __future__ import annotations

import logging
from datetime import date
from pathlib import Path
from typing import Dict, FrozenSet, List, Sequence, Union

import pandas as pd

from ..core.errors import (
    DomainError,
    DuplicateRecordError,
    RegistryIntegrityError,
    RegistryParseError,
)
from ..schemas.events import BipRecord, BipRegistry, BipSet, EventSignal

logger = logging.getLogger(__name__)

REGISTRY_COLUMNS = ["number", "date", "kind", "status", "categories"]

# Economy-related categories and their members
ECONOMY_CATEGORIES: Dict[str, FrozenSet[int]] = {
    "supply-liquidity": frozenset({9, 42, 100, 101, 102, 103, 104, 105, 106, 107, 109, 152, 331}),
    "transaction": frozenset(
        {
            11, 13, 16, 65, 66, 68, 78, 79, 112, 115, 116, 118, 125, 127, 129, 134,
            146, 174, 322, 324, 330, 352, 370, 373,
        }
    ),
    "financial-instruments": frozenset({197, 199, 300, 345}),
    "security-privacy": frozenset({30, 50, 53, 54, 151, 351}),
    "hd-wallets": frozenset({32, 39, 43, 44, 49, 84, 88, 175}),
    "segwit": frozenset({91, 141, 148, 173}),
    "taproot": frozenset({326, 327, 341, 343, 371}),
    "simplify-popularize": frozenset({1, 21, 47, 61, 70, 72, 75, 111, 380}),
}

MAJOR = frozenset({32, 42, 50, 141, 341})

FISCAL_LIKE = frozenset({78, 199})

MONETARY_LIKE = frozenset(
    {
        11, 13, 16, 30, 42, 53, 54, 65, 66, 68, 75, 100, 101, 102, 103, 104, 105,
        106, 107, 109, 112, 115, 118, 125, 127, 141, 146, 152, 173, 174, 197, 300,
        331, 345, 370, 371, 373,
    }
)

PURELY_TOKENOMIC = frozenset(
    {
        1, 9, 21, 32, 39, 44, 47, 61, 70, 72, 79, 88, 91, 111, 129, 148, 175, 322,
        324, 327, 330, 341, 343, 351, 352, 380,
    }
)

ALL_BIPS = "All BIPs"
ALL_ECONOMY = "All Economy-Related BIPs"
MAJOR_ECONOMY = "Major Economy-Related BIPs"
EXCEPT_MAJOR = "All Economy-Related BIPs (Except the major ones)"
FISCAL = "Fiscal-Like BIPs"
MONETARY = "Monetary-Like BIPs"
TOKENOMIC = "Purely Tokenomic BIPs"


def economy_related() -> FrozenSet[int]:
    return frozenset().union(*ECONOMY_CATEGORIES.values())


# -------- Registry --------
def load_registry(path: Union[str, Path]) -> BipRegistry:
    """
    Parse a `number,date,kind,status,categories[,provenance]` CSV. Categories
    are `|`-separated tags. Errors carry the 1-based file line.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise RegistryParseError(f"{path}: {e}") from e

    missing = [column for column in REGISTRY_COLUMNS if column not in frame.columns]
    if missing:
        raise RegistryParseError(f"{path}: missing columns {missing}", line=1)

    records: List[BipRecord] = []
    seen: Dict[int, int] = {}
    for offset, raw in enumerate(frame.to_dict(orient="records")):
        line = offset + 2
        row = {key: value if isinstance(value, str) else "" for key, value in raw.items()}
        # Blank lines are kept by the reader so offsets stay aligned with file lines
        if not any(value.strip() for value in row.values()):
            continue
        raw_number = row["number"].strip()
        if not raw_number.isdigit() or int(raw_number) < 1:
            raise RegistryParseError(f"invalid BIP number '{raw_number}'", line)
        number = int(raw_number)
        if number in seen:
            raise DuplicateRecordError(number, line)
        raw_date = row["date"].strip()
        if not raw_date:
            raise RegistryParseError(f"BIP {number}: missing date", line)
        try:
            day = date.fromisoformat(raw_date)
        except ValueError as e:
            raise RegistryParseError(f"BIP {number}: invalid date '{raw_date}'", line) from e
        tags = frozenset(tag.strip() for tag in row["categories"].split("|") if tag.strip())
        records.append(
            BipRecord(
                number=number,
                date=day,
                kind=row["kind"].strip(),
                status=row["status"].strip(),
                categories=tags,
                provenance=(row.get("provenance") or "external").strip(),
            )
        )
        seen[number] = line

    logger.info("Loaded %d BIP records from %s", len(records), path)
    return BipRegistry(records=tuple(records))


# -------- Built-in sets --------
def builtin_sets(registry: BipRegistry) -> List[BipSet]:
    """
    The seven named sets: the four main ones followed by the three taxonomy
    sets. Every referenced number must exist in the registry.
    """
    economy = economy_related()
    referenced = economy | MAJOR | FISCAL_LIKE | MONETARY_LIKE | PURELY_TOKENOMIC
    absent = sorted(referenced - registry.numbers)
    if absent:
        raise RegistryIntegrityError(f"registry lacks referenced BIPs {absent}")

    return [
        BipSet(name=ALL_BIPS, members=registry.numbers),
        BipSet(name=ALL_ECONOMY, members=economy),
        BipSet(name=MAJOR_ECONOMY, members=MAJOR),
        BipSet(name=EXCEPT_MAJOR, members=economy - MAJOR),
        BipSet(name=FISCAL, members=FISCAL_LIKE),
        BipSet(name=MONETARY, members=MONETARY_LIKE),
        BipSet(name=TOKENOMIC, members=PURELY_TOKENOMIC),
    ]


def sets_by_name(registry: BipRegistry, names: Sequence[str]) -> List[BipSet]:
    available = {s.name: s for s in builtin_sets(registry)}
    unknown = [name for name in names if name not in available]
    if unknown:
        raise KeyError(f"unknown BIP sets {unknown}")
    return [available[name] for name in names]


# -------- Signals --------
def build_signal(bip_set: BipSet, grid: Sequence[date], registry: BipRegistry) -> EventSignal:
    """
    1 for every grid month containing at least one member's date, else 0.
    Members dated outside the grid are counted and otherwise ignored.
    """
    if not grid:
        raise DomainError("event signal grid must not be empty")
    months = [m.replace(day=1) for m in grid]
    index = {m: i for i, m in enumerate(months)}
    values = [0] * len(months)
    records = registry.by_number()
    unknown = sorted(bip_set.members - set(records))
    if unknown:
        raise RegistryIntegrityError(f"{bip_set.name}: BIPs {unknown} are not in the registry")
    outside = 0
    for number in sorted(bip_set.members):
        month = records[number].date.replace(day=1)
        if month in index:
            values[index[month]] = 1
        else:
            outside += 1
    if outside:
        logger.warning("%s: %d BIPs dated outside the %d-month grid", bip_set.name, outside, len(months))
    return EventSignal(name=bip_set.name, months=tuple(months), values=tuple(values), outside_grid=outside)
