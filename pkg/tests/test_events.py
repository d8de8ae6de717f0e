from datetime import date

import pytest

from bip_impact.core.errors import (
    DomainError,
    DuplicateRecordError,
    RegistryIntegrityError,
    RegistryParseError,
)
from bip_impact.engine.events import (
    ALL_BIPS,
    ALL_ECONOMY,
    EXCEPT_MAJOR,
    FISCAL,
    MAJOR_ECONOMY,
    build_signal,
    builtin_sets,
    load_registry,
    sets_by_name,
)
from bip_impact.schemas.events import BipRecord, BipRegistry, BipSet
from bip_impact.utils.synthetic import month_grid

HEADER = "number,date,kind,status,categories\n"

GRID = month_grid(date(2012, 1, 1), 120)


def _sets(registry):
    return {s.name: s for s in builtin_sets(registry)}


def test_bundled_registry(registry):
    """Test the bundled BIP registry"""
    assert len(registry) == 176
    assert registry.by_number()[141].date == date(2015, 12, 21)


def test_builtin_set_membership(registry):
    """Test membership of the built-in BIP sets"""
    sets = _sets(registry)
    assert list(sets)[:4] == [ALL_BIPS, ALL_ECONOMY, MAJOR_ECONOMY, EXCEPT_MAJOR]
    assert sets[MAJOR_ECONOMY].members == {32, 42, 50, 141, 341}
    assert sets[FISCAL].members == {78, 199}
    assert sets[EXCEPT_MAJOR].members.isdisjoint(sets[MAJOR_ECONOMY].members)
    assert sets[EXCEPT_MAJOR].members | sets[MAJOR_ECONOMY].members == sets[ALL_ECONOMY].members
    assert sets[ALL_ECONOMY].members <= sets[ALL_BIPS].members


def test_major_signal_on_decade_grid(registry):
    """Test the major-BIP signal over ten years"""
    signal = build_signal(_sets(registry)[MAJOR_ECONOMY], GRID, registry)
    assert sum(signal.values) == 5
    assert date(2015, 12, 1) in signal.event_months
    assert signal.outside_grid == 0
    assert signal.months == tuple(GRID)


def test_two_bips_in_one_month_give_a_single_flag():
    """Test two BIPs in one month flag it once"""
    registry = BipRegistry(
        records=(
            BipRecord(number=1, date=date(2020, 5, 3), kind="k", status="s"),
            BipRecord(number=2, date=date(2020, 5, 28), kind="k", status="s"),
        )
    )
    pair = BipSet(name="pair", members=frozenset({1, 2}))
    signal = build_signal(pair, month_grid(date(2020, 4, 1), 3), registry)
    assert signal.values == (0, 1, 0)


def test_empty_set_gives_all_zero_signal(registry):
    """Test an empty set gives a zero signal"""
    signal = build_signal(BipSet(name="none", members=frozenset()), GRID, registry)
    assert signal.values == (0,) * len(GRID)


def test_signal_of_union_is_or_of_signals(registry):
    """Test the signal of a union is the OR of the signals"""
    sets = _sets(registry)
    major = build_signal(sets[MAJOR_ECONOMY], GRID, registry)
    rest = build_signal(sets[EXCEPT_MAJOR], GRID, registry)
    union = build_signal(sets[ALL_ECONOMY], GRID, registry)
    assert union.values == tuple(a | b for a, b in zip(major.values, rest.values))


def test_members_outside_grid_are_counted(registry):
    """Test BIPs outside the grid are counted, not flagged"""
    signal = build_signal(_sets(registry)[MAJOR_ECONOMY], month_grid(date(2014, 1, 1), 12), registry)
    assert signal.values.count(1) == 1
    assert signal.outside_grid == 4


def test_signal_errors(registry):
    """Test signal construction errors"""
    with pytest.raises(DomainError):
        build_signal(_sets(registry)[MAJOR_ECONOMY], [], registry)
    with pytest.raises(RegistryIntegrityError):
        build_signal(BipSet(name="ghost", members=frozenset({99999})), GRID, registry)
    with pytest.raises(KeyError):
        sets_by_name(registry, ["Nonexistent BIPs"])


def test_builtin_sets_need_referenced_numbers():
    """Test built-in sets require their BIPs in the registry"""
    small = BipRegistry(records=(BipRecord(number=32, date=date(2012, 2, 11), kind="k", status="s"),))
    with pytest.raises(RegistryIntegrityError):
        builtin_sets(small)


@pytest.mark.parametrize(
    "body,error,line",
    [
        ("1,2011-08-19,Process,Final,\n1,2012-01-01,Process,Final,\n", DuplicateRecordError, 3),
        ("1,2011-08-19,Process,Final,\n2,,Process,Final,\n", RegistryParseError, 3),
        ("1,2011-13-19,Process,Final,\n", RegistryParseError, 2),
        ("x,2011-08-19,Process,Final,\n", RegistryParseError, 2),
        ("1,2011-08-19,Process,Final,\n\nx,2011-08-19,Process,Final,\n", RegistryParseError, 4),
    ],
)
def test_registry_parse_errors_carry_line(tmp_path, body, error, line):
    """Test registry errors name the file line"""
    path = tmp_path / "bips.csv"
    path.write_text(HEADER + body, encoding="utf-8")
    with pytest.raises(error) as excinfo:
        load_registry(path)
    assert excinfo.value.line == line
    assert f"line {line}" in str(excinfo.value)


def test_registry_categories_and_missing_columns(tmp_path):
    """Test category parsing and missing registry columns"""
    path = tmp_path / "bips.csv"
    path.write_text(HEADER + "7,2013-01-01,Process,Final,segwit| major \n", encoding="utf-8")
    assert load_registry(path).records[0].categories == {"segwit", "major"}

    path.write_text("number,date\n1,2011-08-19\n", encoding="utf-8")
    with pytest.raises(RegistryParseError, match="missing columns"):
        load_registry(path)
