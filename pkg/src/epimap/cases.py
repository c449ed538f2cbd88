"""Official case data: parsing, repair, and derived series.

Source files are wide CSVs, one file per cumulative variable, with a
``Province/State,Country/Region,Lat,Long`` prefix followed by one column per
day (``M/D/YY``). Sources occasionally issue downward corrections and skip
days; ``repair_series`` makes every cumulative series non-decreasing and
contiguous so that windowed arithmetic downstream is exact.

All timestamps are UTC dates at daily resolution.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import Literal, Mapping, Sequence

from .gazetteer import Gazetteer, GazetteerEntry
from .geo import GeoPoint, LocationId

EXPECTED_HEADER = ("Province/State", "Country/Region", "Lat", "Long")

#: Basis for per-capita normalization.
PER_CAPITA_BASIS = 100_000

CUMULATIVE_VARIABLES = ("confirmed", "deaths", "recovered")


class CaseParseError(ValueError):
    """Raised on malformed case CSV input; names the offending row/column."""


class NormalizationError(ValueError):
    """Raised when a location lacks the denominator needed to normalize."""


@dataclass(frozen=True)
class CaseSeries:
    """Cumulative daily series for one location.

    The three series share a contiguous daily date axis starting at
    ``start``; each is non-decreasing once it has been through repair.
    """

    location: LocationId
    start: date
    confirmed: tuple[int, ...]
    deaths: tuple[int, ...]
    recovered: tuple[int, ...]

    def __post_init__(self) -> None:
        lengths = {len(self.confirmed), len(self.deaths), len(self.recovered)}
        if len(lengths) != 1:
            raise ValueError(f"location {self.location}: series lengths differ {lengths}")

    def __len__(self) -> int:
        return len(self.confirmed)

    @property
    def dates(self) -> list[date]:
        return [self.start + timedelta(days=i) for i in range(len(self))]


def repair_series(
    series: Mapping[date, int] | Sequence[int],
    start: date | None = None,
    end: date | None = None,
) -> list[int]:
    """Return a contiguous, non-decreasing cumulative series.

    Mapping input is spread over the daily axis [start, end] (defaulting to
    the observed extremes): missing days carry the previous value forward and
    days before the first observation are 0. Any decrease is clamped to the
    previous value. Sequence input is treated as already contiguous and only
    clamped. Idempotent.
    """
    if isinstance(series, Mapping):
        if not series and (start is None or end is None):
            return []
        lo = start if start is not None else min(series)
        hi = end if end is not None else max(series)
        values: list[int] = []
        prev = 0
        d = lo
        while d <= hi:
            v = series.get(d, prev)
            if v < prev:
                v = prev
            values.append(v)
            prev = v
            d += timedelta(days=1)
        return values
    out: list[int] = []
    prev = 0
    for v in series:
        if v < prev:
            v = prev
        out.append(v)
        prev = v
    return out


def derive_active(
    confirmed: Sequence[int], deaths: Sequence[int], recovered: Sequence[int]
) -> list[int]:
    """Active cases: confirmed minus deaths minus recovered, floored at 0.

    The floor guards jurisdictions that do not report recoveries and data
    corrections that momentarily invert the decomposition.
    """
    if not len(confirmed) == len(deaths) == len(recovered):
        raise ValueError(
            f"series lengths differ: {len(confirmed)}/{len(deaths)}/{len(recovered)}"
        )
    return [max(0, c - d - r) for c, d, r in zip(confirmed, deaths, recovered)]


def derive_daily_new(cumulative: Sequence[int]) -> list[int]:
    """First differences of a cumulative series; day 0 keeps its full value."""
    out: list[int] = []
    prev = 0
    for v in cumulative:
        out.append(v - prev)
        prev = v
    return out


def normalize(
    values: Sequence[float],
    mode: Literal["per_capita", "per_area"],
    location: LocationId,
    gazetteer: Gazetteer,
) -> list[float]:
    """Scale a series by the location's population (per 100k) or area (per km2)."""
    entry = gazetteer.get(location)
    if mode == "per_capita":
        if entry.population <= 0:
            raise NormalizationError(
                f"location {location} ({entry.canonical_name!r}) has no population"
            )
        return [v * PER_CAPITA_BASIS / entry.population for v in values]
    if mode == "per_area":
        if entry.area_km2 is None or entry.area_km2 <= 0:
            raise NormalizationError(
                f"location {location} ({entry.canonical_name!r}) has no area"
            )
        return [v / entry.area_km2 for v in values]
    raise ValueError(f"unknown normalization mode {mode!r}")


# -- CSV parsing -------------------------------------------------------------


def _parse_count(cell: str, row: int, column: str) -> int | None:
    cell = cell.strip()
    if cell == "":
        return None  # missing value, filled by repair
    try:
        f = float(cell)
    except ValueError:
        raise CaseParseError(
            f"row {row}, column {column!r}: non-numeric count {cell!r}"
        ) from None
    if not f.is_integer() or f < 0:
        raise CaseParseError(
            f"row {row}, column {column!r}: count must be a non-negative integer, got {cell!r}"
        )
    return int(f)


def _parse_header(header: Sequence[str]) -> list[date]:
    if tuple(h.strip().lstrip("﻿") for h in header[:4]) != EXPECTED_HEADER:
        raise CaseParseError(
            f"malformed header: expected {','.join(EXPECTED_HEADER)},<dates...>, "
            f"got {','.join(header[:4])}"
        )
    dates = []
    for col in header[4:]:
        try:
            dates.append(datetime.strptime(col.strip(), "%m/%d/%y").date())
        except ValueError:
            raise CaseParseError(f"malformed date column {col!r}") from None
    return dates


@dataclass(frozen=True)
class _RawTable:
    dates: list[date]
    rows: list[tuple[str, str, GeoPoint, dict[date, int]]]  # province, country, point, counts


def _parse_table(data: bytes | str) -> _RawTable:
    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CaseParseError("empty input: missing header") from None
    dates = _parse_header(header)
    rows = []
    seen: set[tuple[str, str]] = set()
    for rownum, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4 + len(dates):
            raise CaseParseError(
                f"row {rownum}: expected {4 + len(dates)} cells, got {len(row)}"
            )
        province, country = row[0].strip(), row[1].strip()
        key = (province.casefold(), country.casefold())
        if key in seen:
            raise CaseParseError(f"row {rownum}: duplicate location {province!r}/{country!r}")
        seen.add(key)
        try:
            point = GeoPoint(float(row[2]), float(row[3]))
        except ValueError as exc:
            raise CaseParseError(f"row {rownum}: bad coordinates: {exc}") from None
        counts: dict[date, int] = {}
        for d, cell in zip(dates, row[4:]):
            v = _parse_count(cell, rownum, d.strftime("%-m/%-d/%y"))
            if v is not None:
                counts[d] = v
        rows.append((province, country, point, counts))
    return _RawTable(dates=dates, rows=rows)


def _locate_row(
    gazetteer: Gazetteer, province: str, country: str, point: GeoPoint
) -> GazetteerEntry:
    """Map a CSV row to a gazetteer entry, creating entries for unknowns."""
    if not province:
        found = gazetteer.candidates(country)
        if found:
            return min(found, key=lambda e: (-e.population, e.id))
        return gazetteer.add_entry(country, point, "country")
    scoped = gazetteer.resolve_in_parent_named(province, country)
    if scoped is not None:
        return scoped
    parent = _locate_row(gazetteer, "", country, point)
    return gazetteer.add_entry(province, point, "state", parent=parent.id)


def parse_case_csv(
    data: bytes | str,
    gazetteer: Gazetteer,
    variable: str = "confirmed",
) -> list[CaseSeries]:
    """Parse one wide cumulative CSV into per-location series.

    The named variable is filled from the file; the other two cumulative
    series are zero on the same axis (use :func:`load_case_series` to join
    several variable files). Locations missing from the gazetteer are added
    with the row's coordinates.
    """
    if variable not in CUMULATIVE_VARIABLES:
        raise ValueError(f"unknown cumulative variable {variable!r}")
    table = _parse_table(data)
    if not table.dates or not table.rows:
        return []
    out = []
    lo, hi = table.dates[0], table.dates[-1]
    n = (hi - lo).days + 1
    for province, country, point, counts in table.rows:
        entry = _locate_row(gazetteer, province, country, point)
        filled = repair_series(counts, start=lo, end=hi)
        zeros = (0,) * n
        parts = {v: zeros for v in CUMULATIVE_VARIABLES}
        parts[variable] = tuple(filled)
        out.append(CaseSeries(location=entry.id, start=lo, **parts))
    return out


def load_case_series(
    gazetteer: Gazetteer,
    confirmed: bytes | str,
    deaths: bytes | str | None = None,
    recovered: bytes | str | None = None,
) -> list[CaseSeries]:
    """Join per-variable CSV files into one CaseSeries per location.

    The date axis is the union of the files' axes; locations absent from a
    file get zeros for that variable. Output is sorted by location id.
    """
    sources = {"confirmed": confirmed, "deaths": deaths, "recovered": recovered}
    tables = {v: _parse_table(d) for v, d in sources.items() if d is not None}
    all_dates = [d for t in tables.values() for d in t.dates]
    if not all_dates:
        return []
    lo, hi = min(all_dates), max(all_dates)
    n = (hi - lo).days + 1
    per_loc: dict[LocationId, dict[str, tuple[int, ...]]] = {}
    for variable, table in tables.items():
        for province, country, point, counts in table.rows:
            entry = _locate_row(gazetteer, province, country, point)
            filled = tuple(repair_series(counts, start=lo, end=hi))
            per_loc.setdefault(entry.id, {})[variable] = filled
    zeros = (0,) * n
    return [
        CaseSeries(
            location=loc,
            start=lo,
            confirmed=parts.get("confirmed", zeros),
            deaths=parts.get("deaths", zeros),
            recovered=parts.get("recovered", zeros),
        )
        for loc, parts in sorted(per_loc.items())
    ]


def serialize_case_csv(
    series: Sequence[CaseSeries],
    gazetteer: Gazetteer,
    variable: str = "confirmed",
) -> str:
    """Write per-location series back into the wide CSV format."""
    if variable not in CUMULATIVE_VARIABLES:
        raise ValueError(f"unknown cumulative variable {variable!r}")
    if not series:
        return ",".join(EXPECTED_HEADER) + "\r\n"
    starts = {s.start for s in series}
    lengths = {len(s) for s in series}
    if len(starts) != 1 or len(lengths) != 1:
        raise ValueError("all series must share one date axis to serialize")
    dates = series[0].dates
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(list(EXPECTED_HEADER) + [d.strftime("%-m/%-d/%y") for d in dates])
    for s in series:
        entry = gazetteer.get(s.location)
        if entry.admin_level == "country":
            province, country = "", entry.canonical_name
        else:
            parents = gazetteer.ancestor_ids(s.location)
            country = gazetteer.get(parents[-1]).canonical_name if parents else ""
            province = entry.canonical_name
        writer.writerow(
            [province, country, entry.point.lat, entry.point.lon]
            + list(getattr(s, variable))
        )
    return buf.getvalue()
