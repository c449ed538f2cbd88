"""The spatiotemporal index: multi-resolution grids over per-day counts.

Every variable is reduced to one daily array per location on a shared date
axis, with prefix sums alongside, so any window aggregate is two array
lookups. Cumulative disease series enter as their first differences, which
makes three aggregation modes fall out of the same arithmetic:

  instant      sum of daily values over the window
               (= cumulative(end-1) - cumulative(start-1), exactly)
  cumulative   running total from the data start through the window's end
  rolling(k)   mean of the daily values over the k days ending at the
               window's last day (days before the axis count as zero)

Spatially, each location is a point assigned to exactly one grid cell per
zoom level; cell sides halve with each zoom, so the markers at zoom z+1
always partition the markers at zoom z and their counts sum exactly.

Time is kept at daily resolution: a sub-day window expands to the covering
day range, so hourly frames repeat the containing day's value.

The index is immutable once built; readers never coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from typing import Literal, Mapping, Sequence

import numpy as np

from .cases import CaseSeries, derive_active, derive_daily_new, repair_series
from .corpus import DocumentRecords, GeocodedKeyword
from .gazetteer import Gazetteer, UnknownLocationError
from .geo import (
    BoundingBox,
    GeoPoint,
    LocationId,
    TimeWindow,
    VariableKind,
    as_utc,
)

MAX_ZOOM = 18

WINDOW_SIZES: dict[str, timedelta] = {
    "hour": timedelta(hours=1),
    "day": timedelta(days=1),
    "week": timedelta(days=7),
    "month": timedelta(days=30),
}

STEP_SIZES: dict[str, timedelta] = {
    "day": timedelta(days=1),
    "week": timedelta(days=7),
    "month": timedelta(days=30),
}

DISEASE_VARIABLES = (
    VariableKind.CONFIRMED,
    VariableKind.ACTIVE,
    VariableKind.DEATHS,
    VariableKind.RECOVERED,
)


class IndexBuildError(ValueError):
    """Raised when inputs reference locations missing from the gazetteer."""


class NoDataError(LookupError):
    """Raised by pick when no location has a nonzero value in the window."""


@dataclass(frozen=True)
class RollingAverage:
    """Trailing k-day mean, k days ending at the window's last day."""

    days: int

    def __post_init__(self) -> None:
        if self.days < 1:
            raise ValueError(f"rolling window must be >= 1 day, got {self.days}")


AggregationMode = Literal["instant", "cumulative"] | RollingAverage


@dataclass(frozen=True)
class FrameSpec:
    """Parameters of an animation: how wide each frame is and how it advances.

    ``window`` and ``step`` are fixed durations (month = 30 days) so frame
    arithmetic stays exact; ``window`` may also be a custom timedelta.
    """

    start: datetime
    end: datetime
    window: timedelta
    step: timedelta
    mode: AggregationMode = "instant"

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", as_utc(self.start))
        object.__setattr__(self, "end", as_utc(self.end))
        if not self.start < self.end:
            raise ValueError("frame range start must precede end")
        if self.window <= timedelta(0) or self.step <= timedelta(0):
            raise ValueError("window and step must be positive")

    @classmethod
    def of(
        cls,
        start: datetime,
        end: datetime,
        window: str | timedelta = "day",
        step: str | timedelta = "day",
        mode: AggregationMode = "instant",
    ) -> "FrameSpec":
        if isinstance(window, str):
            if window not in WINDOW_SIZES:
                raise ValueError(f"unknown window {window!r}")
            window = WINDOW_SIZES[window]
        if isinstance(step, str):
            if step not in STEP_SIZES:
                raise ValueError(f"unknown step {step!r}")
            step = STEP_SIZES[step]
        return cls(start=start, end=end, window=window, step=step, mode=mode)


@dataclass(frozen=True)
class LocationValue:
    """One location's aggregate for a window."""

    location: LocationId
    point: GeoPoint
    value: float


@dataclass(frozen=True)
class Frame:
    start: datetime
    end: datetime
    values: tuple[LocationValue, ...]


@dataclass(frozen=True)
class Marker:
    """An aggregate of point records within one grid cell."""

    locations: tuple[LocationId, ...]
    point: GeoPoint
    count: float
    variable: VariableKind | None = None


@dataclass(frozen=True)
class PickResult:
    location: LocationId
    distance_km: float
    values: dict[VariableKind, float]


def _floor_day(t: datetime) -> date:
    return as_utc(t).date()


def _ceil_day(t: datetime) -> date:
    t = as_utc(t)
    d = t.date()
    if t.time() == time.min:
        return d
    return d + timedelta(days=1)


class StIndex:
    """Immutable query structure over (location, day, variable) counts."""

    def __init__(
        self,
        gazetteer: Gazetteer,
        axis_start: date | None,
        n_days: int,
        daily: Mapping[VariableKind, np.ndarray],
        zmax: int,
        documents: tuple[DocumentRecords, ...] = (),
    ) -> None:
        self.gazetteer = gazetteer
        self.axis_start = axis_start
        self.n_days = n_days
        self.zmax = zmax
        self.documents = documents
        ids = gazetteer.ids()
        self.loc_ids = np.asarray(ids, dtype=np.int64)
        self._row_of = {loc: i for i, loc in enumerate(ids)}
        self.lats = np.asarray([gazetteer.get(i).point.lat for i in ids], dtype=np.float64)
        self.lons = np.asarray([gazetteer.get(i).point.lon for i in ids], dtype=np.float64)
        self._daily = {v: np.asarray(daily[v], dtype=np.int64) for v in VariableKind}
        self._prefix = {}
        for v, arr in self._daily.items():
            if arr.shape != (len(ids), n_days):
                raise IndexBuildError(
                    f"{v.value}: daily array shape {arr.shape} != {(len(ids), n_days)}"
                )
            p = np.zeros((len(ids), n_days + 1), dtype=np.int64)
            np.cumsum(arr, axis=1, out=p[:, 1:])
            self._prefix[v] = p
        self.zoom_cells = [self._cell_assignment(z) for z in range(zmax + 1)]
        self._keyword_daily: dict[str, dict[VariableKind, np.ndarray]] = {}

    # -- spatial grid -------------------------------------------------------

    def _cell_assignment(self, zoom: int) -> np.ndarray:
        ncells = 1 << zoom
        col = np.clip((self.lons + 180.0) // (360.0 / ncells), 0, ncells - 1).astype(np.int64)
        row = np.clip((self.lats + 90.0) // (180.0 / ncells), 0, ncells - 1).astype(np.int64)
        return row * ncells + col

    @property
    def axis_dates(self) -> list[date]:
        if self.axis_start is None:
            return []
        return [self.axis_start + timedelta(days=i) for i in range(self.n_days)]

    @property
    def axis_end(self) -> date | None:
        if self.axis_start is None:
            return None
        return self.axis_start + timedelta(days=self.n_days)

    def row(self, loc: LocationId) -> int:
        try:
            return self._row_of[loc]
        except KeyError:
            raise UnknownLocationError(f"unknown location id {loc}") from None

    def day_range(self, w: TimeWindow) -> tuple[int, int]:
        """Clip a window to the date axis as [start_day, end_day) offsets."""
        if self.axis_start is None:
            return (0, 0)
        s = (_floor_day(w.start) - self.axis_start).days
        e = (_ceil_day(w.end) - self.axis_start).days
        return (min(max(s, 0), self.n_days), min(max(e, 0), self.n_days))

    def prefix(self, v: VariableKind) -> np.ndarray:
        return self._prefix[v]

    def daily(self, v: VariableKind) -> np.ndarray:
        return self._daily[v]

    # -- per-keyword document counts -----------------------------------------

    def keyword_daily(self, keyword: str) -> dict[VariableKind, np.ndarray]:
        """Daily news/tweet record counts restricted to one keyword."""
        key = keyword.lower()
        cached = self._keyword_daily.get(key)
        if cached is not None:
            return cached
        shape = (len(self.loc_ids), self.n_days)
        out = {
            VariableKind.NEWS_COUNT: np.zeros(shape, dtype=np.int64),
            VariableKind.TWEET_COUNT: np.zeros(shape, dtype=np.int64),
        }
        if self.axis_start is None:
            self._keyword_daily[key] = out
            return out
        for doc in self.documents:
            if key not in doc.keywords:
                continue
            day = (doc.published_at.date() - self.axis_start).days
            if not 0 <= day < self.n_days:
                continue
            v = VariableKind.NEWS_COUNT if doc.source_type == "news" else VariableKind.TWEET_COUNT
            for loc in doc.locations:
                out[v][self.row(loc), day] += 1
        self._keyword_daily[key] = out
        return out


def _series_on_axis(values: Sequence[int], series_start: date, axis_start: date, n_days: int) -> np.ndarray:
    """Spread a contiguous cumulative series onto the global axis.

    Days before the series start are 0; days past its end carry the last
    value forward (a cumulative total persists). The axis is the envelope of
    all inputs, so the series always fits inside it.
    """
    out = np.zeros(n_days, dtype=np.int64)
    if not len(values):
        return out
    offset = (series_start - axis_start).days
    end = offset + len(values)
    out[offset:end] = values
    if end < n_days:
        out[end:] = values[-1]
    return out


def build_index(
    cases: Sequence[CaseSeries],
    records: Sequence[GeocodedKeyword],
    gazetteer: Gazetteer,
    zmax: int = 12,
    documents: Sequence[DocumentRecords] = (),
) -> StIndex:
    """Assemble the index from repaired case series and geocoded records.

    Document variables count records per (location, day); disease variables
    come from the cumulative series, with active derived as
    confirmed - deaths - recovered (floored at zero).
    """
    if not 0 <= zmax <= MAX_ZOOM:
        raise ValueError(f"zmax must be in [0, {MAX_ZOOM}], got {zmax}")
    for s in cases:
        if s.location not in gazetteer:
            raise IndexBuildError(f"case series references unknown location {s.location}")
    for r in records:
        if r.location not in gazetteer:
            raise IndexBuildError(f"record references unknown location {r.location}")

    bounds: list[date] = []
    for s in cases:
        if len(s):
            bounds.append(s.start)
            bounds.append(s.start + timedelta(days=len(s) - 1))
    for r in records:
        bounds.append(r.timestamp.date())
    ids = gazetteer.ids()
    nloc = len(ids)
    if not bounds:
        empty = {v: np.zeros((nloc, 0), dtype=np.int64) for v in VariableKind}
        return StIndex(gazetteer, None, 0, empty, zmax, tuple(documents))

    axis_start, axis_last = min(bounds), max(bounds)
    n_days = (axis_last - axis_start).days + 1
    row_of = {loc: i for i, loc in enumerate(ids)}

    cum = {
        v: np.zeros((nloc, n_days), dtype=np.int64)
        for v in (VariableKind.CONFIRMED, VariableKind.DEATHS, VariableKind.RECOVERED)
    }
    for s in cases:
        i = row_of[s.location]
        cum[VariableKind.CONFIRMED][i] = _series_on_axis(
            repair_series(s.confirmed), s.start, axis_start, n_days
        )
        cum[VariableKind.DEATHS][i] = _series_on_axis(
            repair_series(s.deaths), s.start, axis_start, n_days
        )
        cum[VariableKind.RECOVERED][i] = _series_on_axis(
            repair_series(s.recovered), s.start, axis_start, n_days
        )
    active = np.maximum(
        cum[VariableKind.CONFIRMED] - cum[VariableKind.DEATHS] - cum[VariableKind.RECOVERED],
        0,
    )

    daily: dict[VariableKind, np.ndarray] = {}
    for v, arr in cum.items():
        daily[v] = np.diff(arr, axis=1, prepend=0)
    daily[VariableKind.ACTIVE] = np.diff(active, axis=1, prepend=0)

    news = np.zeros((nloc, n_days), dtype=np.int64)
    tweets = np.zeros((nloc, n_days), dtype=np.int64)
    for r in records:
        day = (r.timestamp.date() - axis_start).days
        target = news if r.source_type == "news" else tweets
        target[row_of[r.location], day] += 1
    daily[VariableKind.NEWS_COUNT] = news
    daily[VariableKind.TWEET_COUNT] = tweets

    return StIndex(gazetteer, axis_start, n_days, daily, zmax, tuple(documents))


# -- aggregation ---------------------------------------------------------------


def _window_values(
    idx: StIndex,
    rows: np.ndarray | slice,
    v: VariableKind,
    w: TimeWindow,
    mode: AggregationMode,
    prefix: np.ndarray | None = None,
) -> np.ndarray:
    p = idx.prefix(v) if prefix is None else prefix
    s, e = idx.day_range(w)
    if isinstance(mode, RollingAverage):
        lo = max(e - mode.days, 0)
        return (p[rows, e] - p[rows, lo]) / mode.days
    if mode == "instant":
        return p[rows, e] - p[rows, s]
    if mode == "cumulative":
        return p[rows, e]
    raise ValueError(f"unknown aggregation mode {mode!r}")


def aggregate_window(
    idx: StIndex,
    loc: LocationId,
    v: VariableKind,
    w: TimeWindow,
    mode: AggregationMode = "instant",
) -> float:
    """Aggregate one location's variable over a window (clipped to the axis)."""
    row = idx.row(loc)
    out = _window_values(idx, np.asarray([row]), v, w, mode)[0]
    return float(out) if isinstance(mode, RollingAverage) else int(out)


def query_viewport(
    idx: StIndex,
    bbox: BoundingBox,
    w: TimeWindow,
    v: VariableKind,
    mode: AggregationMode = "instant",
    keyword: str | None = None,
) -> list[LocationValue]:
    """All locations inside the box with a nonzero aggregate, by ascending id.

    ``keyword`` restricts the document-count variables to records carrying
    that keyword; it is ignored for disease variables.
    """
    mask = (
        (idx.lats >= bbox.south)
        & (idx.lats <= bbox.north)
        & (idx.lons >= bbox.west)
        & (idx.lons <= bbox.east)
    )
    rows = np.nonzero(mask)[0]
    if rows.size == 0 or idx.n_days == 0:
        return []
    prefix = None
    if keyword is not None and v.is_document_count:
        arr = idx.keyword_daily(keyword)[v]
        prefix = np.zeros((arr.shape[0], arr.shape[1] + 1), dtype=np.int64)
        np.cumsum(arr, axis=1, out=prefix[:, 1:])
    vals = _window_values(idx, rows, v, w, mode, prefix=prefix)
    keep = np.nonzero(vals != 0)[0]
    return [
        LocationValue(
            location=int(idx.loc_ids[rows[i]]),
            point=GeoPoint(float(idx.lats[rows[i]]), float(idx.lons[rows[i]])),
            value=float(vals[i]) if isinstance(mode, RollingAverage) else int(vals[i]),
        )
        for i in keep
    ]


def frames(
    idx: StIndex,
    spec: FrameSpec,
    bbox: BoundingBox,
    v: VariableKind,
    keyword: str | None = None,
) -> list[Frame]:
    """Animation frames: window [start + i*step, ...+window), clipped to end.

    Cumulative mode widens every frame back to the range start, so values
    never shrink as the animation advances.
    """
    out: list[Frame] = []
    i = 0
    while True:
        f_start = spec.start + i * spec.step
        if f_start >= spec.end:
            break
        f_end = min(f_start + spec.window, spec.end)
        if spec.mode == "cumulative":
            window = TimeWindow(spec.start, f_end)
        else:
            window = TimeWindow(f_start, f_end)
        out.append(
            Frame(
                start=f_start,
                end=f_end,
                values=tuple(query_viewport(idx, bbox, window, v, spec.mode, keyword)),
            )
        )
        i += 1
    return out


def cluster_markers(
    values: Sequence[LocationValue],
    zoom: int,
    variable: VariableKind | None = None,
) -> list[Marker]:
    """Merge per-location values into one marker per grid cell.

    Cells are 360/2^zoom degrees wide and 180/2^zoom tall, so each marker at
    zoom z splits into exactly the markers of its cell's four children at
    z+1. Marker centroids weight member points by |value|; output order
    follows the linear cell index, members sort by id.
    """
    if not 0 <= zoom <= MAX_ZOOM:
        raise ValueError(f"zoom must be in [0, {MAX_ZOOM}], got {zoom}")
    ncells = 1 << zoom
    cell_w = 360.0 / ncells
    cell_h = 180.0 / ncells
    groups: dict[int, list[LocationValue]] = {}
    for lv in values:
        col = min(int((lv.point.lon + 180.0) // cell_w), ncells - 1)
        row = min(int((lv.point.lat + 90.0) // cell_h), ncells - 1)
        groups.setdefault(row * ncells + col, []).append(lv)
    markers = []
    for cell in sorted(groups):
        members = sorted(groups[cell], key=lambda lv: lv.location)
        total = sum(m.value for m in members)
        weights = [abs(m.value) for m in members]
        wsum = sum(weights)
        if wsum > 0:
            lat = sum(wt * m.point.lat for wt, m in zip(weights, members)) / wsum
            lon = sum(wt * m.point.lon for wt, m in zip(weights, members)) / wsum
        else:
            lat = sum(m.point.lat for m in members) / len(members)
            lon = sum(m.point.lon for m in members) / len(members)
        markers.append(
            Marker(
                locations=tuple(m.location for m in members),
                point=GeoPoint(lat, lon),
                count=total,
                variable=variable,
            )
        )
    return markers


def pick_nearest_nonzero(
    idx: StIndex,
    p: GeoPoint,
    w: TimeWindow,
    active_variables: Sequence[VariableKind],
) -> PickResult:
    """The location nearest ``p`` with any nonzero instant value in the window.

    Ties in distance go to the smaller id. Raises :class:`NoDataError` when
    every location is zero for every active variable.
    """
    if not active_variables:
        raise ValueError("at least one variable must be active")
    if idx.n_days == 0 or len(idx.loc_ids) == 0:
        raise NoDataError("index holds no data")
    s, e = idx.day_range(w)
    per_var = {
        v: idx.prefix(v)[:, e] - idx.prefix(v)[:, s] for v in active_variables
    }
    nonzero = np.zeros(len(idx.loc_ids), dtype=bool)
    for vals in per_var.values():
        nonzero |= vals != 0
    rows = np.nonzero(nonzero)[0]
    if rows.size == 0:
        raise NoDataError("no location has a nonzero value in the window")
    lat1 = np.radians(p.lat)
    lat2 = np.radians(idx.lats[rows])
    dlat = np.radians(idx.lats[rows] - p.lat)
    dlon = np.radians(idx.lons[rows] - p.lon)
    h = np.sin(dlat / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2) ** 2
    dist = 2 * 6371.0 * np.arcsin(np.sqrt(h))
    k = int(np.argmin(dist))  # rows ascend by id, so ties resolve to the smaller id
    best = int(rows[k])
    return PickResult(
        location=int(idx.loc_ids[best]),
        distance_km=float(dist[k]),
        values={v: int(vals[best]) for v, vals in per_var.items()},
    )
