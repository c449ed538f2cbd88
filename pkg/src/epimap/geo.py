"""Geometric and temporal primitives shared by every other module.

Everything here is immutable after construction and safe to share across
threads. Validation happens in ``__post_init__``: an out-of-range point or
an inverted box cannot exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

EARTH_RADIUS_KM = 6371.0

#: Stable identifier of a gazetteer location. Unique within one gazetteer load.
LocationId = int


def as_utc(t: datetime) -> datetime:
    """Normalize a timestamp to aware UTC. Naive datetimes are taken as UTC."""
    if t.tzinfo is None:
        return t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc)


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 latitude/longitude pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range [-90, 90]: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range [-180, 180]: {self.lon}")


@dataclass(frozen=True)
class BoundingBox:
    """A closed lat/lon box: south <= north and west <= east.

    Boxes that would cross the antimeridian (west > east) are rejected;
    callers wanting such a viewport must split it themselves.
    """

    south: float
    west: float
    north: float
    east: float

    def __post_init__(self) -> None:
        GeoPoint(self.south, self.west)
        GeoPoint(self.north, self.east)
        if self.south > self.north:
            raise ValueError(f"south > north: {self.south} > {self.north}")
        if self.west > self.east:
            raise ValueError(
                f"west > east ({self.west} > {self.east}); "
                "antimeridian-crossing boxes are not supported"
            )


@dataclass(frozen=True)
class TimeWindow:
    """A half-open UTC interval [start, end)."""

    start: datetime
    end: datetime

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", as_utc(self.start))
        object.__setattr__(self, "end", as_utc(self.end))
        if not self.start < self.end:
            raise ValueError(f"start must precede end: {self.start} >= {self.end}")


class VariableKind(Enum):
    """The six dynamic variables the engine tracks.

    Four disease variables come from official case data; the two document
    counts come from the corpus pipeline. Each kind has a fixed display
    color so that a circle's color alone identifies the variable.
    """

    CONFIRMED = "Confirmed"
    ACTIVE = "Active"
    DEATHS = "Deaths"
    RECOVERED = "Recovered"
    NEWS_COUNT = "NewsCount"
    TWEET_COUNT = "TweetCount"

    @property
    def color(self) -> str:
        return _VARIABLE_COLORS[self]

    @property
    def is_document_count(self) -> bool:
        return self in (VariableKind.NEWS_COUNT, VariableKind.TWEET_COUNT)

    @property
    def is_disease(self) -> bool:
        return not self.is_document_count


_VARIABLE_COLORS = {
    VariableKind.CONFIRMED: "#d62728",
    VariableKind.ACTIVE: "#ff7f0e",
    VariableKind.DEATHS: "#2c2c2c",
    VariableKind.RECOVERED: "#2ca02c",
    VariableKind.NEWS_COUNT: "#1f77b4",
    VariableKind.TWEET_COUNT: "#9467bd",
}

#: Layers active when a client first connects.
DEFAULT_LAYERS = (VariableKind.NEWS_COUNT, VariableKind.CONFIRMED)


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points in kilometers."""
    lat1, lat2 = math.radians(a.lat), math.radians(b.lat)
    dlat = math.radians(b.lat - a.lat)
    dlon = math.radians(b.lon - a.lon)
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def bbox_contains(box: BoundingBox, p: GeoPoint) -> bool:
    """True iff ``p`` lies within the closed box (boundary points included)."""
    return box.south <= p.lat <= box.north and box.west <= p.lon <= box.east


def window_contains(w: TimeWindow, t: datetime) -> bool:
    """True iff ``start <= t < end``."""
    t = as_utc(t)
    return w.start <= t < w.end
