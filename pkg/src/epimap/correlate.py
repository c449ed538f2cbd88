"""Correlation between document activity and confirmed cases, by area.

The question under evaluation: does the volume of geocoded keyword records
in an area track the official case curve there? Both sides are reduced to
aligned per-day series over the area's containment closure (the location
plus everything inside it), known-bad collection dates are dropped from
both series symmetrically, and a sample Pearson coefficient is computed.

Two series constructions are supported and both are reported: running
totals since the data start ("cumulative", the headline number) and
per-day new counts ("daily"). Independent processes are only visibly
uncorrelated in the daily form; any two running totals trend together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Literal, Mapping, Sequence

import numpy as np

from .corpus import keyword_filter
from .geo import LocationId, VariableKind
from .stindex import StIndex


class CorrelationError(ValueError):
    """Base for correlation input problems."""


class LengthMismatchError(CorrelationError):
    pass


class InsufficientDataError(CorrelationError):
    pass


class ZeroVarianceError(CorrelationError):
    """A constant series has no defined correlation; failing loudly beats
    quietly reporting 0 in a sweep."""


@dataclass(frozen=True)
class AlignedPair:
    """Two series on a shared date axis, with the dropped dates recorded."""

    dates: tuple[date, ...]
    x: tuple[float, ...]
    y: tuple[float, ...]
    excluded_dates: frozenset[date]

    def __post_init__(self) -> None:
        if not len(self.dates) == len(self.x) == len(self.y):
            raise LengthMismatchError("dates, x, and y must have equal length")
        if self.excluded_dates & set(self.dates):
            raise ValueError("excluded dates must not appear on the axis")


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient.

    Computed about the means with compensated summation, so it is symmetric
    and affine-invariant to machine precision.
    """
    if len(x) != len(y):
        raise LengthMismatchError(f"series lengths differ: {len(x)} != {len(y)}")
    n = len(x)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 points, got {n}")
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    if sxx == 0.0:
        raise ZeroVarianceError("x series has zero variance")
    if syy == 0.0:
        raise ZeroVarianceError("y series has zero variance")
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    return sxy / math.sqrt(sxx * syy)


def align(
    articles: Mapping[date, float],
    cases: Mapping[date, float],
    exclude: frozenset[date] | set[date] = frozenset(),
) -> AlignedPair:
    """Intersect two per-date series and drop excluded dates from both."""
    common = sorted((set(articles) & set(cases)) - set(exclude))
    if not common:
        raise InsufficientDataError("date ranges do not overlap after exclusion")
    return AlignedPair(
        dates=tuple(common),
        x=tuple(articles[d] for d in common),
        y=tuple(cases[d] for d in common),
        excluded_dates=frozenset(exclude),
    )


SeriesForm = Literal["cumulative", "daily"]


@dataclass(frozen=True)
class CorrelationResult:
    area: LocationId | None  # None = world
    filter_terms: tuple[str, ...] | None
    coefficient: float  # cumulative series (headline)
    coefficient_daily: float
    n_points: int
    excluded_dates: tuple[date, ...]


def _closure_rows(idx: StIndex, area: LocationId | None) -> list[int]:
    if area is None:
        return list(range(len(idx.loc_ids)))
    ids = idx.gazetteer.closure_ids(area)
    return [idx.row(i) for i in ids]


def _daily_article_counts(
    idx: StIndex, rows: Sequence[int], query_terms: Sequence[str] | None
) -> np.ndarray:
    """Per-day news record counts over a location closure.

    A record is one (keyword, location) pair, so a document contributes its
    keyword count once per closure location it mentions. ``query_terms``
    keeps only documents whose extracted keywords satisfy the filter.
    """
    closure = {int(idx.loc_ids[r]) for r in rows}
    out = np.zeros(idx.n_days, dtype=np.int64)
    for doc in idx.documents:
        if doc.source_type != "news":
            continue
        if query_terms is not None and not keyword_filter(doc.keywords, query_terms):
            continue
        hits = sum(1 for loc in doc.locations if loc in closure)
        if not hits:
            continue
        day = (doc.published_at.date() - idx.axis_start).days
        if 0 <= day < idx.n_days:
            out[day] += len(doc.keywords) * hits
    return out


def area_series(
    idx: StIndex,
    area: LocationId | None,
    query_terms: Sequence[str] | None,
) -> tuple[dict[date, float], dict[date, float], dict[date, float], dict[date, float]]:
    """(x_cumulative, y_cumulative, x_daily, y_daily) per-date maps for an area."""
    if idx.axis_start is None:
        raise InsufficientDataError("index holds no data")
    rows = _closure_rows(idx, area)
    x_daily = _daily_article_counts(idx, rows, query_terms)
    x_cum = np.cumsum(x_daily)
    p = idx.prefix(VariableKind.CONFIRMED)
    y_cum = p[rows, 1:].sum(axis=0)
    y_daily = np.diff(y_cum, prepend=0)
    dates = idx.axis_dates
    return (
        {d: float(v) for d, v in zip(dates, x_cum)},
        {d: float(v) for d, v in zip(dates, y_cum)},
        {d: float(v) for d, v in zip(dates, x_daily)},
        {d: float(v) for d, v in zip(dates, y_daily)},
    )


def evaluate_area(
    idx: StIndex,
    area: LocationId | None,
    query_terms: Sequence[str] | None = None,
    exclude: frozenset[date] | set[date] = frozenset(),
    series: SeriesForm = "cumulative",
) -> float:
    """Pearson coefficient between article records and confirmed cases.

    ``area`` scopes both sides to the location's containment closure
    (None means everywhere); ``query_terms`` switches between the filtered
    and unfiltered corpus; ``exclude`` drops known-bad dates from both
    series before correlating.
    """
    x_cum, y_cum, x_daily, y_daily = area_series(idx, area, query_terms)
    if series == "cumulative":
        pair = align(x_cum, y_cum, exclude)
    elif series == "daily":
        pair = align(x_daily, y_daily, exclude)
    else:
        raise ValueError(f"unknown series form {series!r}")
    return pearson(pair.x, pair.y)


def area_correlation(
    idx: StIndex,
    area: LocationId | None,
    query_terms: Sequence[str] | None = None,
    exclude: frozenset[date] | set[date] = frozenset(),
) -> CorrelationResult:
    """Both series forms at once, for reporting."""
    x_cum, y_cum, x_daily, y_daily = area_series(idx, area, query_terms)
    pair_cum = align(x_cum, y_cum, exclude)
    pair_daily = align(x_daily, y_daily, exclude)
    return CorrelationResult(
        area=area,
        filter_terms=None if query_terms is None else tuple(query_terms),
        coefficient=pearson(pair_cum.x, pair_cum.y),
        coefficient_daily=pearson(pair_daily.x, pair_daily.y),
        n_points=len(pair_cum.dates),
        excluded_dates=tuple(sorted(exclude)),
    )
