"""HTTP query surface over one immutable index snapshot.

Every endpoint is read-only: identical requests against the same snapshot
produce byte-identical bodies. All responses (including errors) carry a
top-level schema version field ``v``. Dates in query strings are
``YYYY-MM-DD``; a bbox is ``south,west,north,east``.
"""

from __future__ import annotations

import math
from datetime import date, datetime, time, timedelta, timezone

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from . import correlate
from .corpus import DEFAULT_QUERY_TERMS
from .gazetteer import UnknownLocationError, spatial_synonyms
from .geo import BoundingBox, DEFAULT_LAYERS, GeoPoint, TimeWindow, VariableKind
from .layout import circle_set_payload, layout_geocircles, marker_color, marker_radius
from .stindex import (
    FrameSpec,
    NoDataError,
    RollingAverage,
    StIndex,
    cluster_markers,
    frames,
    pick_nearest_nonzero,
    query_viewport,
)

SCHEMA_VERSION = 1

_VARIABLES_BY_NAME = {v.value.lower(): v for v in VariableKind}


def _bad_request(msg: str) -> HTTPException:
    return HTTPException(status_code=400, detail=msg)


def _parse_date(value: str, name: str) -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise _bad_request(f"{name}: expected YYYY-MM-DD, got {value!r}") from None


def _day_start(d: date) -> datetime:
    return datetime.combine(d, time.min, tzinfo=timezone.utc)


def _parse_window(start: str, end: str) -> TimeWindow:
    """Closed date range [start, end] as a half-open datetime window."""
    s = _parse_date(start, "start")
    e = _parse_date(end, "end")
    if e < s:
        raise _bad_request(f"end {e} precedes start {s}")
    return TimeWindow(_day_start(s), _day_start(e + timedelta(days=1)))


def _parse_bbox(value: str) -> BoundingBox:
    parts = value.split(",")
    if len(parts) != 4:
        raise _bad_request(f"bbox: expected south,west,north,east, got {value!r}")
    try:
        return BoundingBox(*(float(p) for p in parts))
    except ValueError as exc:
        raise _bad_request(f"bbox: {exc}") from None


def _parse_variables(value: str | None) -> list[VariableKind]:
    if not value:
        return list(DEFAULT_LAYERS)
    out = []
    for name in value.split(","):
        v = _VARIABLES_BY_NAME.get(name.strip().lower())
        if v is None:
            raise _bad_request(f"unknown variable {name!r}")
        if v not in out:
            out.append(v)
    return out


def _parse_frame_window(value: str) -> str | timedelta:
    """Named window size, or a custom day count like "10d"."""
    if value in ("hour", "day", "week", "month"):
        return value
    if value.endswith("d") and value[:-1].isdigit() and int(value[:-1]) > 0:
        return timedelta(days=int(value[:-1]))
    raise _bad_request(f"unknown window {value!r} (use hour/day/week/month or e.g. 10d)")


def _parse_mode(value: str | None):
    if value in (None, "", "instant"):
        return "instant"
    if value == "cumulative":
        return "cumulative"
    if value.startswith("rolling"):
        suffix = value[len("rolling"):]
        try:
            return RollingAverage(int(suffix) if suffix else 7)
        except ValueError:
            raise _bad_request(f"bad rolling mode {value!r}") from None
    raise _bad_request(f"unknown mode {value!r}")


def _default_zoom(bbox: BoundingBox, zmax: int) -> int:
    extent = max(bbox.east - bbox.west, 2 * (bbox.north - bbox.south), 1e-9)
    return max(0, min(zmax, int(math.floor(math.log2(360.0 / extent)))))


def _marker_payload(m) -> dict:
    n = len(m.locations)
    color = (
        marker_color(n)
        if m.variable is not None and m.variable.is_document_count
        else (m.variable.color if m.variable is not None else marker_color(n))
    )
    return {
        "lat": m.point.lat,
        "lon": m.point.lon,
        "count": m.count,
        "points": n,
        "radius_px": marker_radius(n),
        "color": color,
        "locations": list(m.locations),
    }


def create_app(index: StIndex | None = None) -> FastAPI:
    app = FastAPI(title="epimap", docs_url=None, redoc_url=None)
    app.state.index = index

    @app.exception_handler(HTTPException)
    async def _wrap_error(_req: Request, exc: HTTPException):
        return JSONResponse(
            status_code=exc.status_code,
            content={"v": SCHEMA_VERSION, "error": exc.detail},
        )

    def idx() -> StIndex:
        st = app.state.index
        if st is None:
            raise HTTPException(status_code=503, detail="no index loaded")
        return st

    @app.get("/layers")
    def layers():
        idx()
        return JSONResponse({
            "v": SCHEMA_VERSION,
            "layers": [
                {
                    "kind": v.value,
                    "color": v.color,
                    "style": "solid" if v.is_document_count else "hollow",
                    "default": v in DEFAULT_LAYERS,
                }
                for v in VariableKind
            ],
        })

    @app.get("/download")
    def download(keyword: str = "", start: str = "", end: str = ""):
        st = idx()
        if not keyword.strip():
            raise _bad_request("keyword must be non-empty")
        window = _parse_window(start, end)
        s, e = st.day_range(window)
        daily = st.keyword_daily(keyword.strip())
        news = daily[VariableKind.NEWS_COUNT][:, s:e]
        tweets = daily[VariableKind.TWEET_COUNT][:, s:e]
        locations = []
        for row in range(len(st.loc_ids)):
            if not news[row].any() and not tweets[row].any():
                continue
            entry = st.gazetteer.get(int(st.loc_ids[row]))
            days = []
            for j in range(e - s):
                n, t = int(news[row, j]), int(tweets[row, j])
                if n or t:
                    d = st.axis_start + timedelta(days=s + j)
                    days.append({"date": d.isoformat(), "news": n, "tweets": t})
            locations.append({
                "id": entry.id,
                "name": entry.canonical_name,
                "lat": entry.point.lat,
                "lon": entry.point.lon,
                "daily": days,
                "news_total": int(news[row].sum()),
                "tweet_total": int(tweets[row].sum()),
            })
        return JSONResponse({
            "v": SCHEMA_VERSION,
            "keyword": keyword.strip().lower(),
            "start": start,
            "end": end,
            "locations": locations,
        })

    @app.get("/frames")
    def frame_sequence(
        bbox: str = "",
        start: str = "",
        end: str = "",
        window: str = "day",
        step: str = "day",
        mode: str = "instant",
        variables: str = "",
        zoom: int | None = None,
        keyword: str | None = None,
        zero: str | None = None,
    ):
        st = idx()
        box = _parse_bbox(bbox)
        s = _parse_date(start, "start")
        e = _parse_date(end, "end")
        if e <= s:
            raise _bad_request(f"end {e} must follow start {s}")
        agg = _parse_mode(mode)
        kinds = _parse_variables(variables)
        zero_var = None
        if zero:
            zero_var = _VARIABLES_BY_NAME.get(zero.strip().lower())
            if zero_var is None:
                raise _bad_request(f"unknown variable {zero!r}")
        try:
            spec = FrameSpec.of(
                _day_start(s), _day_start(e),
                window=_parse_frame_window(window), step=step, mode=agg,
            )
        except ValueError as exc:
            raise _bad_request(str(exc)) from None
        z = _default_zoom(box, st.zmax) if zoom is None else zoom
        if not 0 <= z <= st.zmax:
            raise _bad_request(f"zoom must be in [0, {st.zmax}]")

        per_kind = {v: frames(st, spec, box, v, keyword=keyword) for v in kinds}
        zero_frames = (
            frames(st, spec, box, zero_var, keyword=keyword) if zero_var is not None else None
        )
        n_frames = len(next(iter(per_kind.values()))) if per_kind else 0
        doc_layers = sum(1 for v in kinds if v.is_document_count)
        out = []
        for i in range(n_frames):
            boundaries = per_kind[kinds[0]][i]
            values = {v: per_kind[v][i].values for v in kinds}
            if zero_frames is not None:
                occupied = {lv.location for lv in zero_frames[i].values}
                values = {
                    v: tuple(lv for lv in vals if lv.location not in occupied)
                    for v, vals in values.items()
                }
            markers = {
                v.value: [
                    _marker_payload(m) for m in cluster_markers(vals, z, variable=v)
                ]
                for v, vals in values.items()
            }
            by_location: dict[int, dict[VariableKind, float]] = {}
            points: dict[int, GeoPoint] = {}
            for v, vals in values.items():
                for lv in vals:
                    by_location.setdefault(lv.location, {})[v] = lv.value
                    points[lv.location] = lv.point
            circles = [
                circle_set_payload(
                    layout_geocircles(points[loc], by_location[loc], doc_layers)
                )
                | {"location": loc}
                for loc in sorted(by_location)
            ]
            out.append({
                "start": boundaries.start.isoformat(),
                "end": boundaries.end.isoformat(),
                "markers": markers,
                "geocircles": circles,
            })
        return JSONResponse({"v": SCHEMA_VERSION, "zoom": z, "frames": out})

    @app.get("/pick")
    def pick(
        lat: float = 0.0,
        lon: float = 0.0,
        start: str = "",
        end: str = "",
        variables: str = "",
    ):
        st = idx()
        window = _parse_window(start, end)
        kinds = _parse_variables(variables)
        try:
            p = GeoPoint(lat, lon)
        except ValueError as exc:
            raise _bad_request(str(exc)) from None
        try:
            result = pick_nearest_nonzero(st, p, window, kinds)
        except NoDataError:
            raise HTTPException(status_code=404, detail="no nonzero location in window") from None
        entry = st.gazetteer.get(result.location)
        return JSONResponse({
            "v": SCHEMA_VERSION,
            "location": {
                "id": entry.id,
                "name": entry.canonical_name,
                "lat": entry.point.lat,
                "lon": entry.point.lon,
            },
            "distance_km": result.distance_km,
            "values": {v.value: n for v, n in result.values.items()},
        })

    @app.get("/documents")
    def documents(
        location: str = "",
        start: str = "",
        end: str = "",
        synonyms: bool = False,
    ):
        st = idx()
        window = _parse_window(start, end)
        try:
            loc = int(location) if location.strip().lstrip("-").isdigit() else None
            if loc is None:
                loc = st.gazetteer.resolve(location).id
            else:
                st.gazetteer.get(loc)
        except UnknownLocationError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        wanted = {loc}
        if synonyms:
            wanted.update(spatial_synonyms(loc, st.gazetteer))
        hits = [
            d for d in st.documents
            if (set(d.locations) & wanted)
            and window.start <= d.published_at < window.end
        ]
        hits.sort(key=lambda d: (d.published_at, d.doc_id), reverse=True)
        return JSONResponse({
            "v": SCHEMA_VERSION,
            "location": loc,
            "synonyms": synonyms,
            "documents": [
                {
                    "id": d.doc_id,
                    "title": d.title,
                    "url": None,
                    "published_at": d.published_at.isoformat(),
                    "source_type": d.source_type,
                }
                for d in hits
            ],
        })

    @app.get("/correlation")
    def correlation(area: str = "", filter: str = "default", exclude: str = ""):
        st = idx()
        if not area.strip():
            raise _bad_request("area must be given")
        if area.strip().lower() == "world":
            area_id = None
            area_name = "World"
        else:
            try:
                entry = st.gazetteer.resolve(area.strip())
            except UnknownLocationError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from None
            area_id, area_name = entry.id, entry.canonical_name
        if filter.strip().lower() in ("none", "off"):
            terms = None
        elif filter.strip().lower() in ("", "default"):
            terms = DEFAULT_QUERY_TERMS
        else:
            terms = tuple(t.strip().lower() for t in filter.split(",") if t.strip())
        excluded = frozenset(
            _parse_date(d.strip(), "exclude") for d in exclude.split(",") if d.strip()
        )
        try:
            result = correlate.area_correlation(st, area_id, terms, excluded)
        except correlate.CorrelationError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return JSONResponse({
            "v": SCHEMA_VERSION,
            "area": area_name,
            "area_id": area_id,
            "filter": None if terms is None else list(terms),
            "coefficient": result.coefficient,
            "coefficient_daily": result.coefficient_daily,
            "n_points": result.n_points,
            "excluded_dates": [d.isoformat() for d in result.excluded_dates],
        })

    return app
