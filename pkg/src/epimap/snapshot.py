"""Index snapshots: ingest once, serve an immutable artifact.

A snapshot is gzipped JSON holding the parsed inputs (gazetteer entries,
repaired case series, document records); the query index is rebuilt from
them on load. Storing inputs instead of derived arrays keeps one build code
path and makes snapshots small and diffable. The format carries a version
field and refuses anything it does not understand.
"""

from __future__ import annotations

import gzip
import json
from datetime import date, datetime
from pathlib import Path
from typing import Sequence

from .cases import CaseSeries
from .corpus import DocumentRecords
from .gazetteer import Gazetteer, GazetteerEntry
from .geo import GeoPoint
from .stindex import StIndex, build_index

SNAPSHOT_VERSION = 1


class SnapshotError(ValueError):
    pass


def _entry_dict(e: GazetteerEntry) -> dict:
    return {
        "id": e.id,
        "name": e.canonical_name,
        "alt_names": list(e.alt_names),
        "lat": e.point.lat,
        "lon": e.point.lon,
        "admin_level": e.admin_level,
        "parent": e.parent,
        "adjacent": list(e.adjacent),
        "population": e.population,
        "area_km2": e.area_km2,
    }


def save_snapshot(
    path: str | Path,
    gazetteer: Gazetteer,
    cases: Sequence[CaseSeries],
    documents: Sequence[DocumentRecords],
    zmax: int = 12,
) -> None:
    payload = {
        "v": SNAPSHOT_VERSION,
        "zmax": zmax,
        "gazetteer": [_entry_dict(e) for e in gazetteer],
        "cases": [
            {
                "location": s.location,
                "start": s.start.isoformat(),
                "confirmed": list(s.confirmed),
                "deaths": list(s.deaths),
                "recovered": list(s.recovered),
            }
            for s in cases
        ],
        "documents": [
            {
                "id": d.doc_id,
                "source_type": d.source_type,
                "title": d.title,
                "published_at": d.published_at.isoformat(),
                "keywords": list(d.keywords),
                "locations": list(d.locations),
            }
            for d in documents
        ],
    }
    raw = json.dumps(payload, separators=(",", ":"), sort_keys=True).encode("utf-8")
    with open(path, "wb") as sink:
        # fixed mtime keeps snapshot bytes reproducible across runs
        with gzip.GzipFile(fileobj=sink, mode="wb", mtime=0) as fh:
            fh.write(raw)


def load_snapshot(
    path: str | Path,
) -> tuple[Gazetteer, list[CaseSeries], list[DocumentRecords], int]:
    try:
        with gzip.open(path, "rb") as fh:
            payload = json.loads(fh.read().decode("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from None
    if payload.get("v") != SNAPSHOT_VERSION:
        raise SnapshotError(
            f"unsupported snapshot version {payload.get('v')!r} (expected {SNAPSHOT_VERSION})"
        )
    gazetteer = Gazetteer(
        GazetteerEntry(
            id=int(e["id"]),
            canonical_name=e["name"],
            alt_names=tuple(e["alt_names"]),
            point=GeoPoint(e["lat"], e["lon"]),
            admin_level=e["admin_level"],
            parent=e["parent"],
            adjacent=tuple(e["adjacent"]),
            population=int(e["population"]),
            area_km2=e["area_km2"],
        )
        for e in payload["gazetteer"]
    )
    cases = [
        CaseSeries(
            location=int(c["location"]),
            start=date.fromisoformat(c["start"]),
            confirmed=tuple(c["confirmed"]),
            deaths=tuple(c["deaths"]),
            recovered=tuple(c["recovered"]),
        )
        for c in payload["cases"]
    ]
    documents = [
        DocumentRecords(
            doc_id=d["id"],
            source_type=d["source_type"],
            title=d["title"],
            published_at=datetime.fromisoformat(d["published_at"]),
            keywords=tuple(d["keywords"]),
            locations=tuple(d["locations"]),
        )
        for d in payload["documents"]
    ]
    return gazetteer, cases, documents, int(payload["zmax"])


def load_index(path: str | Path) -> StIndex:
    """Load a snapshot and build the immutable query index from it."""
    gazetteer, cases, documents, zmax = load_snapshot(path)
    records = [r for d in documents for r in d.to_records()]
    return build_index(cases, records, gazetteer, zmax=zmax, documents=documents)
