"""Place-name recognition and resolution against a static gazetteer.

The gazetteer is loaded once from a JSON Lines file and is immutable while
queries run (ingest may append entries for locations that only appear in
case data, which happens before an index is built). Every entry is a point
plus a containment parent and adjacency links; there is no polygon geometry.

Name lookup is case-folded and covers canonical and alternate names.
Ambiguous names ("Paris", "London") resolve to the candidate with the
largest population, ties broken by the smaller id, so resolution is a pure
function of (name, gazetteer).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .geo import GeoPoint, LocationId, haversine_distance

ADMIN_LEVELS = ("country", "state", "county", "city")

#: Longest toponym the recognizer will match, in tokens.
MAX_NAME_TOKENS = 4

_WORD = re.compile(r"[^\W_]+(?:-[^\W_]+)*", re.UNICODE)


class GazetteerError(ValueError):
    """Raised for structural problems in gazetteer data."""


class UnknownLocationError(LookupError):
    """Raised when a name or id cannot be resolved."""


@dataclass(frozen=True)
class GazetteerEntry:
    id: LocationId
    canonical_name: str
    point: GeoPoint
    admin_level: str
    alt_names: tuple[str, ...] = ()
    parent: LocationId | None = None
    adjacent: tuple[LocationId, ...] = ()
    population: int = 0
    area_km2: float | None = None

    def __post_init__(self) -> None:
        if self.admin_level not in ADMIN_LEVELS:
            raise GazetteerError(
                f"entry {self.id}: unknown admin level {self.admin_level!r}"
            )
        if self.population < 0:
            raise GazetteerError(f"entry {self.id}: negative population")
        if self.area_km2 is not None and self.area_km2 <= 0:
            raise GazetteerError(f"entry {self.id}: area_km2 must be positive")

    @property
    def names(self) -> tuple[str, ...]:
        return (self.canonical_name,) + self.alt_names


def _name_tokens(name: str) -> tuple[str, ...]:
    return tuple(m.group(0).casefold() for m in _WORD.finditer(name))


class Gazetteer:
    """An in-memory gazetteer with name, hierarchy, and proximity lookups."""

    def __init__(self, entries: Iterable[GazetteerEntry]) -> None:
        self._entries: dict[LocationId, GazetteerEntry] = {}
        for e in entries:
            if e.id in self._entries:
                raise GazetteerError(f"duplicate id {e.id} ({e.canonical_name!r})")
            self._entries[e.id] = e
        self._validate_references()
        self._symmetrize_adjacency()
        self._validate_parent_chains()
        self._build_name_index()
        self._children: dict[LocationId, list[LocationId]] = {}
        for e in self._entries.values():
            if e.parent is not None:
                self._children.setdefault(e.parent, []).append(e.id)
        for kids in self._children.values():
            kids.sort()

    # -- construction ----------------------------------------------------

    def _validate_references(self) -> None:
        for e in self._entries.values():
            if e.parent is not None and e.parent not in self._entries:
                raise GazetteerError(
                    f"entry {e.id} ({e.canonical_name!r}): dangling parent {e.parent}"
                )
            for a in e.adjacent:
                if a not in self._entries:
                    raise GazetteerError(
                        f"entry {e.id} ({e.canonical_name!r}): dangling adjacency {a}"
                    )

    def _symmetrize_adjacency(self) -> None:
        links: dict[LocationId, set[LocationId]] = {i: set() for i in self._entries}
        for e in self._entries.values():
            for a in e.adjacent:
                if a == e.id:
                    continue
                links[e.id].add(a)
                links[a].add(e.id)
        for i, e in list(self._entries.items()):
            sym = tuple(sorted(links[i]))
            if sym != e.adjacent:
                self._entries[i] = GazetteerEntry(
                    id=e.id,
                    canonical_name=e.canonical_name,
                    point=e.point,
                    admin_level=e.admin_level,
                    alt_names=e.alt_names,
                    parent=e.parent,
                    adjacent=sym,
                    population=e.population,
                    area_km2=e.area_km2,
                )

    def _validate_parent_chains(self) -> None:
        for e in self._entries.values():
            seen = {e.id}
            cur = e.parent
            while cur is not None:
                if cur in seen:
                    raise GazetteerError(
                        f"entry {e.id} ({e.canonical_name!r}): cycle in parent chain"
                    )
                seen.add(cur)
                cur = self._entries[cur].parent

    def _build_name_index(self) -> None:
        # case-folded name -> candidate ids; token tuple -> display name
        self._by_name: dict[str, list[LocationId]] = {}
        self._display: dict[tuple[str, ...], str] = {}
        for e in self._entries.values():
            for name in e.names:
                key = name.casefold()
                self._by_name.setdefault(key, [])
                if e.id not in self._by_name[key]:
                    self._by_name[key].append(e.id)
                toks = _name_tokens(name)
                if toks and len(toks) <= MAX_NAME_TOKENS:
                    self._display.setdefault(toks, name)

    # -- basic access ----------------------------------------------------

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, loc: LocationId) -> bool:
        return loc in self._entries

    def __iter__(self) -> Iterator[GazetteerEntry]:
        return iter(sorted(self._entries.values(), key=lambda e: e.id))

    def get(self, loc: LocationId) -> GazetteerEntry:
        try:
            return self._entries[loc]
        except KeyError:
            raise UnknownLocationError(f"unknown location id {loc}") from None

    def ids(self) -> list[LocationId]:
        return sorted(self._entries)

    def top_level_ids(self) -> list[LocationId]:
        return sorted(i for i, e in self._entries.items() if e.parent is None)

    # -- mutation (ingest phase only, before any index is built) ----------

    def add_entry(
        self,
        canonical_name: str,
        point: GeoPoint,
        admin_level: str,
        parent: LocationId | None = None,
        population: int = 0,
        area_km2: float | None = None,
    ) -> GazetteerEntry:
        new_id = max(self._entries, default=0) + 1
        if parent is not None and parent not in self._entries:
            raise UnknownLocationError(f"unknown parent id {parent}")
        entry = GazetteerEntry(
            id=new_id,
            canonical_name=canonical_name,
            point=point,
            admin_level=admin_level,
            parent=parent,
            population=population,
            area_km2=area_km2,
        )
        self._entries[new_id] = entry
        key = canonical_name.casefold()
        self._by_name.setdefault(key, []).append(new_id)
        toks = _name_tokens(canonical_name)
        if toks and len(toks) <= MAX_NAME_TOKENS:
            self._display.setdefault(toks, canonical_name)
        if parent is not None:
            self._children.setdefault(parent, []).append(new_id)
            self._children[parent].sort()
        return entry

    # -- name queries ------------------------------------------------------

    def candidates(self, name: str) -> list[GazetteerEntry]:
        return [self._entries[i] for i in self._by_name.get(name.casefold(), [])]

    def resolve(self, name: str) -> GazetteerEntry:
        found = self.candidates(name)
        if not found:
            raise UnknownLocationError(f"unknown location name {name!r}")
        return min(found, key=lambda e: (-e.population, e.id))

    def resolve_in_parent_named(self, name: str, parent_name: str) -> GazetteerEntry | None:
        """Resolve ``name`` restricted to candidates contained in ``parent_name``."""
        parents = {e.id for e in self.candidates(parent_name)}
        if not parents:
            return None
        scoped = [
            e for e in self.candidates(name)
            if parents & set(self.ancestor_ids(e.id))
        ]
        if not scoped:
            return None
        return min(scoped, key=lambda e: (-e.population, e.id))

    # -- hierarchy ---------------------------------------------------------

    def children_ids(self, loc: LocationId) -> list[LocationId]:
        self.get(loc)
        return list(self._children.get(loc, []))

    def descendant_ids(self, loc: LocationId) -> list[LocationId]:
        self.get(loc)
        out: list[LocationId] = []
        stack = list(self._children.get(loc, []))
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(self._children.get(cur, []))
        return sorted(out)

    def ancestor_ids(self, loc: LocationId) -> list[LocationId]:
        cur = self.get(loc).parent
        out: list[LocationId] = []
        while cur is not None:
            out.append(cur)
            cur = self._entries[cur].parent
        return out

    def closure_ids(self, loc: LocationId) -> list[LocationId]:
        """The location plus everything contained in it."""
        return sorted([loc] + self.descendant_ids(loc))

    # -- proximity -----------------------------------------------------------

    def nearest_entry(self, p: GeoPoint, max_km: float | None = None) -> GazetteerEntry | None:
        best: GazetteerEntry | None = None
        best_key: tuple[float, int] | None = None
        for e in self._entries.values():
            key = (haversine_distance(p, e.point), e.id)
            if best_key is None or key < best_key:
                best, best_key = e, key
        if best is None:
            return None
        if max_km is not None and best_key[0] > max_km:
            return None
        return best


def load_gazetteer(data: bytes | str | IO[str]) -> Gazetteer:
    """Load a gazetteer from JSON Lines.

    Each line holds one entry: id, name, alt_names, lat, lon, admin_level,
    parent, adjacent, population, area_km2. Blank lines are skipped.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    elif isinstance(data, str):
        text = data
    else:
        text = data.read()
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise GazetteerError(f"line {lineno}: invalid JSON: {exc}") from None
        try:
            entries.append(
                GazetteerEntry(
                    id=int(raw["id"]),
                    canonical_name=str(raw["name"]),
                    alt_names=tuple(raw.get("alt_names") or ()),
                    point=GeoPoint(float(raw["lat"]), float(raw["lon"])),
                    admin_level=str(raw["admin_level"]),
                    parent=None if raw.get("parent") is None else int(raw["parent"]),
                    adjacent=tuple(int(a) for a in raw.get("adjacent") or ()),
                    population=int(raw.get("population") or 0),
                    area_km2=None if raw.get("area_km2") in (None, 0) else float(raw["area_km2"]),
                )
            )
        except KeyError as exc:
            raise GazetteerError(f"line {lineno}: missing field {exc}") from None
    return Gazetteer(entries)


def recognize_toponyms(text: str, g: Gazetteer) -> list[tuple[str, int]]:
    """Find gazetteer names in ``text``, longest match first, left to right.

    Returns (matched name, character offset) pairs. Overlapping shorter
    matches are suppressed: once "New York City" matches, the scan resumes
    after it, so "New York" is not also reported for the same words.
    """
    words = [(m.group(0).casefold(), m.start()) for m in _WORD.finditer(text)]
    out: list[tuple[str, int]] = []
    i = 0
    n = len(words)
    while i < n:
        hit = None
        for length in range(min(MAX_NAME_TOKENS, n - i), 0, -1):
            toks = tuple(w for w, _ in words[i : i + length])
            name = g._display.get(toks)
            if name is not None:
                hit = (name, words[i][1], length)
                break
        if hit is not None:
            out.append((hit[0], hit[1]))
            i += hit[2]
        else:
            i += 1
    return out


def resolve_toponym(name: str, g: Gazetteer) -> LocationId:
    """Resolve an ambiguous name to a single location id.

    The candidate with the largest population wins; ties go to the smaller
    id so resolution is deterministic.
    """
    return g.resolve(name).id


def spatial_synonyms(loc: LocationId, g: Gazetteer) -> list[LocationId]:
    """Locations acceptable as answers for ``loc``: everything it contains,
    everything containing it, and its direct neighbors."""
    entry = g.get(loc)
    out = set(g.descendant_ids(loc))
    out.update(g.ancestor_ids(loc))
    out.update(entry.adjacent)
    out.discard(loc)
    return sorted(out)
