"""Document ingestion: keyword extraction and the keyword x toponym cross product.

News articles go through TF-IDF keyword extraction, an exact-token query
filter, and toponym recognition; the cross product of keywords and resolved
locations becomes the geocoded keyword records that drive the document-count
layers. Tweets are handled differently: they are too short for corpus
statistics, so a query term only has to appear as a substring of the text,
and the location comes from the tweet's explicit geotag (snapped to the
nearest gazetteer entry).

The pipeline runs in two phases: a corpus-wide statistics pass (document
frequencies) and an embarrassingly parallel per-document pass. Results are
deterministic regardless of the worker count.
"""

from __future__ import annotations

import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from importlib import resources
from typing import IO, Iterable, Sequence

from .gazetteer import Gazetteer, recognize_toponyms, resolve_toponym
from .geo import GeoPoint, LocationId, as_utc

#: Query synonyms applied when no explicit terms are given.
DEFAULT_QUERY_TERMS = ("coronavirus", "covid-19")

#: Keywords kept per article.
DEFAULT_KEYWORD_COUNT = 10

#: Tweets geotagged farther than this from every gazetteer entry are dropped.
TWEET_SNAP_KM = 100.0

_TOKEN = re.compile(r"[^\W_]+(?:-[^\W_]+)*", re.UNICODE)


def _load_stopwords() -> frozenset[str]:
    text = resources.files("epimap.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(
        w for w in (line.strip() for line in text.splitlines())
        if w and not w.startswith("#")
    )


STOPWORDS = _load_stopwords()


class DocumentError(ValueError):
    """Raised for malformed document input."""


@dataclass(frozen=True)
class Document:
    id: str
    source_type: str  # "news" | "tweet"
    title: str
    body: str
    published_at: datetime
    geotag: GeoPoint | None = None

    def __post_init__(self) -> None:
        if self.source_type not in ("news", "tweet"):
            raise DocumentError(f"document {self.id}: bad source_type {self.source_type!r}")
        if self.source_type == "news" and not self.body:
            raise DocumentError(f"document {self.id}: news body must be non-empty")
        object.__setattr__(self, "published_at", as_utc(self.published_at))

    @property
    def text(self) -> str:
        return f"{self.title} {self.body}" if self.title else self.body


@dataclass(frozen=True)
class KeywordScore:
    term: str
    tf_idf: float


@dataclass(frozen=True)
class GeocodedKeyword:
    """One (keyword, location) pair stamped with its document's publication time."""

    keyword: str
    location: LocationId
    timestamp: datetime
    source_type: str


def tokenize(text: str) -> list[str]:
    """Lowercased tokens: alphanumeric runs, hyphenated compounds kept whole.

    Tokens shorter than two characters and stopwords are dropped.
    """
    return [
        t for t in _TOKEN.findall(text.lower())
        if len(t) >= 2 and t not in STOPWORDS
    ]


def _doc_frequencies(token_lists: Sequence[list[str]]) -> dict[str, int]:
    df: dict[str, int] = {}
    for tokens in token_lists:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    return df


def _score_document(tokens: list[str], df: dict[str, int], n_docs: int) -> list[KeywordScore]:
    if not tokens:
        return []
    counts: dict[str, int] = {}
    for t in tokens:
        counts[t] = counts.get(t, 0) + 1
    total = len(tokens)
    scores = [
        KeywordScore(term, (c / total) * (math.log((n_docs + 1) / (df[term] + 1)) + 1.0))
        for term, c in counts.items()
    ]
    scores.sort(key=lambda s: (-s.tf_idf, s.term))
    return scores


def compute_tf_idf(corpus: Sequence[Document]) -> list[list[KeywordScore]]:
    """Score every document's terms against the whole corpus.

    tf is the term's share of the document's tokens; idf is smoothed as
    ln((N+1)/(df+1)) + 1 so a term present everywhere still scores 1.0 and
    nothing divides by zero. Per-document output is sorted by descending
    score, ties broken lexicographically.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    token_lists = [tokenize(doc.text) for doc in corpus]
    df = _doc_frequencies(token_lists)
    n = len(corpus)
    return [_score_document(tokens, df, n) for tokens in token_lists]


def extract_keywords(scores: Sequence[KeywordScore], k: int) -> list[str]:
    """The top-k scored terms (all of them when the document has fewer)."""
    if k <= 0:
        raise ValueError(f"keyword count must be positive, got {k}")
    return [s.term for s in scores[:k]]


def keyword_filter(keywords: Iterable[str], query_terms: Sequence[str]) -> bool:
    """True iff any query term matches an extracted keyword exactly.

    Exact token equality, no stemming: "coronaviruses" does not satisfy a
    "coronavirus" query.
    """
    if not query_terms:
        raise ValueError("query_terms must be non-empty")
    kw = set(keywords)
    return any(q in kw for q in query_terms)


def geocode_and_cross(
    doc: Document, keywords: Sequence[str], toponyms: Sequence[LocationId]
) -> list[GeocodedKeyword]:
    """Cross every keyword with every location, keyword-major, in input order."""
    return [
        GeocodedKeyword(k, loc, doc.published_at, doc.source_type)
        for k in keywords
        for loc in toponyms
    ]


def ingest_tweet(
    doc: Document,
    query_terms: Sequence[str],
    gazetteer: Gazetteer,
    max_snap_km: float = TWEET_SNAP_KM,
) -> list[GeocodedKeyword]:
    """Turn one geotagged tweet into records, or nothing.

    A tweet counts only if it carries a geotag and some query term occurs as
    a substring of its lowercased text; each matching term yields one record
    at the gazetteer entry nearest the geotag (within ``max_snap_km``).
    """
    if doc.source_type != "tweet":
        raise DocumentError(f"document {doc.id}: not a tweet")
    if doc.geotag is None:
        return []
    text = doc.text.lower()
    matched = [q.lower() for q in query_terms if q.lower() in text]
    if not matched:
        return []
    entry = gazetteer.nearest_entry(doc.geotag, max_km=max_snap_km)
    if entry is None:
        return []
    return [GeocodedKeyword(q, entry.id, doc.published_at, "tweet") for q in matched]


# -- whole-corpus pipeline ----------------------------------------------------


@dataclass(frozen=True)
class DocumentRecords:
    """A document's contribution to the record stream.

    ``keywords`` x ``locations`` is exactly the set of records the document
    produced; keeping the factors (not just the product) lets downstream
    consumers re-filter by keyword without reprocessing text.
    """

    doc_id: str
    source_type: str
    title: str
    published_at: datetime
    keywords: tuple[str, ...]
    locations: tuple[LocationId, ...]

    def to_records(self) -> list[GeocodedKeyword]:
        return [
            GeocodedKeyword(k, loc, self.published_at, self.source_type)
            for k in self.keywords
            for loc in self.locations
        ]


@dataclass(frozen=True)
class PipelineResult:
    documents: tuple[DocumentRecords, ...]

    @property
    def records(self) -> list[GeocodedKeyword]:
        return [r for d in self.documents for r in d.to_records()]


def run_pipeline(
    docs: Sequence[Document],
    gazetteer: Gazetteer,
    query_terms: Sequence[str] = DEFAULT_QUERY_TERMS,
    keyword_count: int = DEFAULT_KEYWORD_COUNT,
    filter_news: bool = True,
    workers: int = 1,
) -> PipelineResult:
    """Process a corpus into geocoded keyword records.

    Phase one computes document frequencies over the news portion; phase two
    handles each document independently (parallel across ``workers``). With
    ``filter_news=False`` every news article contributes records regardless
    of the query terms; tweets always require a query term match.
    """
    news = [d for d in docs if d.source_type == "news"]
    token_lists = [tokenize(d.text) for d in news]
    df = _doc_frequencies(token_lists)
    n_news = len(news)
    news_tokens = dict(zip(news, token_lists))

    def process(doc: Document) -> DocumentRecords | None:
        if doc.source_type == "tweet":
            recs = ingest_tweet(doc, query_terms, gazetteer)
            if not recs:
                return None
            return DocumentRecords(
                doc_id=doc.id,
                source_type="tweet",
                title=doc.title,
                published_at=doc.published_at,
                keywords=tuple(r.keyword for r in recs),
                locations=(recs[0].location,),
            )
        scores = _score_document(news_tokens[doc], df, n_news)
        keywords = extract_keywords(scores, keyword_count)
        if filter_news and not (keywords and keyword_filter(keywords, query_terms)):
            return None
        names = recognize_toponyms(doc.text, gazetteer)
        locations: list[LocationId] = []
        for name, _pos in names:
            loc = resolve_toponym(name, gazetteer)
            if loc not in locations:
                locations.append(loc)
        if not keywords or not locations:
            return None
        return DocumentRecords(
            doc_id=doc.id,
            source_type="news",
            title=doc.title,
            published_at=doc.published_at,
            keywords=tuple(keywords),
            locations=tuple(locations),
        )

    if workers <= 1:
        processed = [process(d) for d in docs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            processed = list(pool.map(process, docs))
    return PipelineResult(documents=tuple(p for p in processed if p is not None))


def parse_documents_jsonl(data: bytes | str | IO[str]) -> list[Document]:
    """Read documents from JSON Lines (id, source_type, title, body,
    published_at, optional geotag)."""
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    elif isinstance(data, str):
        text = data
    else:
        text = data.read()
    docs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"line {lineno}: invalid JSON: {exc}") from None
        try:
            geotag = raw.get("geotag")
            docs.append(
                Document(
                    id=str(raw["id"]),
                    source_type=str(raw["source_type"]),
                    title=str(raw.get("title") or ""),
                    body=str(raw.get("body") or ""),
                    published_at=datetime.fromisoformat(
                        str(raw["published_at"]).replace("Z", "+00:00")
                    ),
                    geotag=None if geotag is None else GeoPoint(
                        float(geotag["lat"]), float(geotag["lon"])
                    ),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DocumentError(f"line {lineno}: {exc}") from None
    return docs
