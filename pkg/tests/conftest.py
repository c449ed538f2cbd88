"""Shared fixtures: the synthetic corpus built once per session."""

from __future__ import annotations

from dataclasses import dataclass

import pytest

from epimap.cases import CaseSeries, load_case_series
from epimap.corpus import DEFAULT_QUERY_TERMS, PipelineResult, parse_documents_jsonl, run_pipeline
from epimap.gazetteer import Gazetteer, load_gazetteer
from epimap.stindex import StIndex, build_index
from epimap.synthetic import SyntheticFixture, generate

BOROUGHS_JSONL = "\n".join([
    '{"id": 1, "name": "New York City", "alt_names": ["NYC"], "lat": 40.7128, "lon": -74.006, "admin_level": "city", "parent": null, "adjacent": [], "population": 8800000, "area_km2": 783.8}',
    '{"id": 2, "name": "Manhattan", "alt_names": [], "lat": 40.7831, "lon": -73.9712, "admin_level": "county", "parent": 1, "adjacent": [3], "population": 1630000, "area_km2": 59.1}',
    '{"id": 3, "name": "Brooklyn", "alt_names": [], "lat": 40.6782, "lon": -73.9442, "admin_level": "county", "parent": 1, "adjacent": [], "population": 2580000, "area_km2": 183.4}',
    '{"id": 4, "name": "Harlem", "alt_names": [], "lat": 40.8116, "lon": -73.9465, "admin_level": "city", "parent": 2, "adjacent": [], "population": 116000, "area_km2": 3.9}',
])


@dataclass(frozen=True)
class BuiltFixture:
    data: SyntheticFixture
    gazetteer: Gazetteer
    cases: list[CaseSeries]
    filtered: PipelineResult
    unfiltered: PipelineResult
    index: StIndex  # filtered corpus
    index_unfiltered: StIndex


@pytest.fixture(scope="session")
def fixture_data() -> SyntheticFixture:
    return generate()


@pytest.fixture(scope="session")
def built(fixture_data: SyntheticFixture) -> BuiltFixture:
    g = load_gazetteer(fixture_data.gazetteer_jsonl)
    cases = load_case_series(
        g,
        fixture_data.confirmed_csv,
        deaths=fixture_data.deaths_csv,
        recovered=fixture_data.recovered_csv,
    )
    docs = parse_documents_jsonl(fixture_data.documents_jsonl)
    filtered = run_pipeline(docs, g, query_terms=DEFAULT_QUERY_TERMS, filter_news=True)
    unfiltered = run_pipeline(docs, g, query_terms=DEFAULT_QUERY_TERMS, filter_news=False)
    index = build_index(cases, filtered.records, g, zmax=8, documents=filtered.documents)
    index_unfiltered = build_index(
        cases, unfiltered.records, g, zmax=8, documents=unfiltered.documents
    )
    return BuiltFixture(
        data=fixture_data,
        gazetteer=g,
        cases=cases,
        filtered=filtered,
        unfiltered=unfiltered,
        index=index,
        index_unfiltered=index_unfiltered,
    )


@pytest.fixture()
def boroughs() -> Gazetteer:
    return load_gazetteer(BOROUGHS_JSONL)
