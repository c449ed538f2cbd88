"""Command-line entry points: ingest, serve, eval, make-fixture."""

from __future__ import annotations

import sys
from datetime import date
from pathlib import Path

import click

from .cases import load_case_series
from .corpus import DEFAULT_QUERY_TERMS, parse_documents_jsonl, run_pipeline
from .gazetteer import UnknownLocationError, load_gazetteer
from .snapshot import load_index, save_snapshot
from .synthetic import generate


def _classify_case_file(path: Path) -> str:
    name = path.name.lower()
    hits = [v for v in ("confirmed", "deaths", "recovered") if v in name]
    if len(hits) != 1:
        raise click.ClickException(
            f"cannot tell which variable {path} holds; the filename must "
            "contain exactly one of: confirmed, deaths, recovered"
        )
    return hits[0]


@click.group()
def main() -> None:
    """Spatiotemporal keyword/case tracking engine."""


@main.command()
@click.option("--cases", "case_files", multiple=True, required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Wide cumulative CSV; filename names the variable.")
@click.option("--docs", required=True, type=click.Path(exists=True, path_type=Path),
              help="Documents as JSON Lines.")
@click.option("--gazetteer", "gazetteer_file", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--keywords", default=",".join(DEFAULT_QUERY_TERMS), show_default=True,
              help="Comma-separated query terms.")
@click.option("--no-filter", is_flag=True, help="Keep every news article, not just query matches.")
@click.option("--keyword-count", default=10, show_default=True)
@click.option("--zmax", default=12, show_default=True)
@click.option("--workers", default=1, show_default=True)
def ingest(case_files, docs, gazetteer_file, out, keywords, no_filter,
           keyword_count, zmax, workers) -> None:
    """Parse sources and write an index snapshot."""
    try:
        gazetteer = load_gazetteer(gazetteer_file.read_bytes())
        by_variable: dict[str, bytes] = {}
        for f in case_files:
            variable = _classify_case_file(f)
            if variable in by_variable:
                raise click.ClickException(f"duplicate {variable} file: {f}")
            by_variable[variable] = f.read_bytes()
        if "confirmed" not in by_variable:
            raise click.ClickException("a confirmed-cases file is required")
        series = load_case_series(
            gazetteer,
            by_variable["confirmed"],
            deaths=by_variable.get("deaths"),
            recovered=by_variable.get("recovered"),
        )
        documents = parse_documents_jsonl(docs.read_bytes())
        terms = tuple(t.strip().lower() for t in keywords.split(",") if t.strip())
        result = run_pipeline(
            documents,
            gazetteer,
            query_terms=terms,
            keyword_count=keyword_count,
            filter_news=not no_filter,
            workers=workers,
        )
        save_snapshot(out, gazetteer, series, result.documents, zmax=zmax)
    except click.ClickException:
        raise
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(
        f"wrote {out}: {len(gazetteer)} locations, {len(series)} case series, "
        f"{len(result.documents)} documents, {len(result.records)} records"
    )


@main.command()
@click.option("--index", "index_file", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(index_file, port, host) -> None:
    """Serve a snapshot over HTTP."""
    import uvicorn

    from .service import create_app

    try:
        app = create_app(load_index(index_file))
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command(name="eval")
@click.option("--index", "index_file", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--area", required=True, help='Location name, or "World".')
@click.option("--no-filter", is_flag=True)
@click.option("--exclude", default="", help="Comma-separated YYYY-MM-DD dates to drop.")
def evaluate(index_file, area, no_filter, exclude) -> None:
    """Print the area correlation as CSV: area,filter,coefficient,n_points."""
    from . import correlate

    try:
        idx = load_index(index_file)
        if area.strip().lower() == "world":
            area_id, label = None, "World"
        else:
            entry = idx.gazetteer.resolve(area.strip())
            area_id, label = entry.id, entry.canonical_name
        terms = None if no_filter else DEFAULT_QUERY_TERMS
        excluded = frozenset(
            date.fromisoformat(d.strip()) for d in exclude.split(",") if d.strip()
        )
        result = correlate.area_correlation(idx, area_id, terms, excluded)
    except (UnknownLocationError, correlate.CorrelationError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo("area,filter,coefficient,n_points")
    filter_label = "none" if terms is None else "+".join(terms)
    click.echo(f"{label},{filter_label},{result.coefficient:.6f},{result.n_points}")


@main.command(name="make-fixture")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=20200122, show_default=True)
def make_fixture(out_dir, seed) -> None:
    """Write the bundled synthetic fixture (gazetteer, cases, documents)."""
    fixture = generate(seed=seed)
    paths = fixture.write_to(out_dir)
    click.echo(
        f"wrote {fixture.n_documents} documents and case data for "
        f"{len(fixture.axis)} days under {out_dir}"
    )
    for name, path in paths.items():
        click.echo(f"  {name}: {path}")


if __name__ == "__main__":
    sys.exit(main())
