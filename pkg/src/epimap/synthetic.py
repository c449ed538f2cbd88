"""Deterministic synthetic fixture: four regions, sixty days, ~500 documents.

Region A's article volume is planted to track its daily new confirmed cases;
region B's articles are independent noise. The generator knows exactly how
many keyword records every document contributes (documents are built from a
controlled vocabulary with a single toponym each), so it can state the
per-day record series it planted and the correlation coefficients those
series imply, via its own direct-formula Pearson, kept separate from the
engine's implementation on purpose.

Four dates are planted as collection outages: no documents exist on those
days although cases keep accruing. They mimic known-bad gap dates that an
evaluation excludes from both series.

Everything derives from one seeded RNG, so the fixture is byte-stable.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

AXIS_START = date(2020, 1, 22)
N_DAYS = 60

#: Day offsets with a planted collection outage (zero articles everywhere).
GAP_OFFSETS = (20, 21, 35, 48)

REGION_A = 1  # coupled articles
REGION_B = 2  # independent articles

_FILLERS = (
    "outbreak", "hospital", "quarantine", "officials", "residents",
    "lockdown", "testing", "vaccine", "travel", "economy",
    "schools", "masks", "clinic", "patients", "market",
    "response", "emergency", "curfew", "supplies", "doctors",
)

_GAZETTEER_ROWS = [
    {"id": 1, "name": "Arbenia", "alt_names": [], "lat": 10.0, "lon": 10.0,
     "admin_level": "country", "parent": None, "adjacent": [], "population": 5_000_000,
     "area_km2": 250_000.0},
    {"id": 11, "name": "Avim", "alt_names": [], "lat": 10.5, "lon": 10.3,
     "admin_level": "city", "parent": 1, "adjacent": [12], "population": 800_000,
     "area_km2": 500.0},
    {"id": 12, "name": "Ostrel", "alt_names": [], "lat": 9.4, "lon": 11.1,
     "admin_level": "city", "parent": 1, "adjacent": [], "population": 300_000,
     "area_km2": 300.0},
    {"id": 2, "name": "Borlund", "alt_names": [], "lat": -20.0, "lon": 60.0,
     "admin_level": "country", "parent": None, "adjacent": [], "population": 8_000_000,
     "area_km2": 400_000.0},
    {"id": 21, "name": "Brel", "alt_names": [], "lat": -20.4, "lon": 59.5,
     "admin_level": "city", "parent": 2, "adjacent": [22], "population": 1_200_000,
     "area_km2": 700.0},
    {"id": 22, "name": "Vosk", "alt_names": [], "lat": -19.2, "lon": 61.0,
     "admin_level": "city", "parent": 2, "adjacent": [], "population": 400_000,
     "area_km2": 350.0},
    {"id": 3, "name": "Cordis", "alt_names": [], "lat": 45.0, "lon": -100.0,
     "admin_level": "country", "parent": None, "adjacent": [], "population": 12_000_000,
     "area_km2": 900_000.0},
    {"id": 31, "name": "Calder", "alt_names": [], "lat": 46.0, "lon": -101.0,
     "admin_level": "state", "parent": 3, "adjacent": [32], "population": 2_000_000,
     "area_km2": 120_000.0},
    {"id": 32, "name": "Mirelle", "alt_names": [], "lat": 44.0, "lon": -99.0,
     "admin_level": "state", "parent": 3, "adjacent": [], "population": 3_000_000,
     "area_km2": 150_000.0},
    {"id": 4, "name": "Dantre", "alt_names": [], "lat": -35.0, "lon": -60.0,
     "admin_level": "country", "parent": None, "adjacent": [], "population": 3_000_000,
     "area_km2": 200_000.0},
]


def _pearson_direct(x: list[float], y: list[float]) -> float:
    # naive two-pass formula; intentionally not the engine's implementation
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def _logistic_daily(rng: random.Random, peak: float, midpoint: int, width: float,
                    base: int, jitter: int) -> list[int]:
    out = []
    for t in range(N_DAYS):
        level = base + peak / (1.0 + math.exp(-(t - midpoint) / width))
        out.append(max(0, round(level) + rng.randint(-jitter, jitter)))
    return out


def _cumulate(daily: list[int]) -> list[int]:
    out, total = [], 0
    for v in daily:
        total += v
        out.append(total)
    return out


@dataclass(frozen=True)
class SyntheticFixture:
    gazetteer_jsonl: str
    confirmed_csv: str
    deaths_csv: str
    recovered_csv: str
    documents_jsonl: str
    axis: tuple[date, ...]
    gap_dates: tuple[date, ...]
    #: per-day planted news record counts, keyed by (region id, filtered?)
    record_series: dict[tuple[int, bool], tuple[int, ...]]
    #: per-day daily new confirmed for the region closures
    case_daily: dict[int, tuple[int, ...]]
    #: planted coefficients, keyed by (region id, filtered?, form, excluded?)
    expected_r: dict[tuple[int, bool, str, bool], float]
    n_documents: int

    def write_to(self, out_dir: str | Path) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "gazetteer": out / "gazetteer.jsonl",
            "confirmed": out / "confirmed.csv",
            "deaths": out / "deaths.csv",
            "recovered": out / "recovered.csv",
            "documents": out / "documents.jsonl",
        }
        paths["gazetteer"].write_text(self.gazetteer_jsonl, encoding="utf-8")
        paths["confirmed"].write_text(self.confirmed_csv, encoding="utf-8")
        paths["deaths"].write_text(self.deaths_csv, encoding="utf-8")
        paths["recovered"].write_text(self.recovered_csv, encoding="utf-8")
        paths["documents"].write_text(self.documents_jsonl, encoding="utf-8")
        return paths


def _case_csv(header_dates: list[date], rows: list[tuple[str, str, float, float, list[int]]]) -> str:
    cols = ",".join(d.strftime("%-m/%-d/%y") for d in header_dates)
    lines = [f"Province/State,Country/Region,Lat,Long,{cols}"]
    for province, country, lat, lon, values in rows:
        lines.append(f"{province},{country},{lat},{lon}," + ",".join(str(v) for v in values))
    return "\n".join(lines) + "\n"


def generate(seed: int = 20200122) -> SyntheticFixture:
    rng = random.Random(seed)
    axis = tuple(AXIS_START + timedelta(days=i) for i in range(N_DAYS))
    gap_days = set(GAP_OFFSETS)
    gap_dates = tuple(axis[i] for i in sorted(gap_days))

    # -- case curves -------------------------------------------------------
    daily_a = _logistic_daily(rng, peak=220, midpoint=30, width=6.0, base=4, jitter=8)
    daily_b = _logistic_daily(rng, peak=150, midpoint=38, width=5.0, base=2, jitter=6)
    daily_calder = _logistic_daily(rng, peak=60, midpoint=33, width=7.0, base=1, jitter=3)
    daily_mirelle = _logistic_daily(rng, peak=90, midpoint=36, width=6.0, base=1, jitter=4)
    daily_d = [0] * 40 + [rng.randint(0, 3) for _ in range(N_DAYS - 40)]

    cum = {
        "Arbenia": _cumulate(daily_a),
        "Borlund": _cumulate(daily_b),
        "Calder": _cumulate(daily_calder),
        "Mirelle": _cumulate(daily_mirelle),
        "Dantre": _cumulate(daily_d),
    }
    deaths = {k: [int(0.05 * v) for v in vs] for k, vs in cum.items()}
    recovered = {k: [int(0.30 * v) for v in vs] for k, vs in cum.items()}

    def rows_for(table: dict[str, list[int]]) -> list[tuple[str, str, float, float, list[int]]]:
        return [
            ("", "Arbenia", 10.0, 10.0, table["Arbenia"]),
            ("", "Borlund", -20.0, 60.0, table["Borlund"]),
            ("Calder", "Cordis", 46.0, -101.0, table["Calder"]),
            ("Mirelle", "Cordis", 44.0, -99.0, table["Mirelle"]),
            ("", "Dantre", -35.0, -60.0, table["Dantre"]),
        ]

    confirmed_csv = _case_csv(list(axis), rows_for(cum))
    deaths_csv = _case_csv(list(axis), rows_for(deaths))
    recovered_csv = _case_csv(list(axis), rows_for(recovered))

    # -- document plan -------------------------------------------------------
    # Volume per day and region; outage days produce nothing anywhere.
    def article_counts(day: int, coupled_daily: list[int] | None, rate: float,
                       noise_sd: float, floor_: int = 0) -> int:
        if day in gap_days:
            return 0
        base = rate * coupled_daily[day] if coupled_daily is not None else rate
        return max(floor_, round(base + rng.gauss(0, noise_sd)))

    toponyms = {
        REGION_A: ("Arbenia", "Avim", "Ostrel"),
        REGION_B: ("Borlund", "Brel", "Vosk"),
        3: ("Cordis", "Calder", "Mirelle"),
        4: ("Dantre",),
    }

    documents: list[dict] = []
    # planted per-day news record counts per region closure
    rec_filtered = {REGION_A: [0] * N_DAYS, REGION_B: [0] * N_DAYS, 3: [0] * N_DAYS, 4: [0] * N_DAYS}
    rec_all = {REGION_A: [0] * N_DAYS, REGION_B: [0] * N_DAYS, 3: [0] * N_DAYS, 4: [0] * N_DAYS}
    serial = 0

    def emit_news(day: int, region: int, with_term: bool) -> None:
        nonlocal serial
        serial += 1
        fillers = rng.sample(_FILLERS, 5)
        toponym = rng.choice(toponyms[region])
        words = list(fillers)
        if with_term:
            words.insert(rng.randrange(len(words) + 1), "coronavirus")
        body = f"The {words[0]} and {words[1]} of {words[2]} in {toponym} as {' '.join(words[3:])}"
        hour = rng.randint(6, 21)
        documents.append({
            "id": f"news-{serial:04d}",
            "source_type": "news",
            "title": "",
            "body": body,
            "published_at": f"{axis[day].isoformat()}T{hour:02d}:00:00Z",
        })
        n_keywords = len(fillers) + 1 + (1 if with_term else 0)  # fillers + toponym + term
        rec_all[region][day] += n_keywords
        if with_term:
            rec_filtered[region][day] += n_keywords

    for day in range(N_DAYS):
        for _ in range(article_counts(day, daily_a, 0.035, 1.0)):
            emit_news(day, REGION_A, with_term=True)
        for _ in range(article_counts(day, None, 0.9, 0.9)):
            emit_news(day, REGION_A, with_term=False)
        for _ in range(article_counts(day, None, 2.0, 1.4)):
            emit_news(day, REGION_B, with_term=True)
        for _ in range(article_counts(day, None, 0.7, 0.7)):
            emit_news(day, REGION_B, with_term=False)
        total_c = daily_calder[day] + daily_mirelle[day]
        for _ in range(article_counts(day, [total_c] * N_DAYS, 0.03, 0.8)):
            emit_news(day, 3, with_term=True)
        if day not in gap_days and rng.random() < 0.3:
            emit_news(day, 4, with_term=rng.random() < 0.5)

    # A handful of geotagged tweets near the cities (plus ones that must drop).
    tweet_spots = ((10.52, 10.31), (10.48, 10.28), (-20.42, 59.52), (-19.18, 61.02))
    for t in range(30):
        serial += 1
        day = rng.randrange(N_DAYS)
        while day in gap_days:
            day = rng.randrange(N_DAYS)
        lat, lon = rng.choice(tweet_spots)
        documents.append({
            "id": f"tweet-{serial:04d}",
            "source_type": "tweet",
            "title": "",
            "body": rng.choice([
                "coronavirus is spreading around here",
                "another coronavirus case reported nearby",
                "staying home because of coronavirus",
            ]),
            "published_at": f"{axis[day].isoformat()}T{rng.randint(0, 23):02d}:30:00Z",
            "geotag": {"lat": lat, "lon": lon},
        })
    documents.append({
        "id": "tweet-no-geotag",
        "source_type": "tweet",
        "title": "",
        "body": "coronavirus everywhere but no location attached",
        "published_at": f"{axis[5].isoformat()}T10:00:00Z",
    })
    documents.append({
        "id": "tweet-off-topic",
        "source_type": "tweet",
        "title": "",
        "body": "lovely weather around the harbor today",
        "published_at": f"{axis[6].isoformat()}T11:00:00Z",
        "geotag": {"lat": 10.51, "lon": 10.29},
    })

    # -- planted coefficients -------------------------------------------------
    case_daily = {REGION_A: tuple(daily_a), REGION_B: tuple(daily_b)}
    expected: dict[tuple[int, bool, str, bool], float] = {}
    for region in (REGION_A, REGION_B):
        for filtered in (True, False):
            x_daily = [float(v) for v in (rec_filtered if filtered else rec_all)[region]]
            y_daily = [float(v) for v in case_daily[region]]
            x_cum, y_cum = [], []
            tx = ty = 0.0
            for a, b in zip(x_daily, y_daily):
                tx += a
                ty += b
                x_cum.append(tx)
                y_cum.append(ty)
            for form, xs, ys in (("daily", x_daily, y_daily), ("cumulative", x_cum, y_cum)):
                for excluded in (False, True):
                    keep = [
                        i for i in range(N_DAYS)
                        if not (excluded and i in gap_days)
                    ]
                    expected[(region, filtered, form, excluded)] = _pearson_direct(
                        [xs[i] for i in keep], [ys[i] for i in keep]
                    )

    return SyntheticFixture(
        gazetteer_jsonl="\n".join(json.dumps(r) for r in _GAZETTEER_ROWS) + "\n",
        confirmed_csv=confirmed_csv,
        deaths_csv=deaths_csv,
        recovered_csv=recovered_csv,
        documents_jsonl="\n".join(json.dumps(d) for d in documents) + "\n",
        axis=axis,
        gap_dates=gap_dates,
        record_series={
            (r, True): tuple(rec_filtered[r]) for r in rec_filtered
        } | {
            (r, False): tuple(rec_all[r]) for r in rec_all
        },
        case_daily=case_daily,
        expected_r=expected,
        n_documents=len(documents),
    )
