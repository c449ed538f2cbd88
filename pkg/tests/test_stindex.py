import math
import random
from datetime import date, datetime, timedelta, timezone

import pytest

from epimap.cases import CaseSeries
from epimap.corpus import GeocodedKeyword
from epimap.gazetteer import Gazetteer, GazetteerEntry
from epimap.geo import BoundingBox, GeoPoint, TimeWindow, VariableKind
from epimap.stindex import (
    FrameSpec,
    IndexBuildError,
    LocationValue,
    NoDataError,
    RollingAverage,
    aggregate_window,
    build_index,
    cluster_markers,
    frames,
    pick_nearest_nonzero,
    query_viewport,
)

UTC = timezone.utc
D0 = date(2020, 1, 1)


def dt(day_offset: int, hour: int = 0) -> datetime:
    return datetime(2020, 1, 1, hour, tzinfo=UTC) + timedelta(days=day_offset)


def make_gazetteer(points: dict[int, tuple[float, float]]) -> Gazetteer:
    return Gazetteer(
        GazetteerEntry(
            id=i, canonical_name=f"loc{i}", point=GeoPoint(lat, lon), admin_level="city"
        )
        for i, (lat, lon) in points.items()
    )


def records_at(loc: int, day: int, n: int, source="news") -> list[GeocodedKeyword]:
    return [GeocodedKeyword("coronavirus", loc, dt(day, 9), source) for _ in range(n)]


class TestBuild:
    def test_record_counting(self):
        g = make_gazetteer({1: (0, 0)})
        idx = build_index([], records_at(1, 2, 2), g, zmax=4)
        assert idx.daily(VariableKind.NEWS_COUNT)[0].tolist() == [2]
        assert idx.axis_start == date(2020, 1, 3)

    def test_empty_inputs(self):
        g = make_gazetteer({1: (0, 0)})
        idx = build_index([], [], g, zmax=4)
        assert idx.n_days == 0
        w = TimeWindow(dt(0), dt(10))
        assert query_viewport(idx, BoundingBox(-90, -180, 90, 180), w,
                              VariableKind.NEWS_COUNT) == []

    def test_unknown_location_rejected(self):
        g = make_gazetteer({1: (0, 0)})
        with pytest.raises(IndexBuildError):
            build_index([], records_at(99, 0, 1), g, zmax=4)

    def test_each_location_in_exactly_one_cell_per_zoom(self):
        rng = random.Random(7)
        pts = {i: (rng.uniform(-90, 90), rng.uniform(-180, 180)) for i in range(1, 1001)}
        g = make_gazetteer(pts)
        idx = build_index([], [], g, zmax=6)
        for z in range(7):
            cells = idx.zoom_cells[z]
            assert cells.shape == (1000,)
            ncells = 1 << z
            # brute-force recomputation of each location's cell
            for row, i in enumerate(sorted(pts)):
                lat, lon = pts[i]
                col = min(int((lon + 180) // (360 / ncells)), ncells - 1)
                r = min(int((lat + 90) // (180 / ncells)), ncells - 1)
                assert cells[row] == r * ncells + col

    def test_disease_variables_from_cases(self):
        g = make_gazetteer({1: (0, 0)})
        s = CaseSeries(location=1, start=D0, confirmed=(10, 15, 15),
                       deaths=(1, 2, 3), recovered=(0, 5, 6))
        idx = build_index([s], [], g, zmax=4)
        assert idx.daily(VariableKind.CONFIRMED)[0].tolist() == [10, 5, 0]
        # active level: 9, 8, 6 -> first differences
        assert idx.daily(VariableKind.ACTIVE)[0].tolist() == [9, -1, -2]
        w = TimeWindow(dt(0), dt(3))
        assert aggregate_window(idx, 1, VariableKind.ACTIVE, w, "cumulative") == 6


class TestAggregate:
    def index(self):
        g = make_gazetteer({1: (0, 0)})
        s = CaseSeries(location=1, start=D0, confirmed=(0, 3, 5, 9),
                       deaths=(0, 0, 0, 0), recovered=(0, 0, 0, 0))
        return build_index([s], [], g, zmax=4)

    def test_instant_telescopes(self):
        idx = self.index()
        w = TimeWindow(dt(1), dt(4))
        assert aggregate_window(idx, 1, VariableKind.CONFIRMED, w, "instant") == 9

    def test_cumulative_at_window_end(self):
        idx = self.index()
        w = TimeWindow(dt(0), dt(4))
        assert aggregate_window(idx, 1, VariableKind.CONFIRMED, w, "cumulative") == 9

    def test_rolling_constant(self):
        g = make_gazetteer({1: (0, 0)})
        s = CaseSeries(location=1, start=D0,
                       confirmed=tuple(4 * (i + 1) for i in range(14)),
                       deaths=(0,) * 14, recovered=(0,) * 14)
        idx = build_index([s], [], g, zmax=4)
        w = TimeWindow(dt(7), dt(14))
        got = aggregate_window(idx, 1, VariableKind.CONFIRMED, w, RollingAverage(7))
        assert got == 4.0

    def test_window_clipped_outside_axis(self):
        idx = self.index()
        w = TimeWindow(dt(30), dt(40))
        assert aggregate_window(idx, 1, VariableKind.CONFIRMED, w, "instant") == 0
        assert aggregate_window(idx, 1, VariableKind.CONFIRMED, w, "cumulative") == 9

    def test_unknown_location(self):
        with pytest.raises(LookupError):
            aggregate_window(self.index(), 42, VariableKind.CONFIRMED,
                             TimeWindow(dt(0), dt(1)), "instant")

    def test_hourly_window_repeats_containing_day(self):
        idx = self.index()
        w = TimeWindow(dt(1, 9), dt(1, 10))
        assert aggregate_window(idx, 1, VariableKind.CONFIRMED, w, "instant") == 3

    def test_prefix_equals_naive_daily_summation(self):
        idx = self.index()
        daily = idx.daily(VariableKind.CONFIRMED)[0].tolist()
        for s in range(4):
            for e in range(s + 1, 5):
                w = TimeWindow(dt(s), dt(e))
                got = aggregate_window(idx, 1, VariableKind.CONFIRMED, w, "instant")
                assert got == sum(daily[s:e])


class TestViewport:
    def country_fixture(self):
        # three co-located polities: one large, two enclaves inside its box
        g = make_gazetteer({
            1: (42.5, 12.5),   # Italy
            2: (43.94, 12.45),  # San Marino
            3: (41.9, 12.45),   # Holy See
            4: (48.0, 2.0),     # outside the box
        })
        recs = (records_at(1, 0, 3) + records_at(2, 0, 1) + records_at(3, 0, 2)
                + records_at(4, 0, 5))
        return g, build_index([], recs, g, zmax=6)

    def test_overlapping_enclaves_reported(self):
        g, idx = self.country_fixture()
        box = BoundingBox(36.0, 6.0, 47.0, 19.0)
        got = query_viewport(idx, box, TimeWindow(dt(0), dt(1)), VariableKind.NEWS_COUNT)
        assert [lv.location for lv in got] == [1, 2, 3]

    def test_ocean_empty(self):
        _, idx = self.country_fixture()
        box = BoundingBox(-40, -40, -30, -30)
        assert query_viewport(idx, box, TimeWindow(dt(0), dt(1)),
                              VariableKind.NEWS_COUNT) == []

    def test_degenerate_box_single_point(self):
        _, idx = self.country_fixture()
        box = BoundingBox(43.94, 12.45, 43.94, 12.45)
        got = query_viewport(idx, box, TimeWindow(dt(0), dt(1)), VariableKind.NEWS_COUNT)
        assert [lv.location for lv in got] == [2]

    def test_zero_values_omitted(self):
        _, idx = self.country_fixture()
        box = BoundingBox(36.0, 6.0, 47.0, 19.0)
        w = TimeWindow(dt(5), dt(6))  # no records that day
        assert query_viewport(idx, box, w, VariableKind.NEWS_COUNT) == []

    def test_matches_brute_force(self):
        rng = random.Random(11)
        pts = {i: (rng.uniform(-60, 60), rng.uniform(-170, 170)) for i in range(1, 201)}
        g = make_gazetteer(pts)
        recs = []
        for i in pts:
            for d in range(10):
                recs.extend(records_at(i, d, rng.randrange(3)))
        idx = build_index([], recs, g, zmax=6)
        for _ in range(50):
            s, e = sorted(rng.sample(range(11), 2))
            south, north = sorted((rng.uniform(-60, 60), rng.uniform(-60, 60)))
            west, east = sorted((rng.uniform(-170, 170), rng.uniform(-170, 170)))
            box = BoundingBox(south, west, north, east)
            w = TimeWindow(dt(s), dt(e))
            got = {lv.location: lv.value
                   for lv in query_viewport(idx, box, w, VariableKind.NEWS_COUNT)}
            want = {}
            for i, (lat, lon) in pts.items():
                if not (south <= lat <= north and west <= lon <= east):
                    continue
                total = sum(
                    1 for r in recs
                    if r.location == i and s <= (r.timestamp.date() - D0).days < e
                )
                if total:
                    want[i] = total
            assert got == want


class TestFrames:
    def index(self):
        g = make_gazetteer({1: (0, 0)})
        recs = [r for d in range(12) for r in records_at(1, d, 1)]
        return build_index([], recs, g, zmax=4)

    def box(self):
        return BoundingBox(-10, -10, 10, 10)

    def test_ten_daily_frames(self):
        spec = FrameSpec.of(dt(0), dt(10), window="day", step="day")
        out = frames(self.index(), spec, self.box(), VariableKind.NEWS_COUNT)
        assert len(out) == 10

    def test_weekly_window_daily_step(self):
        spec = FrameSpec.of(dt(0), dt(10), window="week", step="day")
        out = frames(self.index(), spec, self.box(), VariableKind.NEWS_COUNT)
        assert (out[0].start, out[0].end) == (dt(0), dt(7))
        assert (out[1].start, out[1].end) == (dt(1), dt(8))

    def test_cumulative_mode_widens(self):
        spec = FrameSpec.of(dt(0), dt(10), window="day", step="day", mode="cumulative")
        out = frames(self.index(), spec, self.box(), VariableKind.NEWS_COUNT)
        # frame 2 covers [day0, day3): three records
        assert out[2].values[0].value == 3

    def test_final_frame_clipped(self):
        spec = FrameSpec.of(dt(0), dt(10), window="week", step="week")
        out = frames(self.index(), spec, self.box(), VariableKind.NEWS_COUNT)
        assert len(out) == 2
        assert out[1].end == dt(10)
        assert out[1].values[0].value == 3  # days 7..9

    def test_step_spacing_exact(self):
        spec = FrameSpec.of(dt(0), dt(30), window="day", step="week")
        out = frames(self.index(), spec, self.box(), VariableKind.NEWS_COUNT)
        assert len(out) == math.ceil(30 / 7)
        for a, b in zip(out, out[1:]):
            assert b.start - a.start == timedelta(days=7)


class TestClusters:
    def lv(self, loc, lat, lon, value):
        return LocationValue(location=loc, point=GeoPoint(lat, lon), value=value)

    def test_merge_in_one_cell(self):
        values = [self.lv(1, 10, 10, 1), self.lv(2, 11, 11, 2), self.lv(3, 12, 12, 3)]
        [m] = cluster_markers(values, zoom=0)
        assert m.count == 6
        assert m.locations == (1, 2, 3)

    def test_split_at_higher_zoom(self):
        values = [self.lv(1, 10, 10, 1), self.lv(2, 11, 11, 2), self.lv(3, 12, 12, 3)]
        # cell height at zoom 8 is 180/256 = 0.703125 degrees, putting the
        # latitudes in rows 142, 143, and 145
        out = cluster_markers(values, zoom=8)
        assert len(out) == 3
        assert [m.count for m in out] == [1, 2, 3]

    def test_empty(self):
        assert cluster_markers([], zoom=3) == []

    def test_centroid_weighted(self):
        values = [self.lv(1, 0, 0, 1), self.lv(2, 0, 30, 3)]
        [m] = cluster_markers(values, zoom=0)
        assert m.point.lon == pytest.approx(22.5)

    def test_zoom_refinement_partitions(self):
        rng = random.Random(3)
        values = [
            self.lv(i, rng.uniform(-85, 85), rng.uniform(-175, 175), rng.randrange(1, 9))
            for i in range(1, 400)
        ]
        for z in range(6):
            parents = cluster_markers(values, zoom=z)
            children = cluster_markers(values, zoom=z + 1)
            parent_of = {}
            for pi, p in enumerate(parents):
                for loc in p.locations:
                    parent_of[loc] = pi
            sums = [0.0] * len(parents)
            for c in children:
                owners = {parent_of[loc] for loc in c.locations}
                assert len(owners) == 1  # a child never straddles parents
                sums[owners.pop()] += c.count
            assert sums == [p.count for p in parents]


class TestPick:
    def index(self):
        g = make_gazetteer({1: (0, 0), 2: (0, 20), 3: (0, 40)})
        recs = records_at(2, 0, 1) + records_at(3, 0, 5)
        return build_index([], recs, g, zmax=4)

    def test_single_nonzero(self):
        g = make_gazetteer({1: (0, 0)})
        idx = build_index([], records_at(1, 0, 1), g, zmax=4)
        got = pick_nearest_nonzero(idx, GeoPoint(50, 50), TimeWindow(dt(0), dt(1)),
                                   [VariableKind.NEWS_COUNT])
        assert got.location == 1

    def test_skips_nearer_zero_location(self):
        idx = self.index()
        # location 1 is nearest to the query point but has no records
        got = pick_nearest_nonzero(idx, GeoPoint(0, 1), TimeWindow(dt(0), dt(1)),
                                   [VariableKind.NEWS_COUNT])
        assert got.location == 2
        assert got.values[VariableKind.NEWS_COUNT] == 1

    def test_all_zero_not_found(self):
        idx = self.index()
        with pytest.raises(NoDataError):
            pick_nearest_nonzero(idx, GeoPoint(0, 0), TimeWindow(dt(5), dt(6)),
                                 [VariableKind.NEWS_COUNT])

    def test_equidistant_tie_smaller_id(self):
        g = make_gazetteer({5: (0, -10), 9: (0, 10)})
        recs = records_at(5, 0, 1) + records_at(9, 0, 1)
        idx = build_index([], recs, g, zmax=4)
        got = pick_nearest_nonzero(idx, GeoPoint(0, 0), TimeWindow(dt(0), dt(1)),
                                   [VariableKind.NEWS_COUNT])
        assert got.location == 5

    def test_matches_brute_force(self):
        rng = random.Random(23)
        pts = {i: (rng.uniform(-80, 80), rng.uniform(-179, 179)) for i in range(1, 151)}
        g = make_gazetteer(pts)
        recs = []
        for i in pts:
            if rng.random() < 0.5:
                recs.extend(records_at(i, rng.randrange(5), rng.randrange(1, 4)))
        idx = build_index([], recs, g, zmax=4)

        def brute(p, w_start, w_end):
            best = None
            for i, (lat, lon) in pts.items():
                total = sum(
                    1 for r in recs
                    if r.location == i and w_start <= (r.timestamp.date() - D0).days < w_end
                )
                if total == 0:
                    continue
                # independent haversine
                p1, p2 = math.radians(p.lat), math.radians(lat)
                dp = math.radians(lat - p.lat)
                dl = math.radians(lon - p.lon)
                a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
                d = 2 * 6371.0 * math.asin(math.sqrt(a))
                if best is None or (d, i) < best:
                    best = (d, i)
            return best

        for _ in range(100):
            p = GeoPoint(rng.uniform(-80, 80), rng.uniform(-179, 179))
            s, e = sorted(rng.sample(range(6), 2))
            want = brute(p, s, e)
            w = TimeWindow(dt(s), dt(e))
            if want is None:
                with pytest.raises(NoDataError):
                    pick_nearest_nonzero(idx, p, w, [VariableKind.NEWS_COUNT])
            else:
                got = pick_nearest_nonzero(idx, p, w, [VariableKind.NEWS_COUNT])
                assert got.location == want[1]
