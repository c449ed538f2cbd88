import math

import pytest
from hypothesis import given, strategies as st

from epimap.geo import GeoPoint, VariableKind
from epimap.layout import (
    GeoCircleSet,
    GeoCircle,
    emphasize,
    layout_geocircles,
    marker_color,
    marker_radius,
)

CENTER = GeoPoint(10.0, 20.0)


class TestMarkerRadius:
    def test_single_point_pinned(self):
        assert marker_radius(1) == 40.0

    def test_eight_points(self):
        assert marker_radius(8) == 56.0

    def test_hundred_points(self):
        assert marker_radius(100) == pytest.approx(98.43, abs=0.01)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            marker_radius(0)

    def test_strictly_increasing_log_sampled(self):
        ns = sorted({int(10 ** (k / 40)) for k in range(0, 241)} | {1, 2})
        radii = [marker_radius(n) for n in ns if n >= 1]
        assert all(a < b for a, b in zip(radii, radii[1:]))


class TestMarkerColor:
    @pytest.mark.parametrize("n,color", [
        (1, "green"), (10, "green"), (11, "yellow"),
        (100, "yellow"), (101, "red"), (5000, "red"),
    ])
    def test_boundaries(self, n, color):
        assert marker_color(n) == color


class TestLayout:
    def test_two_disease_variables_ordered(self):
        s = layout_geocircles(
            CENTER,
            {VariableKind.CONFIRMED: 100, VariableKind.DEATHS: 8},
            active_doc_layers=0,
        )
        assert [c.variable for c in s.circles] == [
            VariableKind.CONFIRMED, VariableKind.DEATHS]
        assert all(c.style == "hollow" for c in s.circles)
        assert all(c.stroke_px == 2.0 for c in s.circles)
        assert s.circles[0].radius_px > s.circles[1].radius_px

    def test_single_variable(self):
        s = layout_geocircles(CENTER, {VariableKind.NEWS_COUNT: 5}, active_doc_layers=1)
        assert len(s.circles) == 1
        assert s.circles[0].style == "solid"
        assert s.label_count == 5

    def test_two_doc_layers_no_label(self):
        s = layout_geocircles(
            CENTER,
            {VariableKind.NEWS_COUNT: 5, VariableKind.TWEET_COUNT: 2},
            active_doc_layers=2,
        )
        assert s.label_count is None

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            layout_geocircles(CENTER, {VariableKind.CONFIRMED: 0}, active_doc_layers=0)

    def test_zero_values_skipped(self):
        s = layout_geocircles(
            CENTER,
            {VariableKind.CONFIRMED: 10, VariableKind.DEATHS: 0},
            active_doc_layers=0,
        )
        assert [c.variable for c in s.circles] == [VariableKind.CONFIRMED]

    @given(st.dictionaries(
        st.sampled_from(list(VariableKind)),
        st.integers(min_value=1, max_value=10**6),
        min_size=1,
    ))
    def test_ordering_non_increasing(self, values):
        s = layout_geocircles(CENTER, values, active_doc_layers=0)
        radii = [c.radius_px for c in s.circles]
        assert all(a >= b for a, b in zip(radii, radii[1:]))

    @given(st.integers(min_value=1, max_value=10**6))
    def test_equal_values_equal_radii(self, value):
        s = layout_geocircles(
            CENTER,
            {VariableKind.CONFIRMED: value, VariableKind.NEWS_COUNT: value},
            active_doc_layers=1,
        )
        assert len({c.radius_px for c in s.circles}) == 1

    def test_equal_radius_tie_by_variable_order(self):
        s = layout_geocircles(
            CENTER,
            {VariableKind.DEATHS: 7, VariableKind.CONFIRMED: 7},
            active_doc_layers=0,
        )
        assert [c.variable for c in s.circles] == [
            VariableKind.CONFIRMED, VariableKind.DEATHS]


class TestEmphasize:
    def build(self):
        return layout_geocircles(
            CENTER,
            {VariableKind.CONFIRMED: 50, VariableKind.DEATHS: 3},
            active_doc_layers=0,
        )

    def test_stroke_doubled(self):
        out = emphasize(self.build())
        assert all(c.stroke_px == 4.0 for c in out.circles)
        assert all(c.emphasized for c in out.circles)

    def test_idempotent(self):
        once = emphasize(self.build())
        assert emphasize(once) == once

    def test_ordering_unchanged(self):
        before = self.build()
        after = emphasize(before)
        assert [c.variable for c in after.circles] == [c.variable for c in before.circles]


class TestGeoCircleSetInvariant:
    def test_unsorted_circles_rejected(self):
        small = GeoCircle(VariableKind.CONFIRMED, 40.0, "hollow", 2.0)
        big = GeoCircle(VariableKind.DEATHS, 80.0, "hollow", 2.0)
        with pytest.raises(ValueError):
            GeoCircleSet(center=CENTER, circles=(small, big))
