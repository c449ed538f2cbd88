"""Visual encoding: marker radii and colors, concentric geo-circle layout.

A location showing several variables at once renders as nested circles:
color identifies the variable, radius encodes the scaled magnitude, and the
list is ordered by non-increasing radius so circles paint back-to-front
without occluding each other. Disease variables draw hollow with a broken
stroke; document counts draw solid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

from .geo import GeoPoint, VariableKind

#: Radius of a marker or circle representing a single point/unit.
BASE_RADIUS_PX = 40.0

#: Broken-line stroke for hollow circles, and its dash pattern.
HOLLOW_STROKE_PX = 2.0
DASH_PATTERN_PX = (6.0, 3.0)

#: Deterministic ordering for equal radii.
_VARIABLE_ORDER = {v: i for i, v in enumerate(VariableKind)}


def marker_radius(n: float) -> float:
    """Radius in pixels for a marker covering ``n`` points.

    A single point is pinned to exactly 40 px; beyond that the radius grows
    with the squared base-2 logarithm: 40 + log2(2n)^2. Strictly increasing
    for n >= 1 (the formula's value at n=1 would be 41, so the pin keeps
    monotonicity).
    """
    if n < 1:
        raise ValueError(f"point count must be >= 1, got {n}")
    if n == 1:
        return BASE_RADIUS_PX
    return BASE_RADIUS_PX + math.log2(2 * n) ** 2


def marker_color(n: float) -> str:
    """Traffic-light scale by point count: green to 10, yellow to 100, red beyond."""
    if n <= 10:
        return "green"
    if n <= 100:
        return "yellow"
    return "red"


@dataclass(frozen=True)
class GeoCircle:
    variable: VariableKind
    radius_px: float
    style: str  # "hollow" | "solid"
    stroke_px: float
    emphasized: bool = False

    @property
    def color(self) -> str:
        return self.variable.color


@dataclass(frozen=True)
class GeoCircleSet:
    """Concentric circles for one location, ordered back-to-front.

    ``label_count`` carries the count to print inside the circle, and is set
    only when exactly one document-count layer is active (with two active,
    no count is shown).
    """

    center: GeoPoint
    circles: tuple[GeoCircle, ...]
    label_count: int | None = None

    def __post_init__(self) -> None:
        radii = [c.radius_px for c in self.circles]
        if any(a < b for a, b in zip(radii, radii[1:])):
            raise ValueError("circles must be ordered by non-increasing radius")


def _value_radius(value: float) -> float:
    # magnitudes below one point clamp to the single-point radius
    return marker_radius(max(1.0, abs(value)))


def layout_geocircles(
    center: GeoPoint,
    values: Mapping[VariableKind, float],
    active_doc_layers: int,
) -> GeoCircleSet:
    """Build the circle stack for one location.

    One circle per nonzero variable; radius comes from the same law as
    cluster markers so the two layers share a visual language. Equal values
    give equal radii regardless of which variable carries them.
    """
    nonzero = {v: x for v, x in values.items() if x != 0}
    if not nonzero:
        raise ValueError("at least one variable value must be nonzero")
    circles = [
        GeoCircle(
            variable=v,
            radius_px=_value_radius(x),
            style="solid" if v.is_document_count else "hollow",
            stroke_px=0.0 if v.is_document_count else HOLLOW_STROKE_PX,
        )
        for v, x in nonzero.items()
    ]
    circles.sort(key=lambda c: (-c.radius_px, _VARIABLE_ORDER[c.variable]))
    label = None
    doc_vars = [v for v in nonzero if v.is_document_count]
    if active_doc_layers == 1 and len(doc_vars) == 1:
        label = int(nonzero[doc_vars[0]])
    return GeoCircleSet(center=center, circles=tuple(circles), label_count=label)


def emphasize(circle_set: GeoCircleSet) -> GeoCircleSet:
    """Thicken the broken strokes to draw attention; idempotent."""
    if all(c.emphasized for c in circle_set.circles):
        return circle_set
    return replace(
        circle_set,
        circles=tuple(
            c if c.emphasized else replace(c, stroke_px=c.stroke_px * 2, emphasized=True)
            for c in circle_set.circles
        ),
    )


def circle_set_payload(s: GeoCircleSet) -> dict:
    """JSON-ready form used by the service."""
    return {
        "center": {"lat": s.center.lat, "lon": s.center.lon},
        "circles": [
            {
                "variable": c.variable.value,
                "radius_px": c.radius_px,
                "style": c.style,
                "stroke_px": c.stroke_px,
                "color": c.color,
                "emphasized": c.emphasized,
            }
            for c in s.circles
        ],
        "label_count": s.label_count,
    }
