"""epimap: spatiotemporal engine and map service for keyword/case tracking."""

from .geo import (
    BoundingBox,
    GeoPoint,
    LocationId,
    TimeWindow,
    VariableKind,
    bbox_contains,
    haversine_distance,
    window_contains,
)
from .cases import (
    CaseSeries,
    derive_active,
    derive_daily_new,
    load_case_series,
    normalize,
    parse_case_csv,
    repair_series,
)
from .corpus import (
    Document,
    GeocodedKeyword,
    KeywordScore,
    compute_tf_idf,
    extract_keywords,
    geocode_and_cross,
    ingest_tweet,
    keyword_filter,
    run_pipeline,
    tokenize,
)
from .gazetteer import (
    Gazetteer,
    GazetteerEntry,
    load_gazetteer,
    recognize_toponyms,
    resolve_toponym,
    spatial_synonyms,
)
from .stindex import (
    FrameSpec,
    Marker,
    PickResult,
    RollingAverage,
    StIndex,
    aggregate_window,
    build_index,
    cluster_markers,
    frames,
    pick_nearest_nonzero,
    query_viewport,
)
from .layout import (
    GeoCircle,
    GeoCircleSet,
    emphasize,
    layout_geocircles,
    marker_color,
    marker_radius,
)
from .correlate import AlignedPair, align, area_correlation, evaluate_area, pearson

__version__ = "0.1.0"
