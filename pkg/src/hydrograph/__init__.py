"""Graph engine for water-distribution and water-quality monitoring networks.

The package couples an embedded, schema-checked property graph with the
domain layers built on top of it: file ingestion for network CSVs, GeoJSON
layers and elevation grids, raster drainage analysis, path and station
queries, quality-series filtering and export, and an authenticated HTTP
service with response caching and background jobs.
"""

from .errors import HydrographError
from .geometry import (
    MultiPolygon,
    Point,
    Polygon,
    Polyline,
    geometry_from_geojson,
    geometry_to_geojson,
    point_in_polygon,
)
from .grids import AccumGrid, DemGrid, FlowDirGrid
from .drainage import (
    delineate_watershed,
    fill_depressions,
    flow_accumulation,
    flow_direction_d8,
    run_drainage_pipeline,
)
from .ingest import FileKind, IngestReport, ensure_system, ingest_auto
from .queries import (
    Path,
    QualityFilter,
    QualitySeries,
    export_quality_csv,
    filter_quality,
    q1_sources,
    q2_full_paths,
    q3_downstream_stations,
    q4_stations_same_watershed,
)
from .service import ServiceConfig, create_app
from .store import Edge, EdgeType, Graph, Node, NodeLabel

__all__ = [
    "AccumGrid",
    "DemGrid",
    "Edge",
    "EdgeType",
    "FileKind",
    "FlowDirGrid",
    "Graph",
    "HydrographError",
    "IngestReport",
    "MultiPolygon",
    "Node",
    "NodeLabel",
    "Path",
    "Point",
    "Polygon",
    "Polyline",
    "QualityFilter",
    "QualitySeries",
    "ServiceConfig",
    "create_app",
    "delineate_watershed",
    "ensure_system",
    "export_quality_csv",
    "fill_depressions",
    "filter_quality",
    "flow_accumulation",
    "flow_direction_d8",
    "geometry_from_geojson",
    "geometry_to_geojson",
    "ingest_auto",
    "point_in_polygon",
    "q1_sources",
    "q2_full_paths",
    "q3_downstream_stations",
    "q4_stations_same_watershed",
    "run_drainage_pipeline",
]

__version__ = "0.1.0"
