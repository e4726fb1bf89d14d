"""File ingestion: detection and parsing of the six supported upload kinds.

Four CSV kinds (water nodes, links, stations, wide-format quality data), one
GeoJSON layer kind, and the ESRI ASCII elevation grid.  Every operation is
idempotent: rows or features that would duplicate existing graph content are
skipped with a warning so re-uploading a file changes no counts.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Optional, Union

from .errors import (
    BadGeoJson,
    BadHeader,
    DuplicateDomainId,
    DuplicateEdge,
    SelfLoop,
    UnknownNode,
    UnrecognizedFile,
)
from .geometry import (
    Geometry,
    MultiPolygon,
    Point,
    Polygon,
    geometry_from_geojson,
    geometry_within,
    point_in_multipolygon,
    point_in_polygon,
    representative_point,
)
from .grids import DemGrid
from .store import EdgeType, Graph, NodeLabel, format_timestamp, parse_timestamp


class FileKind(str, Enum):
    WATER_NODES_CSV = "WaterNodesCsv"
    LINKS_CSV = "LinksCsv"
    STATIONS_CSV = "StationsCsv"
    QUALITY_CSV = "QualityCsv"
    GEOJSON_LAYER = "GeoJsonLayer"
    DEM_ASCII_GRID = "DemAsciiGrid"


@dataclass
class IngestReport:
    kind: str
    nodes_created: int = 0
    edges_created: int = 0
    rows_skipped: int = 0
    warnings: list[str] = field(default_factory=list)

    def skip(self, message: str) -> None:
        self.rows_skipped += 1
        self.warnings.append(message)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "nodes_created": self.nodes_created,
            "edges_created": self.edges_created,
            "rows_skipped": self.rows_skipped,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class QualitySample:
    """One sampling event: a station, a moment, and measured parameters."""

    station_id: str
    timestamp: datetime
    depth: Optional[float]
    values: dict[str, tuple[float, bool]]  # name -> (value, below detection)


WATER_NODES_HEADER = ["id", "name", "type", "subsystem", "lon", "lat"]
LINKS_HEADER = ["from_id", "to_id", "kind"]
STATIONS_HEADER = ["id", "name", "lon", "lat", "operator"]
LINK_KINDS = {"channel", "river", "pipeline"}
RESERVED_PARAM_NAMES = {"id", "station_id", "timestamp", "depth_m"}


def _as_text(data: Union[bytes, str]) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        raise UnrecognizedFile("input is not UTF-8 text")


def _csv_rows(text: str) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Header plus (line number, cells) pairs; blank lines dropped."""
    reader = csv.reader(io.StringIO(text))
    header: Optional[list[str]] = None
    rows: list[tuple[int, list[str]]] = []
    for lineno, cells in enumerate(reader, start=1):
        if not cells or all(not c.strip() for c in cells):
            continue
        if header is None:
            header = [c.strip() for c in cells]
        else:
            rows.append((lineno, cells))
    if header is None:
        raise BadHeader("empty file")
    return header, rows


def detect_file_kind(data: Union[bytes, str]) -> FileKind:
    text = _as_text(data)
    stripped = text.lstrip()
    if not stripped:
        raise UnrecognizedFile("empty file")
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError:
            raise UnrecognizedFile("JSON-like input failed to parse")
        if isinstance(obj, dict) and obj.get("type") == "FeatureCollection":
            return FileKind.GEOJSON_LAYER
        raise UnrecognizedFile("JSON input is not a FeatureCollection")
    first_token = stripped.split(None, 1)[0].lower()
    if first_token == "ncols":
        return FileKind.DEM_ASCII_GRID
    try:
        header, _ = _csv_rows(text)
    except BadHeader:
        raise UnrecognizedFile("empty file")
    except csv.Error as exc:
        raise UnrecognizedFile(f"not parseable as CSV: {exc}")
    if header == WATER_NODES_HEADER:
        return FileKind.WATER_NODES_CSV
    if header == LINKS_HEADER:
        return FileKind.LINKS_CSV
    if header == STATIONS_HEADER:
        return FileKind.STATIONS_CSV
    if len(header) >= 3 and header[:2] == ["station_id", "timestamp"]:
        return FileKind.QUALITY_CSV
    raise UnrecognizedFile(f"unrecognized CSV header: {header!r}")


def _require_system(graph: Graph, system: int) -> None:
    node = graph.get_node(system)
    if node.label is not NodeLabel.WATER_SYSTEM:
        raise UnknownNode(f"node {system} is not a WaterSystem")


def ensure_system(graph: Graph, domain_id: str = "default",
                  name: str = "Default system") -> int:
    """The working WaterSystem node, creating one when the graph has none."""
    existing = graph.nodes_with_label(NodeLabel.WATER_SYSTEM)
    if existing:
        return existing[0]
    return graph.create_node(NodeLabel.WATER_SYSTEM,
                             {"id": domain_id, "name": name})


def _expect_header(header: list[str], expected: list[str]) -> None:
    if header != expected:
        raise BadHeader(
            f"expected header {','.join(expected)!r}, got {','.join(header)!r}")


def _parse_point(lon_text: str, lat_text: str) -> Point:
    return Point(float(lon_text), float(lat_text))


def ingest_water_nodes(graph: Graph, data: Union[bytes, str],
                       system: int) -> IngestReport:
    _require_system(graph, system)
    header, rows = _csv_rows(_as_text(data))
    _expect_header(header, WATER_NODES_HEADER)
    report = IngestReport(FileKind.WATER_NODES_CSV.value)
    for lineno, cells in rows:
        if len(cells) != len(header):
            report.skip(f"line {lineno}: wrong field count")
            continue
        node_id, name, ntype, subsystem, lon, lat = (c.strip() for c in cells)
        if not node_id:
            report.skip(f"line {lineno}: empty id")
            continue
        try:
            point = _parse_point(lon, lat)
        except ValueError:
            report.skip(f"line {lineno}: bad coordinates ({lon!r}, {lat!r})")
            continue
        props = {"id": node_id, "lon": point.lon, "lat": point.lat}
        if name:
            props["name"] = name
        if ntype:
            props["type"] = ntype
        if subsystem:
            props["subsystem"] = subsystem
        try:
            graph.create_node(NodeLabel.WATER_NODE, props)
        except DuplicateDomainId:
            report.skip(f"line {lineno}: duplicate water node id {node_id!r}")
            continue
        report.nodes_created += 1
    return report


def ingest_links(graph: Graph, data: Union[bytes, str]) -> IngestReport:
    header, rows = _csv_rows(_as_text(data))
    _expect_header(header, LINKS_HEADER)
    report = IngestReport(FileKind.LINKS_CSV.value)
    for lineno, cells in rows:
        if len(cells) != len(header):
            report.skip(f"line {lineno}: wrong field count")
            continue
        from_id, to_id, kind = (c.strip() for c in cells)
        if kind not in LINK_KINDS:
            report.skip(f"line {lineno}: unknown link kind {kind!r}")
            continue
        src = graph.by_domain_id(NodeLabel.WATER_NODE, from_id)
        dst = graph.by_domain_id(NodeLabel.WATER_NODE, to_id)
        if src is None or dst is None:
            missing = from_id if src is None else to_id
            report.skip(f"line {lineno}: unknown water node {missing!r}")
            continue
        try:
            graph.create_edge(EdgeType.CONNECTED, src, dst, {"kind": kind})
        except SelfLoop:
            report.skip(f"line {lineno}: self link on {from_id!r}")
            continue
        except DuplicateEdge:
            report.skip(f"line {lineno}: duplicate link {from_id!r}->{to_id!r}")
            continue
        report.edges_created += 1
    return report


def ingest_stations(graph: Graph, data: Union[bytes, str],
                    system: int) -> IngestReport:
    _require_system(graph, system)
    header, rows = _csv_rows(_as_text(data))
    _expect_header(header, STATIONS_HEADER)
    report = IngestReport(FileKind.STATIONS_CSV.value)
    for lineno, cells in rows:
        if len(cells) != len(header):
            report.skip(f"line {lineno}: wrong field count")
            continue
        station_id, name, lon, lat, operator = (c.strip() for c in cells)
        if not station_id:
            report.skip(f"line {lineno}: empty id")
            continue
        try:
            point = _parse_point(lon, lat)
        except ValueError:
            report.skip(f"line {lineno}: bad coordinates ({lon!r}, {lat!r})")
            continue
        props = {"id": station_id, "lon": point.lon, "lat": point.lat}
        if name:
            props["name"] = name
        if operator:
            props["operator"] = operator
        try:
            node = graph.create_node(NodeLabel.QUALITY_STATION, props)
        except DuplicateDomainId:
            report.skip(f"line {lineno}: duplicate station id {station_id!r}")
            continue
        report.nodes_created += 1
        graph.create_edge(EdgeType.STATION_OF, node, system)
        report.edges_created += 1
    return report


def _format_depth(depth: Optional[float]) -> str:
    return "" if depth is None else format(depth, "g")


def sample_domain_id(station_id: str, timestamp: datetime,
                     depth: Optional[float]) -> str:
    return f"{station_id}|{format_timestamp(timestamp)}|{_format_depth(depth)}"


def ingest_quality_data(graph: Graph, data: Union[bytes, str]) -> IngestReport:
    header, rows = _csv_rows(_as_text(data))
    if len(header) < 3 or header[:2] != ["station_id", "timestamp"]:
        raise BadHeader(
            "quality CSV must start with station_id,timestamp and carry "
            "at least one parameter column")
    has_depth = header[2] == "depth_m"
    param_names = header[3:] if has_depth else header[2:]
    if not param_names:
        raise BadHeader("no parameter columns")
    if len(set(param_names)) != len(param_names):
        raise BadHeader("repeated parameter column")
    for name in param_names:
        if not name or name in RESERVED_PARAM_NAMES or name.endswith("__bdl"):
            raise BadHeader(f"bad parameter column name {name!r}")
    first_param = 3 if has_depth else 2
    report = IngestReport(FileKind.QUALITY_CSV.value)
    for lineno, cells in rows:
        if len(cells) != len(header):
            report.skip(f"line {lineno}: wrong field count")
            continue
        station_id = cells[0].strip()
        station = graph.by_domain_id(NodeLabel.QUALITY_STATION, station_id)
        if station is None:
            report.skip(f"line {lineno}: unknown station {station_id!r}")
            continue
        try:
            timestamp = parse_timestamp(cells[1])
        except ValueError:
            report.skip(f"line {lineno}: bad timestamp {cells[1].strip()!r}")
            continue
        depth: Optional[float] = None
        if has_depth and cells[2].strip():
            try:
                depth = float(cells[2])
            except ValueError:
                report.skip(f"line {lineno}: bad depth {cells[2].strip()!r}")
                continue
            if depth < 0:
                report.skip(f"line {lineno}: negative depth")
                continue
        values: dict[str, tuple[float, bool]] = {}
        bad_cell = None
        for name, cell in zip(param_names, cells[first_param:]):
            cell = cell.strip()
            if not cell:
                continue
            below = cell.startswith("<")
            try:
                value = float(cell[1:] if below else cell)
            except ValueError:
                bad_cell = (name, cell)
                break
            values[name] = (value, below)
        if bad_cell is not None:
            report.skip(
                f"line {lineno}: bad value {bad_cell[1]!r} for {bad_cell[0]}")
            continue
        if not values:
            report.skip(f"line {lineno}: no parameter values")
            continue
        props = {
            "id": sample_domain_id(station_id, timestamp, depth),
            "station_id": station_id,
            "timestamp": timestamp,
        }
        if depth is not None:
            props["depth_m"] = depth
        for name, (value, below) in values.items():
            props[name] = value
            if below:
                props[f"{name}__bdl"] = True
        try:
            node = graph.create_node(NodeLabel.QUALITY_DATA, props)
        except DuplicateDomainId:
            report.skip(f"line {lineno}: duplicate sample {props['id']!r}")
            continue
        report.nodes_created += 1
        graph.create_edge(EdgeType.COLLECTED, station, node)
        report.edges_created += 1
    return report


def sample_from_node(props: dict) -> QualitySample:
    """Rebuild the sampling-event view from a QualityData node's properties."""
    values = {}
    for key, value in props.items():
        if key in RESERVED_PARAM_NAMES or key.endswith("__bdl"):
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            continue
        values[key] = (float(value), bool(props.get(f"{key}__bdl", False)))
    return QualitySample(
        station_id=props["station_id"],
        timestamp=props["timestamp"],
        depth=props.get("depth_m"),
        values=values,
    )


_LAYER_LABELS = {
    "watershed": (NodeLabel.WATERSHED, EdgeType.HAS_WATERSHED),
    "landuse": (NodeLabel.LAND_USE, EdgeType.HAS_LANDUSE),
    "geometry": (NodeLabel.GEOMETRY, EdgeType.HAS_GEOMETRY),
}


def _watershed_geometry(graph: Graph, watershed: int):
    geom = graph.get_node(watershed).props.get("geometry")
    if isinstance(geom, (Polygon, MultiPolygon)):
        return geom
    return None


def watershed_contains_point(graph: Graph, watershed: int, p: Point) -> bool:
    geom = _watershed_geometry(graph, watershed)
    if geom is None:
        return False
    if isinstance(geom, MultiPolygon):
        return point_in_multipolygon(p, geom)
    return point_in_polygon(p, geom)


def innermost_watersheds(graph: Graph, p: Point) -> list[int]:
    """Watersheds containing p, minus any that is a PART_OF ancestor of
    another containing watershed (nested containers defer to the innermost)."""
    candidates = [w for w in graph.nodes_with_label(NodeLabel.WATERSHED)
                  if watershed_contains_point(graph, w, p)]
    if len(candidates) <= 1:
        return candidates
    candidate_set = set(candidates)
    shadowed: set[int] = set()
    for w in candidates:
        seen: set[int] = set()
        stack = [w]
        while stack:
            for parent in graph.out_neighbors(stack.pop(), EdgeType.PART_OF):
                if parent not in seen:
                    seen.add(parent)
                    stack.append(parent)
        shadowed |= seen & candidate_set
    return [w for w in candidates if w not in shadowed]


def derive_part_of_edges(graph: Graph) -> int:
    """PART_OF edges from each watershed to its immediate strict containers."""
    watersheds = graph.nodes_with_label(NodeLabel.WATERSHED)
    geoms = {w: _watershed_geometry(graph, w) for w in watersheds}

    def strictly_inside(a: int, b: int) -> bool:
        if geoms[a] is None or geoms[b] is None:
            return False
        return (geometry_within(geoms[a], geoms[b])
                and not geometry_within(geoms[b], geoms[a]))

    created = 0
    for child in watersheds:
        containers = [p for p in watersheds
                      if p != child and strictly_inside(child, p)]
        if not containers:
            continue
        minimal = [p for p in containers
                   if not any(q != p and strictly_inside(q, p)
                              for q in containers)]
        for parent in minimal:
            try:
                graph.create_edge(EdgeType.PART_OF, child, parent)
                created += 1
            except DuplicateEdge:
                pass
    return created


def ingest_geojson_layer(graph: Graph, data: Union[bytes, str], layer: str,
                         system: int) -> IngestReport:
    if layer not in _LAYER_LABELS:
        raise ValueError(f"layer must be one of {sorted(_LAYER_LABELS)}")
    _require_system(graph, system)
    label, link_type = _LAYER_LABELS[layer]
    try:
        obj = json.loads(_as_text(data))
    except json.JSONDecodeError as exc:
        raise BadGeoJson(f"not valid JSON: {exc}")
    if (not isinstance(obj, dict) or obj.get("type") != "FeatureCollection"
            or not isinstance(obj.get("features"), list)):
        raise BadGeoJson("input is not a FeatureCollection")
    report = IngestReport(FileKind.GEOJSON_LAYER.value)
    created_nodes: list[int] = []
    for index, feature in enumerate(obj["features"]):
        where = f"feature {index}"
        if not isinstance(feature, dict) or feature.get("type") != "Feature":
            report.skip(f"{where}: not a Feature")
            continue
        fprops = feature.get("properties")
        if not isinstance(fprops, dict) or "id" not in fprops:
            report.skip(f"{where}: missing properties.id")
            continue
        try:
            geom = geometry_from_geojson(feature.get("geometry"))
        except (ValueError, TypeError, IndexError, KeyError) as exc:
            report.skip(f"{where}: unsupported geometry ({exc})")
            continue
        if layer in ("watershed", "landuse") and not isinstance(
                geom, (Polygon, MultiPolygon)):
            report.skip(f"{where}: {layer} features must be polygonal")
            continue
        props = {"geometry": geom}
        for key, value in fprops.items():
            if isinstance(value, bool) or isinstance(value, (str, int, float)):
                props[key] = value
        props["id"] = str(fprops["id"])
        try:
            node = graph.create_node(label, props)
        except DuplicateDomainId:
            report.skip(f"{where}: duplicate {layer} id {props['id']!r}")
            continue
        created_nodes.append(node)
        report.nodes_created += 1
        try:
            graph.create_edge(link_type, system, node)
            report.edges_created += 1
        except DuplicateEdge:  # pragma: no cover - fresh node, defensive
            pass
    if layer == "watershed":
        report.edges_created += derive_part_of_edges(graph)
    elif layer == "landuse":
        for node in created_nodes:
            geom = graph.get_node(node).props["geometry"]
            anchor = representative_point(geom)
            for watershed in innermost_watersheds(graph, anchor):
                try:
                    graph.create_edge(EdgeType.WITHIN, node, watershed)
                    report.edges_created += 1
                except DuplicateEdge:
                    pass
    return report


def dem_domain_id(ascii_text: str) -> str:
    digest = hashlib.sha256(ascii_text.encode("utf-8")).hexdigest()
    return f"dem-{digest[:12]}"


def ingest_dem(graph: Graph, data: Union[bytes, str], system: int) -> int:
    """Store an elevation grid as a DEM node; returns the node id.

    The raster rides along as a property so snapshots stay self-contained.
    Re-ingesting a byte-equivalent grid returns the existing node.
    """
    _require_system(graph, system)
    dem = DemGrid.from_ascii(_as_text(data))
    canonical = dem.to_ascii()
    domain_id = dem_domain_id(canonical)
    existing = graph.by_domain_id(NodeLabel.DEM, domain_id)
    if existing is not None:
        return existing
    return graph.create_node(NodeLabel.DEM, {
        "id": domain_id,
        "ncols": dem.ncols,
        "nrows": dem.nrows,
        "xllcorner": dem.xll,
        "yllcorner": dem.yll,
        "cellsize": dem.cellsize,
        "nodata_value": dem.nodata,
        "raster": canonical,
    })


def load_dem_node(graph: Graph, node_id: int) -> DemGrid:
    node = graph.get_node(node_id)
    if node.label is not NodeLabel.DEM:
        raise UnknownNode(f"node {node_id} is not a DEM")
    return DemGrid.from_ascii(node.props["raster"])


def ingest_auto(graph: Graph, data: Union[bytes, str], system: int,
                kind: Optional[FileKind] = None,
                layer: Optional[str] = None) -> IngestReport:
    """Detect the file kind when not given and dispatch to its parser.

    GeoJSON layer selection comes from the explicit argument, else from a
    top-level "layer" (or "name") member of the FeatureCollection, else
    defaults to the plain geometry layer.
    """
    kind = kind or detect_file_kind(data)
    if kind is FileKind.WATER_NODES_CSV:
        return ingest_water_nodes(graph, data, system)
    if kind is FileKind.LINKS_CSV:
        return ingest_links(graph, data)
    if kind is FileKind.STATIONS_CSV:
        return ingest_stations(graph, data, system)
    if kind is FileKind.QUALITY_CSV:
        return ingest_quality_data(graph, data)
    if kind is FileKind.GEOJSON_LAYER:
        if layer is None:
            try:
                obj = json.loads(_as_text(data))
            except json.JSONDecodeError as exc:
                raise BadGeoJson(f"not valid JSON: {exc}")
            hint = obj.get("layer") or obj.get("name")
            layer = hint if hint in _LAYER_LABELS else "geometry"
        return ingest_geojson_layer(graph, data, layer, system)
    if kind is FileKind.DEM_ASCII_GRID:
        before = graph.count_label(NodeLabel.DEM)
        ingest_dem(graph, data, system)
        report = IngestReport(FileKind.DEM_ASCII_GRID.value)
        if graph.count_label(NodeLabel.DEM) > before:
            report.nodes_created = 1
        else:
            report.skip("grid already ingested")
        return report
    raise UnrecognizedFile(f"no parser for kind {kind!r}")
