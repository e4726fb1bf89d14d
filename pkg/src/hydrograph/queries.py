"""Path queries over the network graph and quality-series filtering.

The four exploration queries walk CONNECTED or FLOWS_TO edges with an
explicit-stack depth-first search restricted to simple paths, so data cycles
stall nothing.  A path-count cap guards pathological inputs.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Iterable, Optional

from .errors import (
    NoWatershed,
    NotAStretch,
    NotAWaterNode,
    NotLandUse,
    PathLimitExceeded,
    UnknownStation,
)
from .ingest import sample_from_node
from .store import EdgeType, Graph, NodeLabel, format_timestamp

DEFAULT_PATH_CAP = 10_000


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]
    edges: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.nodes) - 1:
            raise ValueError("edge list must be one shorter than node list")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("paths are simple: no repeated node")

    def __len__(self) -> int:
        return len(self.edges)


def _require_label(graph: Graph, node: int, label: NodeLabel,
                   error: type[Exception]) -> None:
    if graph.get_node(node).label is not label:
        raise error(f"node {node} is not a {label.value}")


def _simple_paths(graph: Graph, start: int, etype: EdgeType, direction: str,
                  is_terminal: Callable[[int], bool],
                  cap: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All simple paths from start, walking etype edges in one direction,
    ending at nodes satisfying is_terminal.  Paths come back rooted at
    start; nodes and edge ids run outward from it."""
    results: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    nodes = [start]
    edges: list[int] = []
    on_path = {start}
    if is_terminal(start):
        results.append((tuple(nodes), tuple(edges)))
    stack = [(start, iter(graph.neighbors(start, etype, direction)))]
    while stack:
        node, candidates = stack[-1]
        step = None
        for edge_id, other in candidates:
            if other not in on_path:
                step = (edge_id, other)
                break
        if step is None:
            stack.pop()
            on_path.discard(nodes.pop())
            if edges:
                edges.pop()
            continue
        edge_id, other = step
        nodes.append(other)
        edges.append(edge_id)
        on_path.add(other)
        if is_terminal(other):
            results.append((tuple(nodes), tuple(edges)))
            if len(results) > cap:
                raise PathLimitExceeded(
                    f"more than {cap} paths; narrow the query")
        stack.append((other, iter(graph.neighbors(other, etype, direction))))
    return results


def _no_edges(graph: Graph, etype: EdgeType,
              direction: str) -> Callable[[int], bool]:
    return lambda n: not graph.neighbors(n, etype, direction)


def q1_sources(graph: Graph, node: int,
               cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    """Simple paths from every source (no incoming CONNECTED edge) down to
    the node, each oriented source -> node."""
    _require_label(graph, node, NodeLabel.WATER_NODE, NotAWaterNode)
    upstream = _simple_paths(graph, node, EdgeType.CONNECTED, "in",
                             _no_edges(graph, EdgeType.CONNECTED, "in"), cap)
    return [Path(tuple(reversed(ns)), tuple(reversed(es)))
            for ns, es in upstream]


def q2_full_paths(graph: Graph, node: int,
                  cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    """Every simple source-to-sink CONNECTED path passing through node."""
    _require_label(graph, node, NodeLabel.WATER_NODE, NotAWaterNode)
    return _full_paths_through(graph, node, EdgeType.CONNECTED, cap)


def _full_paths_through(graph: Graph, node: int, etype: EdgeType,
                        cap: int) -> list[Path]:
    upstream = _simple_paths(graph, node, etype, "in",
                             _no_edges(graph, etype, "in"), cap)
    downstream = _simple_paths(graph, node, etype, "out",
                               _no_edges(graph, etype, "out"), cap)
    paths: list[Path] = []
    for up_nodes, up_edges in upstream:
        up_set = set(up_nodes)
        for down_nodes, down_edges in downstream:
            # Halves may only share the pivot node, else the join repeats.
            if any(n in up_set for n in down_nodes[1:]):
                continue
            nodes = tuple(reversed(up_nodes)) + down_nodes[1:]
            edges = tuple(reversed(up_edges)) + down_edges
            paths.append(Path(nodes, edges))
            if len(paths) > cap:
                raise PathLimitExceeded(
                    f"more than {cap} paths; narrow the query")
    return paths


def q3_downstream_stations(graph: Graph, stretch: int,
                           cap: int = DEFAULT_PATH_CAP
                           ) -> list[tuple[int, Path]]:
    """Stations monitoring any stretch on any full FLOWS_TO path through
    the given stretch; one entry per station with the first path that
    reached it."""
    _require_label(graph, stretch, NodeLabel.WATER_STRETCH, NotAStretch)
    seen: dict[int, Path] = {}
    for path in _full_paths_through(graph, stretch, EdgeType.FLOWS_TO, cap):
        for member in path.nodes:
            for station in graph.out_neighbors(member, EdgeType.MONITORED_BY):
                if station not in seen:
                    seen[station] = path
    return list(seen.items())


def q4_stations_same_watershed(graph: Graph, landuse: int) -> list[int]:
    """Stations lying WITHIN any watershed the land-use area lies WITHIN."""
    _require_label(graph, landuse, NodeLabel.LAND_USE, NotLandUse)
    watersheds = graph.out_neighbors(landuse, EdgeType.WITHIN)
    if not watersheds:
        raise NoWatershed(f"land use {landuse} has no WITHIN edge")
    stations: list[int] = []
    seen: set[int] = set()
    for watershed in watersheds:
        for neighbor in graph.in_neighbors(watershed, EdgeType.WITHIN):
            if neighbor in seen:
                continue
            if graph.get_node(neighbor).label is NodeLabel.QUALITY_STATION:
                seen.add(neighbor)
                stations.append(neighbor)
    return stations


@dataclass(frozen=True)
class SeriesPoint:
    timestamp: datetime
    value: float
    below_detection: bool
    depth: Optional[float]


@dataclass
class QualityFilter:
    stations: tuple[str, ...]
    parameters: tuple[str, ...]
    time_from: Optional[datetime] = None
    time_to: Optional[datetime] = None
    depth_min: Optional[float] = None
    depth_max: Optional[float] = None

    def __post_init__(self) -> None:
        self.stations = tuple(self.stations)
        self.parameters = tuple(self.parameters)
        if (self.time_from is not None and self.time_to is not None
                and self.time_from > self.time_to):
            raise ValueError("time_from is after time_to")
        if (self.depth_min is not None and self.depth_max is not None
                and self.depth_min > self.depth_max):
            raise ValueError("depth_min is above depth_max")


@dataclass
class QualitySeries:
    """Filtered measurements keyed by (station domain id, parameter)."""

    series: dict[tuple[str, str], list[SeriesPoint]] = field(
        default_factory=dict)

    def total_points(self) -> int:
        return sum(len(points) for points in self.series.values())


def filter_quality(graph: Graph, flt: QualityFilter) -> QualitySeries:
    result = QualitySeries()
    for station_id in flt.stations:
        station = graph.by_domain_id(NodeLabel.QUALITY_STATION, station_id)
        if station is None:
            raise UnknownStation(f"no station {station_id!r}")
        buckets: dict[str, list[SeriesPoint]] = {
            p: [] for p in flt.parameters}
        for sample_node in graph.out_neighbors(station, EdgeType.COLLECTED):
            sample = sample_from_node(graph.get_node(sample_node).props)
            if flt.time_from is not None and sample.timestamp < flt.time_from:
                continue
            if flt.time_to is not None and sample.timestamp > flt.time_to:
                continue
            if flt.depth_min is not None or flt.depth_max is not None:
                if sample.depth is None:
                    continue
                if flt.depth_min is not None and sample.depth < flt.depth_min:
                    continue
                if flt.depth_max is not None and sample.depth > flt.depth_max:
                    continue
            for parameter in flt.parameters:
                if parameter not in sample.values:
                    continue
                value, below = sample.values[parameter]
                buckets[parameter].append(SeriesPoint(
                    sample.timestamp, value, below, sample.depth))
        for parameter, points in buckets.items():
            points.sort(key=lambda p: (
                p.timestamp, p.depth if p.depth is not None else -1.0))
            result.series[(station_id, parameter)] = points
    return result


def export_quality_csv(series: QualitySeries) -> bytes:
    """Long-format CSV of a filtered series; floats use shortest
    round-tripping text so re-parsing is lossless."""
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["station_id", "timestamp", "parameter", "value",
                     "below_detection", "depth_m"])
    for (station_id, parameter) in sorted(series.series):
        for point in series.series[(station_id, parameter)]:
            writer.writerow([
                station_id,
                format_timestamp(point.timestamp),
                parameter,
                repr(point.value),
                "true" if point.below_detection else "false",
                "" if point.depth is None else repr(point.depth),
            ])
    return buffer.getvalue().encode("utf-8")
