"""Labeled-property graph with a fixed schema and snapshot persistence.

The graph is directed.  Nodes carry one label out of a closed set, edges one
type out of a closed set, and every edge type constrains which (source label,
destination label) pairs it may connect.  Properties are flat maps from string
keys to scalars, timestamps, or geometry values.  All mutation goes through a
readers-writer lock so the store can back a threaded HTTP service.
"""
from __future__ import annotations

import json
import os
import threading
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from math import isfinite
from typing import Callable, Iterator, Optional, Union

from .errors import (
    BadPropertyValue,
    CorruptSnapshot,
    DuplicateDomainId,
    DuplicateEdge,
    SchemaViolation,
    SelfLoop,
    UnknownNode,
)
from .geometry import (
    Geometry,
    MultiPolygon,
    Point,
    Polygon,
    Polyline,
    geometry_from_geojson,
    geometry_to_geojson,
)

SNAPSHOT_SCHEMA = "efma-1"
SNAPSHOT_VERSION = 1


class NodeLabel(str, Enum):
    WATER_SYSTEM = "WaterSystem"
    WATER_NODE = "WaterNode"
    QUALITY_STATION = "QualityStation"
    QUALITY_DATA = "QualityData"
    WATER_STRETCH = "WaterStretch"
    WATERSHED = "Watershed"
    LAND_USE = "LandUse"
    GEOMETRY = "Geometry"
    DEM = "DEM"


class EdgeType(str, Enum):
    CONNECTED = "CONNECTED"
    MONITORED_BY = "MONITORED_BY"
    STATION_OF = "STATION_OF"
    COLLECTED = "COLLECTED"
    FLOWS_TO = "FLOWS_TO"
    WITHIN = "WITHIN"
    HAS_LANDUSE = "HAS_LANDUSE"
    HAS_WATERSHED = "HAS_WATERSHED"
    HAS_GEOMETRY = "HAS_GEOMETRY"
    REPRESENTED = "REPRESENTED"
    PART_OF = "PART_OF"


# Allowed (source label, destination label) pairs per edge type.
SCHEMA: dict[EdgeType, frozenset[tuple[NodeLabel, NodeLabel]]] = {
    EdgeType.CONNECTED: frozenset({
        (NodeLabel.WATER_NODE, NodeLabel.WATER_NODE),
    }),
    EdgeType.MONITORED_BY: frozenset({
        (NodeLabel.WATER_STRETCH, NodeLabel.QUALITY_STATION),
        (NodeLabel.WATER_NODE, NodeLabel.QUALITY_STATION),
    }),
    EdgeType.STATION_OF: frozenset({
        (NodeLabel.QUALITY_STATION, NodeLabel.WATER_SYSTEM),
    }),
    EdgeType.COLLECTED: frozenset({
        (NodeLabel.QUALITY_STATION, NodeLabel.QUALITY_DATA),
    }),
    EdgeType.FLOWS_TO: frozenset({
        (NodeLabel.WATER_STRETCH, NodeLabel.WATER_STRETCH),
    }),
    EdgeType.WITHIN: frozenset({
        (NodeLabel.QUALITY_STATION, NodeLabel.WATERSHED),
        (NodeLabel.WATER_NODE, NodeLabel.WATERSHED),
        (NodeLabel.WATER_STRETCH, NodeLabel.WATERSHED),
        (NodeLabel.LAND_USE, NodeLabel.WATERSHED),
    }),
    EdgeType.HAS_LANDUSE: frozenset({
        (NodeLabel.WATER_SYSTEM, NodeLabel.LAND_USE),
    }),
    EdgeType.HAS_WATERSHED: frozenset({
        (NodeLabel.WATER_SYSTEM, NodeLabel.WATERSHED),
    }),
    EdgeType.HAS_GEOMETRY: frozenset({
        (NodeLabel.WATER_SYSTEM, NodeLabel.GEOMETRY),
    }),
    EdgeType.REPRESENTED: frozenset({
        (NodeLabel.WATER_NODE, NodeLabel.GEOMETRY),
    }),
    EdgeType.PART_OF: frozenset({
        (NodeLabel.WATERSHED, NodeLabel.WATERSHED),
    }),
}

PropValue = Union[str, int, float, bool, datetime, Point, Polyline, Polygon,
                  MultiPolygon]
Props = dict[str, PropValue]

_GEOMETRY_TYPES = (Point, Polyline, Polygon, MultiPolygon)


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 text to an aware UTC datetime, truncated to whole seconds."""
    t = text.strip()
    if t.endswith(("Z", "z")):
        t = t[:-1] + "+00:00"
    dt = datetime.fromisoformat(t)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _normalize_value(key: str, value: PropValue) -> PropValue:
    # bool first: it is an int subclass and must not fall through.
    if isinstance(value, bool):
        return value
    if isinstance(value, str) or isinstance(value, int):
        return value
    if isinstance(value, float):
        if not isfinite(value):
            raise BadPropertyValue(f"property {key!r}: non-finite float")
        return value
    if isinstance(value, datetime):
        if value.tzinfo is None:
            raise BadPropertyValue(f"property {key!r}: naive datetime")
        return value.astimezone(timezone.utc).replace(microsecond=0)
    if isinstance(value, _GEOMETRY_TYPES):
        return value
    raise BadPropertyValue(
        f"property {key!r}: unsupported type {type(value).__name__}")


def validate_props(props: Optional[Props]) -> Props:
    if props is None:
        return {}
    out: Props = {}
    for key, value in props.items():
        if not isinstance(key, str) or not key:
            raise BadPropertyValue(f"bad property key: {key!r}")
        out[key] = _normalize_value(key, value)
    return out


@dataclass
class Node:
    id: int
    label: NodeLabel
    props: Props = field(default_factory=dict)


@dataclass
class Edge:
    id: int
    type: EdgeType
    src: int
    dst: int
    props: Props = field(default_factory=dict)


class RWLock:
    """Reentrant readers-writer lock with writer preference.

    A thread holding the write lock may take nested read or write sections.
    A thread holding only a read lock cannot upgrade to write (raises), since
    two upgraders would deadlock each other.
    """

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._read_depth: dict[int, int] = defaultdict(int)
        self._writer: Optional[int] = None
        self._write_depth = 0
        self._writers_waiting = 0

    @contextmanager
    def read(self) -> Iterator[None]:
        me = threading.get_ident()
        with self._cond:
            if self._writer == me:
                held_as_writer = True
            else:
                held_as_writer = False
                if self._read_depth[me] == 0:
                    while self._writer is not None or self._writers_waiting:
                        self._cond.wait()
                    self._readers += 1
                self._read_depth[me] += 1
        try:
            yield
        finally:
            if not held_as_writer:
                with self._cond:
                    self._read_depth[me] -= 1
                    if self._read_depth[me] == 0:
                        del self._read_depth[me]
                        self._readers -= 1
                        if self._readers == 0:
                            self._cond.notify_all()

    @contextmanager
    def write(self) -> Iterator[None]:
        me = threading.get_ident()
        with self._cond:
            if self._writer == me:
                self._write_depth += 1
            else:
                if self._read_depth[me] > 0:
                    raise RuntimeError("cannot upgrade read lock to write")
                self._writers_waiting += 1
                try:
                    while self._writer is not None or self._readers > 0:
                        self._cond.wait()
                finally:
                    self._writers_waiting -= 1
                self._writer = me
                self._write_depth = 1
        try:
            yield
        finally:
            with self._cond:
                self._write_depth -= 1
                if self._write_depth == 0:
                    self._writer = None
                    self._cond.notify_all()


def _values_equal(a: PropValue, b: PropValue) -> bool:
    # bool == int and int == float in Python; queries should not conflate.
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return a == b


class Graph:
    """In-memory property graph.  All public methods are thread safe."""

    def __init__(self) -> None:
        self.lock = RWLock()
        self._nodes: dict[int, Node] = {}
        self._edges: dict[int, Edge] = {}
        self._next_node_id = 1
        self._next_edge_id = 1
        self._by_label: dict[NodeLabel, dict[int, None]] = {
            label: {} for label in NodeLabel}
        self._domain: dict[tuple[NodeLabel, PropValue], int] = {}
        self._out: dict[int, dict[EdgeType, list[int]]] = {}
        self._in: dict[int, dict[EdgeType, list[int]]] = {}
        self._pairs: dict[tuple[EdgeType, int, int], int] = {}

    # --- mutation ---

    def create_node(self, label: NodeLabel, props: Optional[Props] = None) -> int:
        props = validate_props(props)
        with self.lock.write():
            domain_key = None
            if "id" in props:
                domain_key = (label, props["id"])
                if domain_key in self._domain:
                    raise DuplicateDomainId(
                        f"{label.value} with id={props['id']!r} already exists")
            node_id = self._next_node_id
            self._next_node_id += 1
            self._nodes[node_id] = Node(node_id, label, props)
            self._by_label[label][node_id] = None
            self._out[node_id] = {}
            self._in[node_id] = {}
            if domain_key is not None:
                self._domain[domain_key] = node_id
            return node_id

    def create_edge(self, etype: EdgeType, src: int, dst: int,
                    props: Optional[Props] = None) -> int:
        props = validate_props(props)
        with self.lock.write():
            if src not in self._nodes:
                raise UnknownNode(f"no node {src}")
            if dst not in self._nodes:
                raise UnknownNode(f"no node {dst}")
            if src == dst:
                raise SelfLoop(f"self loop on node {src}")
            pair = (self._nodes[src].label, self._nodes[dst].label)
            if pair not in SCHEMA[etype]:
                raise SchemaViolation(
                    f"{etype.value} cannot connect {pair[0].value} "
                    f"to {pair[1].value}")
            pair_key = (etype, src, dst)
            if pair_key in self._pairs:
                raise DuplicateEdge(
                    f"{etype.value} edge {src}->{dst} already exists")
            edge_id = self._next_edge_id
            self._next_edge_id += 1
            self._edges[edge_id] = Edge(edge_id, etype, src, dst, props)
            self._out[src].setdefault(etype, []).append(edge_id)
            self._in[dst].setdefault(etype, []).append(edge_id)
            self._pairs[pair_key] = edge_id
            return edge_id

    def delete_node(self, node_id: int) -> int:
        """Remove a node and every incident edge; returns removed edge count."""
        with self.lock.write():
            node = self._nodes.get(node_id)
            if node is None:
                raise UnknownNode(f"no node {node_id}")
            doomed: list[int] = []
            for edges_by_type in (self._out[node_id], self._in[node_id]):
                for edge_ids in edges_by_type.values():
                    doomed.extend(edge_ids)
            for edge_id in dict.fromkeys(doomed):
                self._drop_edge(edge_id)
            del self._out[node_id]
            del self._in[node_id]
            del self._by_label[node.label][node_id]
            if "id" in node.props:
                self._domain.pop((node.label, node.props["id"]), None)
            del self._nodes[node_id]
            return len(set(doomed))

    def delete_edge(self, edge_id: int) -> None:
        with self.lock.write():
            if edge_id not in self._edges:
                raise UnknownNode(f"no edge {edge_id}")
            self._drop_edge(edge_id)

    def _drop_edge(self, edge_id: int) -> None:
        edge = self._edges.pop(edge_id)
        self._out[edge.src][edge.type].remove(edge_id)
        if not self._out[edge.src][edge.type]:
            del self._out[edge.src][edge.type]
        self._in[edge.dst][edge.type].remove(edge_id)
        if not self._in[edge.dst][edge.type]:
            del self._in[edge.dst][edge.type]
        del self._pairs[(edge.type, edge.src, edge.dst)]

    def set_props(self, node_id: int, props: Props) -> None:
        """Merge new property values into a node.  The "id" key is frozen."""
        props = validate_props(props)
        with self.lock.write():
            node = self._nodes.get(node_id)
            if node is None:
                raise UnknownNode(f"no node {node_id}")
            if "id" in props and props["id"] != node.props.get("id"):
                raise BadPropertyValue("domain id of a node cannot change")
            node.props.update(props)

    # --- reads ---

    def get_node(self, node_id: int) -> Node:
        with self.lock.read():
            node = self._nodes.get(node_id)
            if node is None:
                raise UnknownNode(f"no node {node_id}")
            return node

    def has_node(self, node_id: int) -> bool:
        with self.lock.read():
            return node_id in self._nodes

    def get_edge(self, edge_id: int) -> Edge:
        with self.lock.read():
            edge = self._edges.get(edge_id)
            if edge is None:
                raise UnknownNode(f"no edge {edge_id}")
            return edge

    def node_count(self) -> int:
        with self.lock.read():
            return len(self._nodes)

    def edge_count(self) -> int:
        with self.lock.read():
            return len(self._edges)

    def count_label(self, label: NodeLabel) -> int:
        with self.lock.read():
            return len(self._by_label[label])

    def count_type(self, etype: EdgeType) -> int:
        with self.lock.read():
            return sum(1 for e in self._edges.values() if e.type is etype)

    def label_counts(self) -> dict[str, int]:
        with self.lock.read():
            return {label.value: len(ids)
                    for label, ids in self._by_label.items() if ids}

    def type_counts(self) -> dict[str, int]:
        with self.lock.read():
            counts: dict[str, int] = {}
            for edge in self._edges.values():
                counts[edge.type.value] = counts.get(edge.type.value, 0) + 1
            return counts

    def nodes_with_label(self, label: NodeLabel) -> list[int]:
        with self.lock.read():
            return list(self._by_label[label])

    def iter_nodes(self) -> list[Node]:
        with self.lock.read():
            return list(self._nodes.values())

    def iter_edges(self) -> list[Edge]:
        with self.lock.read():
            return list(self._edges.values())

    def by_domain_id(self, label: NodeLabel, domain_id: PropValue) -> Optional[int]:
        with self.lock.read():
            return self._domain.get((label, domain_id))

    def find_nodes(self, label: NodeLabel,
                   props: Optional[Props] = None,
                   where: Optional[Callable[[Node], bool]] = None) -> list[int]:
        """Nodes of a label whose properties match, in insertion order."""
        with self.lock.read():
            if props and "id" in props and len(props) == 1 and where is None:
                node_id = self._domain.get((label, props["id"]))
                return [node_id] if node_id is not None else []
            out = []
            for node_id in self._by_label[label]:
                node = self._nodes[node_id]
                if props and not all(
                        k in node.props and _values_equal(node.props[k], v)
                        for k, v in props.items()):
                    continue
                if where is not None and not where(node):
                    continue
                out.append(node_id)
            return out

    def neighbors(self, node_id: int, etype: Optional[EdgeType] = None,
                  direction: str = "out") -> list[tuple[int, int]]:
        """(edge id, other node id) pairs in edge insertion order.

        direction is "out", "in", or "both"; "both" lists out edges first.
        """
        if direction not in ("out", "in", "both"):
            raise ValueError(f"bad direction {direction!r}")
        with self.lock.read():
            if node_id not in self._nodes:
                raise UnknownNode(f"no node {node_id}")
            result: list[tuple[int, int]] = []
            if direction in ("out", "both"):
                adj = self._out[node_id]
                types = [etype] if etype is not None else list(adj)
                for t in types:
                    for edge_id in adj.get(t, ()):
                        result.append((edge_id, self._edges[edge_id].dst))
            if direction in ("in", "both"):
                adj = self._in[node_id]
                types = [etype] if etype is not None else list(adj)
                for t in types:
                    for edge_id in adj.get(t, ()):
                        result.append((edge_id, self._edges[edge_id].src))
            return result

    def out_neighbors(self, node_id: int, etype: EdgeType) -> list[int]:
        return [n for _, n in self.neighbors(node_id, etype, "out")]

    def in_neighbors(self, node_id: int, etype: EdgeType) -> list[int]:
        return [n for _, n in self.neighbors(node_id, etype, "in")]

    # --- snapshots ---

    def snapshot_save(self, path: str) -> None:
        """Write the graph as line-delimited JSON; atomic via rename."""
        tmp = f"{path}.tmp.{os.getpid()}"
        with self.lock.read():
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                header = {"kind": "header", "version": SNAPSHOT_VERSION,
                          "schema": SNAPSHOT_SCHEMA}
                fh.write(json.dumps(header, sort_keys=True) + "\n")
                for node in self._nodes.values():
                    rec = {"kind": "node", "id": node.id,
                           "label": node.label.value,
                           "props": _encode_props(node.props)}
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
                for edge in self._edges.values():
                    rec = {"kind": "edge", "id": edge.id,
                           "type": edge.type.value,
                           "src": edge.src, "dst": edge.dst,
                           "props": _encode_props(edge.props)}
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
        os.replace(tmp, path)

    @classmethod
    def snapshot_load(cls, path: str) -> "Graph":
        graph = cls()
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline()
            header = _parse_snapshot_line(first, 1)
            if (header.get("kind") != "header"
                    or header.get("version") != SNAPSHOT_VERSION
                    or header.get("schema") != SNAPSHOT_SCHEMA):
                raise CorruptSnapshot(f"bad snapshot header: {first.strip()!r}")
            seen_edge = False
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    raise CorruptSnapshot(f"line {lineno}: blank line")
                rec = _parse_snapshot_line(line, lineno)
                kind = rec.get("kind")
                if kind == "node":
                    if seen_edge:
                        raise CorruptSnapshot(
                            f"line {lineno}: node record after edges")
                    graph._load_node(rec, lineno)
                elif kind == "edge":
                    seen_edge = True
                    graph._load_edge(rec, lineno)
                else:
                    raise CorruptSnapshot(
                        f"line {lineno}: unknown record kind {kind!r}")
        return graph

    def _load_node(self, rec: dict, lineno: int) -> None:
        try:
            node_id = rec["id"]
            label = NodeLabel(rec["label"])
            props = validate_props(_decode_props(rec.get("props", {})))
        except (KeyError, ValueError, TypeError, BadPropertyValue) as exc:
            raise CorruptSnapshot(f"line {lineno}: bad node record: {exc}")
        if not isinstance(node_id, int) or node_id in self._nodes:
            raise CorruptSnapshot(f"line {lineno}: bad or duplicate node id")
        domain_key = None
        if "id" in props:
            domain_key = (label, props["id"])
            if domain_key in self._domain:
                raise CorruptSnapshot(
                    f"line {lineno}: duplicate {label.value} "
                    f"domain id {props['id']!r}")
        self._nodes[node_id] = Node(node_id, label, props)
        self._by_label[label][node_id] = None
        self._out[node_id] = {}
        self._in[node_id] = {}
        if domain_key is not None:
            self._domain[domain_key] = node_id
        self._next_node_id = max(self._next_node_id, node_id + 1)

    def _load_edge(self, rec: dict, lineno: int) -> None:
        try:
            edge_id = rec["id"]
            etype = EdgeType(rec["type"])
            src, dst = rec["src"], rec["dst"]
            props = validate_props(_decode_props(rec.get("props", {})))
        except (KeyError, ValueError, TypeError, BadPropertyValue) as exc:
            raise CorruptSnapshot(f"line {lineno}: bad edge record: {exc}")
        if not isinstance(edge_id, int) or edge_id in self._edges:
            raise CorruptSnapshot(f"line {lineno}: bad or duplicate edge id")
        if src not in self._nodes or dst not in self._nodes:
            raise CorruptSnapshot(f"line {lineno}: edge endpoint missing")
        if src == dst:
            raise CorruptSnapshot(f"line {lineno}: self loop")
        pair = (self._nodes[src].label, self._nodes[dst].label)
        if pair not in SCHEMA[etype]:
            raise CorruptSnapshot(
                f"line {lineno}: {etype.value} cannot connect "
                f"{pair[0].value} to {pair[1].value}")
        pair_key = (etype, src, dst)
        if pair_key in self._pairs:
            raise CorruptSnapshot(f"line {lineno}: duplicate edge")
        self._edges[edge_id] = Edge(edge_id, etype, src, dst, props)
        self._out[src].setdefault(etype, []).append(edge_id)
        self._in[dst].setdefault(etype, []).append(edge_id)
        self._pairs[pair_key] = edge_id
        self._next_edge_id = max(self._next_edge_id, edge_id + 1)


def _parse_snapshot_line(line: str, lineno: int) -> dict:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptSnapshot(f"line {lineno}: not valid JSON: {exc}")
    if not isinstance(rec, dict):
        raise CorruptSnapshot(f"line {lineno}: record is not an object")
    return rec


def _encode_props(props: Props) -> dict:
    out = {}
    for key, value in props.items():
        if isinstance(value, datetime):
            out[key] = {"$ts": format_timestamp(value)}
        elif isinstance(value, _GEOMETRY_TYPES):
            out[key] = {"$geom": geometry_to_geojson(value)}
        else:
            out[key] = value
    return out


def _decode_props(raw: dict) -> Props:
    if not isinstance(raw, dict):
        raise BadPropertyValue("props must be an object")
    out: Props = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            if "$ts" in value:
                out[key] = parse_timestamp(value["$ts"])
            elif "$geom" in value:
                try:
                    out[key] = geometry_from_geojson(value["$geom"])
                except (ValueError, TypeError, IndexError) as exc:
                    raise BadPropertyValue(f"property {key!r}: {exc}")
            else:
                raise BadPropertyValue(f"property {key!r}: unknown wrapper")
        else:
            out[key] = value
    return out
