"""Planar vector geometry kernels.

All predicates work directly in lon/lat degrees on a flat plane; the
datasets this package targets cover a small enough extent that projection
error is negligible at watershed scale.  Boundary points count as inside,
with a tolerance of ``BOUNDARY_EPS`` degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

BOUNDARY_EPS = 1e-9


@dataclass(frozen=True)
class Point:
    lon: float
    lat: float

    def __post_init__(self):
        if not (math.isfinite(self.lon) and math.isfinite(self.lat)):
            raise ValueError("point coordinates must be finite")
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"lon {self.lon} outside [-180, 180]")
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"lat {self.lat} outside [-90, 90]")


@dataclass(frozen=True)
class Polyline:
    points: tuple[Point, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("polyline needs at least 2 points")
        for a, b in zip(self.points, self.points[1:]):
            if a == b:
                raise ValueError("consecutive polyline points must be distinct")


@dataclass(frozen=True)
class Polygon:
    """Outer ring plus optional hole rings; rings are closed (first == last)."""

    outer: tuple[Point, ...]
    holes: tuple[tuple[Point, ...], ...] = field(default_factory=tuple)

    def __post_init__(self):
        for ring in (self.outer, *self.holes):
            _check_ring(ring)


@dataclass(frozen=True)
class MultiPolygon:
    parts: tuple[Polygon, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("multipolygon needs at least one part")


def _check_ring(ring: tuple[Point, ...]) -> None:
    if len(ring) < 4:
        raise ValueError("ring needs at least 4 points (closed)")
    if ring[0] != ring[-1]:
        raise ValueError("ring must be closed (first == last)")
    if len({(p.lon, p.lat) for p in ring}) < 3:
        raise ValueError("ring needs at least 3 distinct vertices")


# --- low-level kernels ---

def _point_segment_distance(px: float, py: float,
                            ax: float, ay: float,
                            bx: float, by: float) -> float:
    """Distance from (px,py) to segment (a,b), clamping the projection."""
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / seg2
    t = max(0.0, min(1.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _on_ring_boundary(p: Point, ring: tuple[Point, ...], eps: float) -> bool:
    for a, b in zip(ring, ring[1:]):
        if _point_segment_distance(p.lon, p.lat, a.lon, a.lat, b.lon, b.lat) <= eps:
            return True
    return False


def _inside_ring_strict(p: Point, ring: tuple[Point, ...]) -> bool:
    """Even-odd ray casting; boundary points are handled by the caller."""
    inside = False
    x, y = p.lon, p.lat
    for a, b in zip(ring, ring[1:]):
        ax, ay, bx, by = a.lon, a.lat, b.lon, b.lat
        if (ay > y) != (by > y):
            x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < x_cross:
                inside = not inside
    return inside


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool:
    """True iff open segments ab and cd properly cross (interiors intersect).

    Touching at an endpoint or collinear overlap does not count as a
    crossing; nested rings that share boundary points therefore pass the
    containment test.
    """
    o1 = _orient(a.lon, a.lat, b.lon, b.lat, c.lon, c.lat)
    o2 = _orient(a.lon, a.lat, b.lon, b.lat, d.lon, d.lat)
    o3 = _orient(c.lon, c.lat, d.lon, d.lat, a.lon, a.lat)
    o4 = _orient(c.lon, c.lat, d.lon, d.lat, b.lon, b.lat)
    return (o1 * o2 < 0.0) and (o3 * o4 < 0.0)


# --- public predicates ---

def point_in_polygon(p: Point, poly: Polygon, eps: float = BOUNDARY_EPS) -> bool:
    """True iff p lies in the polygon; boundary points (outer or hole rings)
    count as inside."""
    if _on_ring_boundary(p, poly.outer, eps):
        return True
    if not _inside_ring_strict(p, poly.outer):
        return False
    for hole in poly.holes:
        if _on_ring_boundary(p, hole, eps):
            return True
        if _inside_ring_strict(p, hole):
            return False
    return True


def point_in_multipolygon(p: Point, mp: MultiPolygon, eps: float = BOUNDARY_EPS) -> bool:
    return any(point_in_polygon(p, part, eps) for part in mp.parts)


def polygon_within(a: Polygon, b: Polygon) -> bool:
    """True iff a's outer ring is contained in b.

    The test is vertex containment plus the absence of proper edge
    crossings with any of b's rings; it is exact for the nested-watershed
    layouts this package deals with, and deliberately not a general
    boolean-operation replacement.
    """
    for v in a.outer:
        if not point_in_polygon(v, b):
            return False
    edges_a = list(zip(a.outer, a.outer[1:]))
    for ring in (b.outer, *b.holes):
        for c, d in zip(ring, ring[1:]):
            for pa, pb in edges_a:
                if segments_cross(pa, pb, c, d):
                    return False
    return True


def point_polyline_distance(p: Point, line: Polyline) -> float:
    """Minimum planar distance (degrees) from p to the polyline."""
    return min(
        _point_segment_distance(p.lon, p.lat, a.lon, a.lat, b.lon, b.lat)
        for a, b in zip(line.points, line.points[1:])
    )


def snap_point_to_polyline(p: Point, line: Polyline,
                           tol: float) -> Optional[tuple[int, float]]:
    """Nearest segment of the polyline within tol, or None.

    Ties between equidistant segments resolve to the lowest segment index.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    best: Optional[tuple[int, float]] = None
    for i, (a, b) in enumerate(zip(line.points, line.points[1:])):
        d = _point_segment_distance(p.lon, p.lat, a.lon, a.lat, b.lon, b.lat)
        if best is None or d < best[1]:
            best = (i, d)
    if best is not None and best[1] <= tol:
        return best
    return None


def geometry_within(inner: "Polygon | MultiPolygon",
                    outer: "Polygon | MultiPolygon") -> bool:
    """Polygon containment extended over MultiPolygon on either side.

    A MultiPolygon is inside when every part is inside; a MultiPolygon
    container holds a polygon when any single part holds it (parts are
    assumed disjoint).
    """
    if isinstance(inner, MultiPolygon):
        return all(geometry_within(part, outer) for part in inner.parts)
    if isinstance(outer, MultiPolygon):
        return any(polygon_within(inner, part) for part in outer.parts)
    return polygon_within(inner, outer)


def representative_point(geom: "Geometry") -> Point:
    """A deterministic anchor point: first vertex for extended geometries."""
    if isinstance(geom, Point):
        return geom
    if isinstance(geom, Polyline):
        return geom.points[0]
    if isinstance(geom, Polygon):
        return geom.outer[0]
    if isinstance(geom, MultiPolygon):
        return geom.parts[0].outer[0]
    raise TypeError(f"not a geometry: {geom!r}")


# --- GeoJSON-style (de)serialization ---

Geometry = Point | Polyline | Polygon | MultiPolygon


def _ring_coords(ring: tuple[Point, ...]) -> list[list[float]]:
    return [[p.lon, p.lat] for p in ring]


def geometry_to_geojson(geom: Geometry) -> dict:
    if isinstance(geom, Point):
        return {"type": "Point", "coordinates": [geom.lon, geom.lat]}
    if isinstance(geom, Polyline):
        return {"type": "LineString",
                "coordinates": [[p.lon, p.lat] for p in geom.points]}
    if isinstance(geom, Polygon):
        return {"type": "Polygon",
                "coordinates": [_ring_coords(geom.outer)]
                + [_ring_coords(h) for h in geom.holes]}
    if isinstance(geom, MultiPolygon):
        return {"type": "MultiPolygon",
                "coordinates": [[_ring_coords(part.outer)]
                                + [_ring_coords(h) for h in part.holes]
                                for part in geom.parts]}
    raise TypeError(f"not a geometry: {geom!r}")


def _coords_ring(coords) -> tuple[Point, ...]:
    return tuple(Point(float(c[0]), float(c[1])) for c in coords)


def geometry_from_geojson(obj: dict) -> Geometry:
    """Parse the supported GeoJSON geometry subset; raises ValueError on
    anything else (including GeometryCollection)."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError("not a GeoJSON geometry object")
    gtype = obj.get("type")
    coords = obj.get("coordinates")
    if gtype == "Point":
        return Point(float(coords[0]), float(coords[1]))
    if gtype == "LineString":
        return Polyline(tuple(Point(float(c[0]), float(c[1])) for c in coords))
    if gtype == "Polygon":
        rings = [_coords_ring(r) for r in coords]
        if not rings:
            raise ValueError("polygon without rings")
        return Polygon(rings[0], tuple(rings[1:]))
    if gtype == "MultiPolygon":
        parts = []
        for poly_coords in coords:
            rings = [_coords_ring(r) for r in poly_coords]
            if not rings:
                raise ValueError("polygon without rings")
            parts.append(Polygon(rings[0], tuple(rings[1:])))
        return MultiPolygon(tuple(parts))
    raise ValueError(f"unsupported geometry type: {gtype}")
