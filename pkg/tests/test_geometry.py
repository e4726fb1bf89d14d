import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hydrograph.geometry import (
    BOUNDARY_EPS,
    Point,
    Polygon,
    Polyline,
    MultiPolygon,
    geometry_from_geojson,
    geometry_to_geojson,
    point_in_multipolygon,
    point_in_polygon,
    point_polyline_distance,
    polygon_within,
    segments_cross,
    snap_point_to_polyline,
)


def ring(*coords):
    pts = [Point(x, y) for x, y in coords]
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    return tuple(pts)


UNIT_SQUARE = Polygon(ring((0, 0), (1, 0), (1, 1), (0, 1)))

# Square with a centered square hole from 0.25 to 0.75.
DONUT = Polygon(
    ring((0, 0), (1, 0), (1, 1), (0, 1)),
    (ring((0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)),),
)


def winding_number_inside(p: Point, poly: Polygon) -> bool:
    """Independent containment oracle: nonzero winding number.

    For simple rings even-odd and nonzero agree away from the boundary, so
    this cross-checks the even-odd implementation without sharing code.
    """

    def wn(ring_pts):
        total = 0.0
        for a, b in zip(ring_pts, ring_pts[1:]):
            ax, ay = a.lon - p.lon, a.lat - p.lat
            bx, by = b.lon - p.lon, b.lat - p.lat
            total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
        return abs(total) > math.pi  # ~2*pi inside, ~0 outside

    if not wn(poly.outer):
        return False
    return not any(wn(h) for h in poly.holes)


class TestPointValidation:
    def test_rejects_out_of_range_longitude(self):
        with pytest.raises(ValueError):
            Point(181.0, 0.0)

    def test_rejects_out_of_range_latitude(self):
        with pytest.raises(ValueError):
            Point(0.0, -91.0)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Point(float("nan"), 0.0)

    def test_polyline_needs_two_points(self):
        with pytest.raises(ValueError):
            Polyline((Point(0, 0),))

    def test_polyline_rejects_repeated_consecutive_points(self):
        with pytest.raises(ValueError):
            Polyline((Point(0, 0), Point(0, 0), Point(1, 1)))

    def test_ring_must_close(self):
        with pytest.raises(ValueError):
            Polygon((Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)))

    def test_ring_needs_three_distinct_vertices(self):
        with pytest.raises(ValueError):
            Polygon(ring((0, 0), (1, 0), (0, 0), (1, 0)))


class TestPointInPolygon:
    def test_interior(self):
        assert point_in_polygon(Point(0.5, 0.5), UNIT_SQUARE)

    def test_exterior(self):
        assert not point_in_polygon(Point(1.5, 0.5), UNIT_SQUARE)

    def test_edge_counts_inside(self):
        assert point_in_polygon(Point(1.0, 0.5), UNIT_SQUARE)

    def test_vertex_counts_inside(self):
        assert point_in_polygon(Point(0.0, 0.0), UNIT_SQUARE)

    def test_just_outside_edge_by_more_than_eps(self):
        assert not point_in_polygon(Point(1.0 + 1e-6, 0.5), UNIT_SQUARE)

    def test_within_eps_of_edge_counts_inside(self):
        assert point_in_polygon(Point(1.0 + BOUNDARY_EPS / 2, 0.5), UNIT_SQUARE)

    def test_hole_excluded(self):
        assert not point_in_polygon(Point(0.5, 0.5), DONUT)

    def test_hole_boundary_counts_inside(self):
        assert point_in_polygon(Point(0.25, 0.5), DONUT)

    def test_between_hole_and_outer(self):
        assert point_in_polygon(Point(0.1, 0.5), DONUT)

    def test_ray_through_vertex_is_not_double_counted(self):
        # A diamond: a horizontal ray from inside passes exactly through the
        # east vertex; naive crossing counts break here.
        diamond = Polygon(ring((0, -1), (1, 0), (0, 1), (-1, 0)))
        assert point_in_polygon(Point(0.0, 0.0), diamond)
        assert not point_in_polygon(Point(2.0, 0.0), diamond)

    def test_multipolygon_any_part(self):
        other = Polygon(ring((2, 0), (3, 0), (3, 1), (2, 1)))
        mp = MultiPolygon((UNIT_SQUARE, other))
        assert point_in_multipolygon(Point(2.5, 0.5), mp)
        assert point_in_multipolygon(Point(0.5, 0.5), mp)
        assert not point_in_multipolygon(Point(1.5, 0.5), mp)

    @given(
        lon=st.floats(-0.5, 1.5, allow_nan=False),
        lat=st.floats(-0.5, 1.5, allow_nan=False),
    )
    @settings(max_examples=300)
    def test_matches_winding_number_oracle_away_from_boundary(self, lon, lat):
        p = Point(lon, lat)
        near_boundary = (
            min(abs(lon), abs(lon - 1)) < 1e-7
            or min(abs(lat), abs(lat - 1)) < 1e-7
        )
        if near_boundary:
            return
        assert point_in_polygon(p, UNIT_SQUARE) == winding_number_inside(
            p, UNIT_SQUARE)

    @given(
        lon=st.floats(-0.2, 1.2, allow_nan=False),
        lat=st.floats(-0.2, 1.2, allow_nan=False),
    )
    @settings(max_examples=300)
    def test_donut_matches_oracle_away_from_boundary(self, lon, lat):
        p = Point(lon, lat)
        for edge in (0.0, 0.25, 0.75, 1.0):
            if abs(lon - edge) < 1e-7 or abs(lat - edge) < 1e-7:
                return
        assert point_in_polygon(p, DONUT) == winding_number_inside(p, DONUT)


class TestSegmentsCross:
    def test_proper_crossing(self):
        assert segments_cross(Point(0, 0), Point(1, 1), Point(0, 1), Point(1, 0))

    def test_shared_endpoint_is_not_a_crossing(self):
        assert not segments_cross(Point(0, 0), Point(1, 1),
                                  Point(1, 1), Point(2, 0))

    def test_touching_midpoint_is_not_a_crossing(self):
        assert not segments_cross(Point(0, 0), Point(2, 0),
                                  Point(1, 0), Point(1, 1))

    def test_collinear_overlap_is_not_a_crossing(self):
        assert not segments_cross(Point(0, 0), Point(2, 0),
                                  Point(1, 0), Point(3, 0))

    def test_disjoint(self):
        assert not segments_cross(Point(0, 0), Point(1, 0),
                                  Point(0, 1), Point(1, 1))


class TestPolygonWithin:
    def test_strictly_nested(self):
        inner = Polygon(ring((0.2, 0.2), (0.8, 0.2), (0.8, 0.8), (0.2, 0.8)))
        assert polygon_within(inner, UNIT_SQUARE)
        assert not polygon_within(UNIT_SQUARE, inner)

    def test_self_containment(self):
        assert polygon_within(UNIT_SQUARE, UNIT_SQUARE)

    def test_shared_edge_still_within(self):
        inner = Polygon(ring((0.0, 0.0), (0.5, 0.0), (0.5, 0.5), (0.0, 0.5)))
        assert polygon_within(inner, UNIT_SQUARE)

    def test_partial_overlap_not_within(self):
        shifted = Polygon(ring((0.5, 0.5), (1.5, 0.5), (1.5, 1.5), (0.5, 1.5)))
        assert not polygon_within(shifted, UNIT_SQUARE)

    def test_disjoint_not_within(self):
        far = Polygon(ring((5, 5), (6, 5), (6, 6), (5, 6)))
        assert not polygon_within(far, UNIT_SQUARE)

    def test_inside_hole_not_within(self):
        in_hole = Polygon(ring((0.4, 0.4), (0.6, 0.4), (0.6, 0.6), (0.4, 0.6)))
        assert not polygon_within(in_hole, DONUT)

    def test_straddling_hole_edge_not_within(self):
        straddler = Polygon(ring((0.1, 0.4), (0.5, 0.4), (0.5, 0.6), (0.1, 0.6)))
        assert not polygon_within(straddler, DONUT)


class TestPolylineDistance:
    def test_distance_to_interior_of_segment(self):
        line = Polyline((Point(0, 0), Point(2, 0)))
        assert point_polyline_distance(Point(1, 1), line) == pytest.approx(1.0)

    def test_distance_clamps_to_endpoint(self):
        line = Polyline((Point(0, 0), Point(1, 0)))
        d = point_polyline_distance(Point(2, 1), line)
        assert d == pytest.approx(math.sqrt(2))

    def test_zero_on_the_line(self):
        line = Polyline((Point(0, 0), Point(2, 2)))
        assert point_polyline_distance(Point(1, 1), line) == pytest.approx(0.0)

    def test_picks_nearest_segment(self):
        line = Polyline((Point(0, 0), Point(1, 0), Point(1, 5)))
        assert point_polyline_distance(Point(1.5, 4), line) == pytest.approx(0.5)

    @given(
        lon=st.floats(-5, 5, allow_nan=False),
        lat=st.floats(-5, 5, allow_nan=False),
    )
    @settings(max_examples=200)
    def test_distance_never_exceeds_nearest_vertex(self, lon, lat):
        line = Polyline((Point(0, 0), Point(1, 0.5), Point(2, 0), Point(3, 2)))
        p = Point(lon, lat)
        d = point_polyline_distance(p, line)
        best_vertex = min(
            math.hypot(p.lon - v.lon, p.lat - v.lat) for v in line.points)
        assert d <= best_vertex + 1e-12


class TestSnapToPolyline:
    LINE = Polyline((Point(0, 0), Point(1, 0), Point(2, 0)))

    def test_snaps_within_tolerance(self):
        hit = snap_point_to_polyline(Point(0.5, 0.001), self.LINE, tol=0.01)
        assert hit == (0, pytest.approx(0.001))

    def test_none_outside_tolerance(self):
        assert snap_point_to_polyline(Point(0.5, 0.5), self.LINE, tol=0.01) is None

    def test_tie_prefers_lowest_segment_index(self):
        # Shared vertex at (1, 0) is equidistant from both segments.
        hit = snap_point_to_polyline(Point(1.0, 0.002), self.LINE, tol=0.01)
        assert hit is not None and hit[0] == 0

    def test_rejects_nonpositive_tolerance(self):
        with pytest.raises(ValueError):
            snap_point_to_polyline(Point(0, 0), self.LINE, tol=0.0)


class TestGeoJsonRoundTrip:
    @pytest.mark.parametrize("geom", [
        Point(-7.5, 38.2),
        Polyline((Point(0, 0), Point(1, 1), Point(2, 0))),
        UNIT_SQUARE,
        DONUT,
        MultiPolygon((UNIT_SQUARE,
                      Polygon(ring((2, 0), (3, 0), (3, 1), (2, 1))))),
    ])
    def test_round_trip(self, geom):
        assert geometry_from_geojson(geometry_to_geojson(geom)) == geom

    def test_rejects_unknown_type(self):
        with pytest.raises(ValueError):
            geometry_from_geojson({"type": "GeometryCollection",
                                   "geometries": []})

    def test_rejects_non_object(self):
        with pytest.raises(ValueError):
            geometry_from_geojson("Point")
