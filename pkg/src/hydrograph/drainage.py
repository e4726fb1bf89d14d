"""DEM hydrology: depression filling, D8 routing, accumulation, streams.

The chain is the classic one: condition the elevation grid by priority-flood
filling, assign each cell a single downstream neighbor (D8, steepest descent,
fixed tie order), count upstream cells, then cut the high-accumulation cells
into WaterStretch nodes joined by FLOWS_TO edges.  Station snapping and
watershed containment close the loop between raster and vector worlds.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from typing import Optional

import numpy as np

from .errors import AllNodata, CycleDetected, DuplicateEdge, OutOfBounds, UnknownNode
from .geometry import Point, Polygon, Polyline, point_polyline_distance, representative_point
from .grids import (
    DIR_OFFSETS,
    NODATA_DIR,
    OUTLET,
    TIE_ORDER,
    AccumGrid,
    DemGrid,
    FlowDirGrid,
)
from .ingest import (
    IngestReport,
    ensure_system,
    innermost_watersheds,
    load_dem_node,
)
from .store import EdgeType, Graph, NodeLabel

_SQRT2 = math.sqrt(2.0)
_DIST = {code: (_SQRT2 if dr and dc else 1.0)
         for code, (dr, dc) in DIR_OFFSETS.items()}
_ALL_OFFSETS = tuple(DIR_OFFSETS.values())

CellIndex = tuple[int, int]


def fill_depressions(dem: DemGrid) -> DemGrid:
    """Priority-flood fill: raise every pit exactly to its spill level.

    Cells on the grid border or beside nodata are treated as drainage exits
    and seed the flood at their own elevation, so they never change.
    """
    nrows, ncols = dem.nrows, dem.ncols
    nodata = dem.nodata_mask()
    if nodata.all():
        raise AllNodata("grid has no valid cells")
    filled = dem.data.copy()
    visited = np.zeros((nrows, ncols), dtype=bool)
    heap: list[tuple[float, int, int, int]] = []
    seq = 0
    for r in range(nrows):
        for c in range(ncols):
            if nodata[r, c]:
                continue
            on_border = r in (0, nrows - 1) or c in (0, ncols - 1)
            beside_nodata = any(
                dem.in_bounds(r + dr, c + dc) and nodata[r + dr, c + dc]
                for dr, dc in _ALL_OFFSETS)
            if on_border or beside_nodata:
                visited[r, c] = True
                heapq.heappush(heap, (filled[r, c], seq, r, c))
                seq += 1
    while heap:
        level, _, r, c = heapq.heappop(heap)
        for dr, dc in _ALL_OFFSETS:
            nr, nc = r + dr, c + dc
            if not dem.in_bounds(nr, nc) or visited[nr, nc] or nodata[nr, nc]:
                continue
            visited[nr, nc] = True
            filled[nr, nc] = max(dem.data[nr, nc], level)
            heapq.heappush(heap, (filled[nr, nc], seq, nr, nc))
            seq += 1
    return DemGrid(filled, dem.xll, dem.yll, dem.cellsize, dem.nodata)


def flow_direction_d8(dem: DemGrid) -> FlowDirGrid:
    """Steepest-descent direction per cell.

    Off-grid and nodata positions compete as zero-gradient exits, so border
    cells on level ground drain outward (OUTLET).  Equal gradients resolve by
    the fixed order E,S,W,N,SE,SW,NW,NE.  A cell with no non-ascending
    neighbor at all (an unfilled pit) falls back to OUTLET.
    """
    nrows, ncols = dem.nrows, dem.ncols
    nodata = dem.nodata_mask()
    codes = np.full((nrows, ncols), NODATA_DIR, dtype=np.int8)
    data = dem.data
    for r in range(nrows):
        for c in range(ncols):
            if nodata[r, c]:
                continue
            h = data[r, c]
            best_gradient = -math.inf
            best_code = None
            best_is_exit = False
            for code in TIE_ORDER:
                dr, dc = DIR_OFFSETS[code]
                nr, nc = r + dr, c + dc
                if 0 <= nr < nrows and 0 <= nc < ncols and not nodata[nr, nc]:
                    gradient = (h - data[nr, nc]) / _DIST[code]
                    if gradient < 0:
                        continue
                    is_exit = False
                else:
                    gradient = 0.0
                    is_exit = True
                if gradient > best_gradient:
                    best_gradient = gradient
                    best_code = code
                    best_is_exit = is_exit
            if best_code is None or best_is_exit:
                codes[r, c] = OUTLET
            else:
                codes[r, c] = best_code
    return FlowDirGrid(codes, dem)


def flow_accumulation(dirs: FlowDirGrid) -> AccumGrid:
    """Upstream cell count per cell (each cell counts itself) by
    topological propagation; raises CycleDetected if routing loops."""
    dem = dirs.dem
    nrows, ncols = dem.nrows, dem.ncols
    nodata = dem.nodata_mask()
    acc = np.zeros((nrows, ncols), dtype=np.int64)
    indegree = np.zeros((nrows, ncols), dtype=np.int32)
    downstream: dict[CellIndex, CellIndex] = {}
    order: list[CellIndex] = []
    for r in range(nrows):
        for c in range(ncols):
            if nodata[r, c]:
                continue
            order.append((r, c))
            acc[r, c] = 1
            target = dirs.downstream(r, c)
            if target is None:
                continue
            tr, tc = target
            if dem.in_bounds(tr, tc) and not nodata[tr, tc]:
                downstream[(r, c)] = target
                indegree[tr, tc] += 1
    queue = deque(cell for cell in order if indegree[cell] == 0)
    processed = 0
    while queue:
        cell = queue.popleft()
        processed += 1
        target = downstream.get(cell)
        if target is None:
            continue
        acc[target] += acc[cell]
        indegree[target] -= 1
        if indegree[target] == 0:
            queue.append(target)
    if processed != len(order):
        raise CycleDetected(
            f"{len(order) - processed} cells caught in a routing cycle")
    return AccumGrid(acc, dem)


def _stream_runs(dirs: FlowDirGrid, acc: AccumGrid,
                 threshold: int) -> tuple[list[list[CellIndex]], dict[CellIndex, int]]:
    """Maximal unbranched runs of stream cells plus cell -> run index."""
    dem = dirs.dem
    nodata = dem.nodata_mask()
    stream = (acc.counts >= threshold) & ~nodata
    cells = [(int(r), int(c)) for r, c in zip(*np.nonzero(stream))]
    cell_set = set(cells)

    def stream_downstream(cell: CellIndex) -> Optional[CellIndex]:
        target = dirs.downstream(*cell)
        return target if target in cell_set else None

    in_degree: dict[CellIndex, int] = {cell: 0 for cell in cells}
    for cell in cells:
        target = stream_downstream(cell)
        if target is not None:
            in_degree[target] += 1
    runs: list[list[CellIndex]] = []
    run_of: dict[CellIndex, int] = {}
    for cell in cells:  # scan order; heads and junction cells start runs
        if in_degree[cell] == 1:
            continue
        run = [cell]
        current = cell
        while True:
            target = stream_downstream(current)
            if target is None or in_degree[target] >= 2:
                break
            run.append(target)
            current = target
        index = len(runs)
        runs.append(run)
        for member in run:
            run_of[member] = index
    return runs, run_of


def extract_stream_network(graph: Graph, dirs: FlowDirGrid, acc: AccumGrid,
                           threshold: int, system: int,
                           id_prefix: str = "stretch-") -> IngestReport:
    """Cut stream cells into WaterStretch nodes and FLOWS_TO edges.

    Stream cells are exactly those with accumulation >= threshold.  A run
    ends where it reaches a junction (a cell fed by two or more stream
    cells); the junction cell starts the downstream run.  Stretch domain
    ids number the runs in discovery order, so re-running the extraction
    on the same grid finds the existing nodes and creates nothing.
    """
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    system_node = graph.get_node(system)
    if system_node.label is not NodeLabel.WATER_SYSTEM:
        raise UnknownNode(f"node {system} is not a WaterSystem")
    dem = dirs.dem
    runs, run_of = _stream_runs(dirs, acc, threshold)
    cell_set = set(run_of)
    report = IngestReport("StreamNetwork")
    node_of_run: list[int] = []
    for index, run in enumerate(runs):
        points = [dem.cell_center(r, c) for r, c in run]
        tail_target = dirs.downstream(*run[-1])
        if tail_target in cell_set:
            points.append(dem.cell_center(*tail_target))
        if len(points) == 1:
            points.append(_lone_cell_second_point(dirs, run[0], cell_set, dem))
        domain_id = f"{id_prefix}{index + 1:04d}"
        existing = graph.by_domain_id(NodeLabel.WATER_STRETCH, domain_id)
        if existing is not None:
            node_of_run.append(existing)
            report.skip(f"stretch {domain_id} already present")
            continue
        node = graph.create_node(NodeLabel.WATER_STRETCH, {
            "id": domain_id,
            "geometry": Polyline(tuple(points)),
            "cell_count": len(run),
        })
        node_of_run.append(node)
        report.nodes_created += 1
    for index, run in enumerate(runs):
        tail_target = dirs.downstream(*run[-1])
        if tail_target not in cell_set:
            continue
        downstream_run = run_of[tail_target]
        try:
            graph.create_edge(EdgeType.FLOWS_TO, node_of_run[index],
                              node_of_run[downstream_run])
            report.edges_created += 1
        except DuplicateEdge:
            pass
    return report


def _lone_cell_second_point(dirs: FlowDirGrid, cell: CellIndex,
                            cell_set: set[CellIndex], dem: DemGrid) -> Point:
    """Second polyline vertex for a single-cell terminal stretch: continue
    the first inflow's direction through the cell, or extend east."""
    center = dem.cell_center(*cell)
    for candidate in sorted(cell_set):
        if candidate != cell and dirs.downstream(*candidate) == cell:
            upstream_center = dem.cell_center(*candidate)
            return Point(2 * center.lon - upstream_center.lon,
                         2 * center.lat - upstream_center.lat)
    return Point(center.lon + dem.cellsize, center.lat)


def delineate_watershed(dirs: FlowDirGrid,
                        pour: CellIndex) -> tuple[set[CellIndex], Polygon]:
    """Every cell whose D8 path reaches the pour cell, plus an outline.

    The outline traces the edge of the orthogonally connected component
    containing the pour cell (diagonal-only satellites contribute cells but
    not outline area).
    """
    dem = dirs.dem
    r0, c0 = pour
    if not dem.in_bounds(r0, c0) or dem.is_nodata(r0, c0):
        raise OutOfBounds(f"pour cell {pour} outside the valid grid")
    inflows: dict[CellIndex, list[CellIndex]] = {}
    nodata = dem.nodata_mask()
    for r in range(dem.nrows):
        for c in range(dem.ncols):
            if nodata[r, c]:
                continue
            target = dirs.downstream(r, c)
            if target is not None:
                inflows.setdefault(target, []).append((r, c))
    watershed = {pour}
    queue = deque([pour])
    while queue:
        cell = queue.popleft()
        for upstream in inflows.get(cell, ()):
            if upstream not in watershed:
                watershed.add(upstream)
                queue.append(upstream)
    return watershed, _component_outline(watershed, pour, dem)


def _component_outline(cells: set[CellIndex], pour: CellIndex,
                       dem: DemGrid) -> Polygon:
    component = {pour}
    queue = deque([pour])
    while queue:
        r, c = queue.popleft()
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if (nr, nc) in cells and (nr, nc) not in component:
                component.add((nr, nc))
                queue.append((nr, nc))
    # Directed boundary edges on the corner lattice, interior kept on the
    # walker's left; corners are (row index, col index) of the lattice.
    edges: dict[tuple[CellIndex, tuple[int, int]], CellIndex] = {}
    for r, c in component:
        if (r - 1, c) not in component:
            edges[((r, c + 1), (0, -1))] = (r, c)
        if (r + 1, c) not in component:
            edges[((r + 1, c), (0, 1))] = (r + 1, c + 1)
        if (r, c - 1) not in component:
            edges[((r, c), (1, 0))] = (r + 1, c)
        if (r, c + 1) not in component:
            edges[((r + 1, c + 1), (-1, 0))] = (r, c + 1)
    start_cell = min(component)
    # The topmost-leftmost cell always has its north side exposed; start
    # there walking west (interior on the left).
    return _trace_ring(edges, (start_cell[0], start_cell[1] + 1), (0, -1), dem)


def _trace_ring(edges: dict, start_corner: tuple[int, int],
                start_dir: tuple[int, int], dem: DemGrid) -> Polygon:
    # Consume directed edges as they are walked; at a pinched corner the
    # sharpest left turn keeps the interior on the left and stays on the
    # outer ring.  The start corner cannot be pinched (no cells above the
    # topmost row), so returning to it closes the ring.
    corners = [start_corner]
    direction = start_dir
    corner = edges.pop((start_corner, start_dir))
    while corner != start_corner:
        corners.append(corner)
        di, dj = direction
        for candidate in ((-dj, di), (di, dj), (dj, -di)):
            if (corner, candidate) in edges:
                direction = candidate
                break
        else:  # pragma: no cover - boundary edges always chain
            raise RuntimeError("broken outline chain")
        corner = edges.pop((corner, direction))
    corners = _collapse_collinear(corners)
    points = tuple(
        Point(dem.xll + j * dem.cellsize,
              dem.yll + (dem.nrows - i) * dem.cellsize)
        for i, j in corners)
    return Polygon(points + (points[0],))


def _collapse_collinear(corners: list[tuple[int, int]]) -> list[tuple[int, int]]:
    if len(corners) <= 2:
        return corners
    kept: list[tuple[int, int]] = []
    n = len(corners)
    for idx, corner in enumerate(corners):
        prev = corners[idx - 1]
        nxt = corners[(idx + 1) % n]
        if (corner[0] - prev[0], corner[1] - prev[1]) != (
                nxt[0] - corner[0], nxt[1] - corner[1]):
            kept.append(corner)
    return kept


def _station_point(props: dict) -> Optional[Point]:
    lon, lat = props.get("lon"), props.get("lat")
    if isinstance(lon, (int, float)) and isinstance(lat, (int, float)) \
            and not isinstance(lon, bool) and not isinstance(lat, bool):
        try:
            return Point(float(lon), float(lat))
        except ValueError:
            return None
    return None


def link_stations_to_stretches(graph: Graph, tol: float = 0.003) -> IngestReport:
    """Snap each station to the nearest stretch polyline within tol degrees
    and record a MONITORED_BY edge; stations that snap nowhere become
    warnings.  Distance ties keep the earliest-created stretch."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    stretches = []
    for stretch in graph.nodes_with_label(NodeLabel.WATER_STRETCH):
        geometry = graph.get_node(stretch).props.get("geometry")
        if not isinstance(geometry, Polyline):
            continue
        lons = [p.lon for p in geometry.points]
        lats = [p.lat for p in geometry.points]
        bbox = (min(lons) - tol, min(lats) - tol,
                max(lons) + tol, max(lats) + tol)
        stretches.append((stretch, geometry, bbox))
    report = IngestReport("StationLinks")
    for station in graph.nodes_with_label(NodeLabel.QUALITY_STATION):
        props = graph.get_node(station).props
        point = _station_point(props)
        if point is None:
            report.skip(f"station {props.get('id')!r} has no usable coordinates")
            continue
        best: Optional[tuple[float, int]] = None
        for stretch, geometry, (x0, y0, x1, y1) in stretches:
            if not (x0 <= point.lon <= x1 and y0 <= point.lat <= y1):
                continue
            distance = point_polyline_distance(point, geometry)
            if best is None or distance < best[0]:
                best = (distance, stretch)
        if best is None or best[0] > tol:
            report.warnings.append(
                f"station {props.get('id')!r} is not within {tol} of any stretch")
            continue
        try:
            graph.create_edge(EdgeType.MONITORED_BY, best[1], station)
            report.edges_created += 1
        except DuplicateEdge:
            pass
    return report


def compute_within_edges(graph: Graph) -> IngestReport:
    """WITHIN edges from stations, water nodes, stretches, and land-use
    areas to the innermost watershed polygon containing each one."""
    report = IngestReport("WithinEdges")

    def link(node: int, point: Optional[Point]) -> None:
        if point is None:
            return
        for watershed in innermost_watersheds(graph, point):
            try:
                graph.create_edge(EdgeType.WITHIN, node, watershed)
                report.edges_created += 1
            except DuplicateEdge:
                pass

    for label in (NodeLabel.QUALITY_STATION, NodeLabel.WATER_NODE):
        for node in graph.nodes_with_label(label):
            link(node, _station_point(graph.get_node(node).props))
    for label in (NodeLabel.WATER_STRETCH, NodeLabel.LAND_USE):
        for node in graph.nodes_with_label(label):
            geometry = graph.get_node(node).props.get("geometry")
            if geometry is None:
                continue
            link(node, representative_point(geometry))
    return report


def run_drainage_pipeline(graph: Graph, threshold: int, tol: float = 0.003,
                          dem_node: Optional[int] = None,
                          system: Optional[int] = None) -> dict:
    """Full pass: fill, route, accumulate, extract streams, snap stations,
    derive containment.  Returns a summary suitable for job results."""
    if dem_node is None:
        dems = graph.nodes_with_label(NodeLabel.DEM)
        if not dems:
            raise UnknownNode("graph holds no DEM node")
        dem_node = dems[0]
    if system is None:
        system = ensure_system(graph)
    dem = load_dem_node(graph, dem_node)
    filled = fill_depressions(dem)
    dirs = flow_direction_d8(filled)
    acc = flow_accumulation(dirs)
    streams = extract_stream_network(graph, dirs, acc, threshold, system)
    links = link_stations_to_stretches(graph, tol)
    containment = compute_within_edges(graph)
    return {
        "dem": graph.get_node(dem_node).props["id"],
        "threshold": threshold,
        "tolerance": tol,
        "stretches": streams.nodes_created,
        "flows_to": streams.edges_created,
        "monitored_by": links.edges_created,
        "within": containment.edges_created,
    }
