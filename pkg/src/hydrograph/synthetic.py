"""Synthetic dataset builders.

Three scales of test data, all deterministic:

* a three-basin transfer network (115 water nodes, 113 links) whose deepest
  node sits 21 edges below a source,
* a monitored drainage network (73 stretches, 73 FLOWS_TO edges, 3 stations)
  with watershed and land-use context for the station queries,
* a full file-backed dataset generator producing every upload kind at the
  scale of the Alqueva transfer system, with a manifest of declared counts.

The generated elevation grid is a tiling of small carved drainage basins:
each 6x8 tile holds either a single descending strip (one stretch) or a
Y-shaped confluence (three stretches, two FLOWS_TO edges), surrounded by
nodata.  Counts below derive from the tile mix, so the manifest can declare
exact post-drainage totals.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .drainage import run_drainage_pipeline
from .geometry import Point, Polygon, Polyline
from .ingest import (
    ensure_system,
    ingest_dem,
    ingest_geojson_layer,
    ingest_links,
    ingest_quality_data,
    ingest_stations,
    ingest_water_nodes,
)
from .store import EdgeType, Graph, NodeLabel


# --- transfer network -------------------------------------------------------

@dataclass(frozen=True)
class TransferFixture:
    water_nodes_csv: str
    links_csv: str
    deepest_id: str
    longest_member_id: str
    node_count: int
    edge_count: int
    component_count: int
    longest_path_edges: int


def _transfer_rows(rng: random.Random,
                   watershed_homes: dict[str, tuple[float, float]]):
    """Node and link rows for the three transfer subsystems."""
    nodes: list[tuple[str, str, str, str, float, float]] = []
    links: list[tuple[str, str]] = []

    def scatter() -> tuple[float, float]:
        return (round(rng.uniform(-7.65, -7.35), 6),
                round(rng.uniform(38.05, 38.25), 6))

    def add_node(node_id: str, ntype: str, subsystem: str) -> None:
        lon, lat = watershed_homes.get(node_id) or scatter()
        nodes.append((node_id, node_id.replace("-", " ").title(),
                      ntype, subsystem, lon, lat))

    types = ["reservoir", "dam", "junction", "pump", "intake"]

    # Alqueva: a 22-node spine (21 edges source to mouth), one braided
    # reach around the spine, and 47 tributary inlets.
    spine = [f"alq-s{i:02d}" for i in range(22)]
    for i, node_id in enumerate(spine):
        add_node(node_id, types[i % len(types)], "alqueva")
    links += [(a, b) for a, b in zip(spine, spine[1:])]
    add_node("alq-braid", "channel-split", "alqueva")
    links += [("alq-s05", "alq-braid"), ("alq-braid", "alq-s07")]
    for i in range(47):
        node_id = f"alq-t{i:02d}"
        add_node(node_id, "intake", "alqueva")
        links.append((node_id, spine[2 + (i * 5) % 20]))

    # Pedrogao: 10-node chain plus 15 tributaries.
    chain = [f"ped-s{i:02d}" for i in range(10)]
    for i, node_id in enumerate(chain):
        add_node(node_id, types[(i + 2) % len(types)], "pedrogao")
    links += [(a, b) for a, b in zip(chain, chain[1:])]
    for i in range(15):
        node_id = f"ped-t{i:02d}"
        add_node(node_id, "intake", "pedrogao")
        links.append((node_id, chain[1 + (i * 3) % 9]))

    # Ardila: 10-node chain plus 10 tributaries.
    chain = [f"ard-s{i:02d}" for i in range(10)]
    for i, node_id in enumerate(chain):
        add_node(node_id, types[(i + 4) % len(types)], "ardila")
    links += [(a, b) for a, b in zip(chain, chain[1:])]
    for i in range(10):
        node_id = f"ard-t{i:02d}"
        add_node(node_id, "intake", "ardila")
        links.append((node_id, chain[1 + (i * 7) % 9]))

    return nodes, links


def transfer_network(
        watershed_homes: dict[str, tuple[float, float]] | None = None,
        seed: int = 42) -> TransferFixture:
    rng = random.Random(seed)
    nodes, links = _transfer_rows(rng, watershed_homes or {})
    kinds = ["channel", "pipeline", "river"]
    node_lines = ["id,name,type,subsystem,lon,lat"]
    node_lines += [f"{i},{n},{t},{s},{lon},{lat}"
                   for i, n, t, s, lon, lat in nodes]
    link_lines = ["from_id,to_id,kind"]
    link_lines += [f"{a},{b},{kinds[k % 3]}"
                   for k, (a, b) in enumerate(links)]
    return TransferFixture(
        water_nodes_csv="\n".join(node_lines) + "\n",
        links_csv="\n".join(link_lines) + "\n",
        deepest_id="alq-s21",
        longest_member_id="alq-s10",
        node_count=len(nodes),
        edge_count=len(links),
        component_count=3,
        longest_path_edges=21,
    )


def build_transfer_network(graph: Graph | None = None,
                           seed: int = 42) -> tuple[Graph, TransferFixture]:
    fixture = transfer_network(seed=seed)
    graph = graph or Graph()
    system = ensure_system(graph)
    ingest_water_nodes(graph, fixture.water_nodes_csv, system)
    ingest_links(graph, fixture.links_csv)
    return graph, fixture


# --- monitored stretch network ---------------------------------------------

def _line(*pairs: tuple[float, float]) -> Polyline:
    return Polyline(tuple(Point(lon, lat) for lon, lat in pairs))


def _box(lon0: float, lat0: float, lon1: float, lat1: float) -> Polygon:
    return Polygon((Point(lon0, lat0), Point(lon1, lat0), Point(lon1, lat1),
                    Point(lon0, lat1), Point(lon0, lat0)))


@dataclass
class StretchMonitorFixture:
    graph: Graph
    stretches: list[int]
    braid: int
    stations: dict[str, int]
    landuse: int
    watersheds: tuple[int, int]
    query_stretch: int
    same_watershed_stations: list[int]
    longest_gap_edges: int


def monitored_stretch_network() -> StretchMonitorFixture:
    """A 72-stretch chain with one braided reach (73 nodes, 73 edges),
    three stations 8 and 9 edges apart, and a land-use area sharing a
    watershed with the two upstream stations."""
    graph = Graph()
    system = ensure_system(graph)
    chain: list[int] = []
    for i in range(72):
        line = _line((i * 0.01, 38.0), (i * 0.01 + 0.01, 38.0))
        chain.append(graph.create_node(
            NodeLabel.WATER_STRETCH, {"id": f"st-{i:02d}", "geometry": line}))
    for a, b in zip(chain, chain[1:]):
        graph.create_edge(EdgeType.FLOWS_TO, a, b)
    braid = graph.create_node(NodeLabel.WATER_STRETCH, {
        "id": "st-braid", "geometry": _line((0.10, 38.01), (0.12, 38.01))})
    graph.create_edge(EdgeType.FLOWS_TO, chain[10], braid)
    graph.create_edge(EdgeType.FLOWS_TO, braid, chain[12])

    stations = {}
    for name, index in (("s02", 2), ("s10", 10), ("s19", 19)):
        station = graph.create_node(NodeLabel.QUALITY_STATION, {
            "id": f"wq-{name}", "lon": index * 0.01, "lat": 38.0})
        graph.create_edge(EdgeType.STATION_OF, station, system)
        graph.create_edge(EdgeType.MONITORED_BY, chain[index], station)
        stations[name] = station

    w1 = graph.create_node(NodeLabel.WATERSHED, {
        "id": "ws-upper", "geometry": _box(-0.05, 37.9, 0.15, 38.1)})
    w2 = graph.create_node(NodeLabel.WATERSHED, {
        "id": "ws-lower", "geometry": _box(0.15, 37.9, 0.75, 38.1)})
    graph.create_edge(EdgeType.HAS_WATERSHED, system, w1)
    graph.create_edge(EdgeType.HAS_WATERSHED, system, w2)
    landuse = graph.create_node(NodeLabel.LAND_USE, {
        "id": "lu-olive", "crop": "olive",
        "geometry": _box(0.01, 38.02, 0.03, 38.04)})
    graph.create_edge(EdgeType.HAS_LANDUSE, system, landuse)
    graph.create_edge(EdgeType.WITHIN, landuse, w1)
    graph.create_edge(EdgeType.WITHIN, stations["s02"], w1)
    graph.create_edge(EdgeType.WITHIN, stations["s10"], w1)
    graph.create_edge(EdgeType.WITHIN, stations["s19"], w2)

    return StretchMonitorFixture(
        graph=graph,
        stretches=chain,
        braid=braid,
        stations=stations,
        landuse=landuse,
        watersheds=(w1, w2),
        query_stretch=chain[5],
        same_watershed_stations=[stations["s02"], stations["s10"]],
        longest_gap_edges=17,
    )


# --- strip elevation grid ---------------------------------------------------

def strip_dem_ascii() -> str:
    """5x5 grid with one west-to-east descending carved row; at threshold 2
    drainage extraction yields exactly one stretch and no FLOWS_TO edges."""
    rows = []
    for r in range(5):
        if r == 2:
            rows.append("5.0 4.0 3.0 2.0 1.0")
        else:
            rows.append(" ".join(["-9999"] * 5))
    header = ("ncols 5\nnrows 5\nxllcorner -8.0\nyllcorner 38.0\n"
              "cellsize 0.001\nNODATA_value -9999\n")
    return header + "\n".join(rows) + "\n"


STRIP_DEM_THRESHOLD = 2
STRIP_DEM_STRETCHES = 1


# --- full dataset generator -------------------------------------------------

PARAMETERS = [
    ("NO3_mg_L", 0.5, 50.0, None),
    ("NO2_mg_L", 0.01, 1.5, 0.01),
    ("NH4_mg_L", 0.02, 2.0, 0.02),
    ("PT_mg_L", 0.01, 0.8, 0.01),
    ("pH", 6.2, 8.9, None),
    ("O2_dis_mg_L", 4.0, 12.0, None),
    ("cond_uS_cm", 150.0, 1200.0, None),
    ("temp_C", 6.0, 29.0, None),
    ("turb_NTU", 0.5, 80.0, None),
    ("SST_mg_L", 1.0, 60.0, 1.0),
    ("chla_ug_L", 0.5, 90.0, 0.5),
    ("hardness_mg_L", 40.0, 400.0, None),
]

TILE_ROWS, TILE_COLS = 6, 8
GRID_TILES_DOWN, GRID_TILES_ACROSS = 22, 29
STRIP_TILES = 26
DEM_CELLSIZE = 0.001
DEM_XLL, DEM_YLL = -7.95, 38.30
EFMA_THRESHOLD = 2
SNAP_TOLERANCE = 0.003

MONITORED_STATION_COUNT = 18
WATERSHED_STATION_COUNT = 8
WATERSHED_WATERNODE_COUNT = 6
WATERSHED_LANDUSE_COUNT = 6


@dataclass
class EfmaManifest:
    """Declared shape of a generated dataset; ingestion must match it."""

    seed: int
    threshold: int
    snap_tolerance: float
    files: dict[str, str]
    node_counts: dict[str, int]
    edge_counts: dict[str, int]
    total_nodes: int
    total_edges: int
    olive_landuse: list[str]
    monitored_stations: list[str]
    quality_rows: int
    dem_shape: list[int]

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EfmaManifest":
        return cls(**json.loads(text))


def _dem_tiles():
    """(is_strip, tile_row, tile_col) for every tile, strips first."""
    tiles = []
    index = 0
    for ti in range(GRID_TILES_DOWN):
        for tj in range(GRID_TILES_ACROSS):
            tiles.append((index < STRIP_TILES, ti, tj))
            index += 1
    return tiles


def _carve_dem() -> tuple[list[list[float]], list[tuple[float, float]]]:
    """Elevation rows plus the lon/lat of each Y-tile main-stem cell that a
    monitored station should sit on."""
    nrows = GRID_TILES_DOWN * TILE_ROWS
    ncols = GRID_TILES_ACROSS * TILE_COLS
    grid = [[-9999.0] * ncols for _ in range(nrows)]
    station_cells: list[tuple[float, float]] = []

    def center(r: int, c: int) -> tuple[float, float]:
        lon = DEM_XLL + (c + 0.5) * DEM_CELLSIZE
        lat = DEM_YLL + (nrows - 1 - r + 0.5) * DEM_CELLSIZE
        return round(lon, 6), round(lat, 6)

    y_seen = 0
    for is_strip, ti, tj in _dem_tiles():
        r0, c0 = ti * TILE_ROWS, tj * TILE_COLS
        if is_strip:
            for k, elev in enumerate([13.0, 12.0, 11.0, 10.0]):
                grid[r0 + 3][c0 + k] = elev
        else:
            for k, elev in enumerate([13.0, 12.0, 11.0, 10.0, 9.0, 8.0]):
                grid[r0 + 3][c0 + k] = elev
            for k, elev in enumerate([13.0, 12.0, 11.0]):
                grid[r0 + k][c0 + 3] = elev
            if y_seen < MONITORED_STATION_COUNT:
                station_cells.append(center(r0 + 3, c0 + 4))
            y_seen += 1
    return grid, station_cells


def _dem_ascii(grid: list[list[float]]) -> str:
    lines = [
        f"ncols {len(grid[0])}",
        f"nrows {len(grid)}",
        f"xllcorner {DEM_XLL}",
        f"yllcorner {DEM_YLL}",
        f"cellsize {DEM_CELLSIZE}",
        "NODATA_value -9999",
    ]
    for row in grid:
        lines.append(" ".join(
            str(int(v)) if v == int(v) else repr(v) for v in row))
    return "\n".join(lines) + "\n"


def _square(lon: float, lat: float, size: float) -> list[list[float]]:
    return [[lon, lat], [lon + size, lat], [lon + size, lat + size],
            [lon, lat + size], [lon, lat]]


def _feature(fid: str, geometry: dict, **props) -> dict:
    return {"type": "Feature",
            "properties": {"id": fid, **props},
            "geometry": geometry}


def _watershed_features() -> tuple[list[dict], dict[str, list[list[float]]]]:
    """23 watershed polygons south of the elevation grid: 19 standalone
    squares and two nested pairs.  Returns features plus ring lookup."""
    features = []
    rings: dict[str, list[list[float]]] = {}

    def add(fid: str, ring: list[list[float]], name: str) -> None:
        rings[fid] = ring
        features.append(_feature(
            fid, {"type": "Polygon", "coordinates": [ring]}, name=name))

    for i in range(19):
        lon = -7.94 + i * 0.034
        add(f"ws-{i + 1:02d}", _square(lon, 37.85, 0.02), f"Basin {i + 1}")
    add("ws-21", _square(-7.94, 37.93, 0.03), "Basin 21")
    add("ws-20", _square(-7.93, 37.94, 0.01), "Basin 20")
    add("ws-23", _square(-7.85, 37.93, 0.03), "Basin 23")
    add("ws-22", _square(-7.84, 37.94, 0.01), "Basin 22")
    return features, rings


def _ring_center(ring: list[list[float]]) -> tuple[float, float]:
    lons = [p[0] for p in ring[:-1]]
    lats = [p[1] for p in ring[:-1]]
    return (round(sum(lons) / len(lons), 6), round(sum(lats) / len(lats), 6))


def _landuse_features(rings: dict[str, list[list[float]]]) -> list[dict]:
    crops = ["olive", "vineyard", "wheat", "pasture"]
    features = []
    inside = ["ws-20", "ws-15", "ws-16", "ws-17", "ws-18", "ws-19"]
    for i in range(22):
        fid = f"lu-{i + 1:02d}"
        if i < WATERSHED_LANDUSE_COUNT:
            lon, lat = _ring_center(rings[inside[i]])
            ring = _square(lon - 0.002, lat - 0.002, 0.004)
        else:
            ring = _square(-7.18 + (i - 6) * 0.012, 38.05, 0.004)
        features.append(_feature(
            fid, {"type": "Polygon", "coordinates": [ring]},
            crop=crops[i % len(crops)], area_ha=round(4.0 + i * 1.5, 1)))
    return features


def _geometry_features(rng: random.Random) -> list[dict]:
    features = []
    for i in range(39):
        fid = f"gs-{i + 1:02d}"
        lon = round(rng.uniform(-7.25, -7.02), 6)
        lat = round(rng.uniform(38.10, 38.28), 6)
        if i < 20:
            geometry = {"type": "Point", "coordinates": [lon, lat]}
        elif i < 30:
            geometry = {"type": "LineString", "coordinates": [
                [lon, lat], [lon + 0.01, lat + 0.005], [lon + 0.02, lat]]}
        else:
            geometry = {"type": "Polygon",
                        "coordinates": [_square(lon, lat, 0.006)]}
        features.append(_feature(fid, geometry, kind="auxiliary"))
    return features


def _station_rows(rng: random.Random,
                  monitored_cells: list[tuple[float, float]],
                  rings: dict[str, list[list[float]]]):
    operators = ["EDIA", "APA", "SNIRH"]
    rows = []
    for i in range(795):
        sid = f"wq-{i + 1:04d}"
        if i < MONITORED_STATION_COUNT:
            lon, lat = monitored_cells[i]
        elif i < MONITORED_STATION_COUNT + WATERSHED_STATION_COUNT:
            ring = rings[f"ws-{i - MONITORED_STATION_COUNT + 1:02d}"]
            lon, lat = _ring_center(ring)
        else:
            lon = round(rng.uniform(-7.70, -7.30), 6)
            lat = round(rng.uniform(38.05, 38.28), 6)
        rows.append((sid, f"Station {i + 1}", lon, lat,
                     operators[i % len(operators)]))
    return rows


def _quality_csv(rng: random.Random) -> tuple[str, int]:
    names = [name for name, *_ in PARAMETERS]
    lines = ["station_id,timestamp,depth_m," + ",".join(names)]
    count = 0
    for i in range(795):
        sid = f"wq-{i + 1:04d}"
        samples = 53 if i < 689 else 52
        lake = i % 10 == 0
        for k in range(samples):
            year = 2019 + (k // 12)
            month = k % 12 + 1
            day = 10 + (i + k) % 15
            hour = 8 + k % 9
            stamp = f"{year:04d}-{month:02d}-{day:02d}T{hour:02d}:00:00Z"
            depth = "" if not lake else str([0.5, 5.0, 12.0][k % 3])
            cells = []
            filled = 0
            for name, lo, hi, limit in PARAMETERS:
                if rng.random() > 0.58:
                    cells.append("")
                    continue
                filled += 1
                if limit is not None and rng.random() < 0.02:
                    cells.append(f"<{limit}")
                else:
                    cells.append(str(round(rng.uniform(lo, hi), 3)))
            if not filled:
                cells[0] = str(round(rng.uniform(*PARAMETERS[0][1:3]), 3))
            lines.append(f"{sid},{stamp},{depth}," + ",".join(cells))
            count += 1
    return "\n".join(lines) + "\n", count


def _declared_counts() -> tuple[dict[str, int], dict[str, int]]:
    y_tiles = GRID_TILES_DOWN * GRID_TILES_ACROSS - STRIP_TILES
    stretches = STRIP_TILES + 3 * y_tiles
    flows_to = 2 * y_tiles
    quality = 689 * 53 + 106 * 52
    nodes = {
        NodeLabel.WATER_SYSTEM.value: 1,
        NodeLabel.WATER_NODE.value: 115,
        NodeLabel.QUALITY_STATION.value: 795,
        NodeLabel.QUALITY_DATA.value: quality,
        NodeLabel.WATER_STRETCH.value: stretches,
        NodeLabel.WATERSHED.value: 23,
        NodeLabel.LAND_USE.value: 22,
        NodeLabel.GEOMETRY.value: 39,
        NodeLabel.DEM.value: 1,
    }
    edges = {
        EdgeType.CONNECTED.value: 113,
        EdgeType.STATION_OF.value: 795,
        EdgeType.COLLECTED.value: quality,
        EdgeType.FLOWS_TO.value: flows_to,
        EdgeType.MONITORED_BY.value: MONITORED_STATION_COUNT,
        EdgeType.WITHIN.value: (WATERSHED_STATION_COUNT
                                + WATERSHED_WATERNODE_COUNT
                                + WATERSHED_LANDUSE_COUNT),
        EdgeType.HAS_WATERSHED.value: 23,
        EdgeType.HAS_LANDUSE.value: 22,
        EdgeType.HAS_GEOMETRY.value: 39,
        EdgeType.PART_OF.value: 2,
        EdgeType.REPRESENTED.value: 0,
    }
    return nodes, edges


def generate_efma_files(directory: Path | str, seed: int = 42) -> EfmaManifest:
    """Write every upload file plus a manifest of declared counts."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)

    grid, monitored_cells = _carve_dem()
    watershed_features, rings = _watershed_features()

    waternode_homes = {}
    inside = ["ws-09", "ws-10", "ws-11", "ws-12", "ws-13", "ws-14"]
    for k in range(WATERSHED_WATERNODE_COUNT):
        waternode_homes[f"alq-t{k:02d}"] = _ring_center(rings[inside[k]])
    transfer = transfer_network(watershed_homes=waternode_homes, seed=seed)

    station_rows = _station_rows(rng, monitored_cells, rings)
    station_csv = "id,name,lon,lat,operator\n" + "".join(
        f"{sid},{name},{lon},{lat},{op}\n"
        for sid, name, lon, lat, op in station_rows)
    quality_csv, quality_rows = _quality_csv(rng)

    files = {
        "water_nodes": "water_nodes.csv",
        "links": "links.csv",
        "stations": "stations.csv",
        "quality": "quality.csv",
        "watersheds": "watersheds.geojson",
        "landuse": "landuse.geojson",
        "geometries": "geometries.geojson",
        "dem": "dem.asc",
    }
    (directory / files["water_nodes"]).write_text(transfer.water_nodes_csv)
    (directory / files["links"]).write_text(transfer.links_csv)
    (directory / files["stations"]).write_text(station_csv)
    (directory / files["quality"]).write_text(quality_csv)
    for role, feats in (("watersheds", watershed_features),
                        ("landuse", _landuse_features(rings)),
                        ("geometries", _geometry_features(rng))):
        layer = {"watersheds": "watershed", "landuse": "landuse",
                 "geometries": "geometry"}[role]
        doc = {"type": "FeatureCollection", "layer": layer, "features": feats}
        (directory / files[role]).write_text(json.dumps(doc) + "\n")
    (directory / files["dem"]).write_text(_dem_ascii(grid))

    node_counts, edge_counts = _declared_counts()
    manifest = EfmaManifest(
        seed=seed,
        threshold=EFMA_THRESHOLD,
        snap_tolerance=SNAP_TOLERANCE,
        files=files,
        node_counts=node_counts,
        edge_counts=edge_counts,
        total_nodes=sum(node_counts.values()),
        total_edges=sum(edge_counts.values()),
        olive_landuse=[f"lu-{i + 1:02d}" for i in range(22) if i % 4 == 0],
        monitored_stations=[f"wq-{i + 1:04d}"
                            for i in range(MONITORED_STATION_COUNT)],
        quality_rows=quality_rows,
        dem_shape=[GRID_TILES_DOWN * TILE_ROWS,
                   GRID_TILES_ACROSS * TILE_COLS],
    )
    (directory / "manifest.json").write_text(manifest.to_json())
    return manifest


def load_efma_files(graph: Graph, directory: Path | str) -> dict:
    """Ingest a generated dataset directory and run drainage analysis.

    Returns per-file ingestion reports plus the drainage summary."""
    directory = Path(directory)
    manifest = EfmaManifest.from_json(
        (directory / "manifest.json").read_text())
    system = ensure_system(graph)

    def text(role: str) -> str:
        return (directory / manifest.files[role]).read_text()

    reports = {
        "water_nodes": ingest_water_nodes(graph, text("water_nodes"), system),
        "links": ingest_links(graph, text("links")),
        "stations": ingest_stations(graph, text("stations"), system),
        "watersheds": ingest_geojson_layer(
            graph, text("watersheds"), "watershed", system),
        "landuse": ingest_geojson_layer(
            graph, text("landuse"), "landuse", system),
        "geometries": ingest_geojson_layer(
            graph, text("geometries"), "geometry", system),
        "quality": ingest_quality_data(graph, text("quality")),
    }
    dem_node = ingest_dem(graph, text("dem"), system)
    summary = run_drainage_pipeline(
        graph, threshold=manifest.threshold, tol=manifest.snap_tolerance,
        dem_node=dem_node, system=system)
    return {"reports": reports, "drainage": summary, "manifest": manifest}
