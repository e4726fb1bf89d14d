"""Command-line interface: serve, ingest, query, drainage, export.

Exit codes: 0 success, 1 usage problems, 2 domain/data errors.
"""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Optional

import click

from .drainage import run_drainage_pipeline
from .errors import HydrographError, UnknownNode
from .ingest import FileKind, ensure_system, ingest_auto
from .queries import (
    QualityFilter,
    export_quality_csv,
    filter_quality,
    q1_sources,
    q2_full_paths,
    q3_downstream_stations,
    q4_stations_same_watershed,
)
from .store import Graph, NodeLabel, parse_timestamp


def _load_graph(db: Path, must_exist: bool = True) -> Graph:
    if db.exists():
        return Graph.snapshot_load(db)
    if must_exist:
        raise UnknownNode(f"no snapshot at {db}")
    return Graph()


def _resolve(graph: Graph, label: NodeLabel, ref: str) -> int:
    node = graph.by_domain_id(label, ref)
    if node is not None:
        return node
    if ref.isdigit() and graph.has_node(int(ref)):
        candidate = int(ref)
        if graph.get_node(candidate).label is label:
            return candidate
    raise UnknownNode(f"no {label.value} {ref!r}")


def _domain_ref(graph: Graph, node_id: int) -> str:
    props = graph.get_node(node_id).props
    return str(props.get("id", node_id))


def _echo_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


db_option = click.option(
    "--db", "db", type=click.Path(path_type=Path), required=True,
    help="Snapshot file backing the graph.")


@click.group()
def cli() -> None:
    """Water network graph tools."""


@cli.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--db", type=click.Path(path_type=Path), default=None,
              help="Snapshot to load at start and persist after writes.")
@click.option("--secret", "secret_var", default="HYDROGRAPH_SECRET",
              show_default=True,
              help="Environment variable holding the token-signing secret.")
def serve(port: int, host: str, db: Optional[Path], secret_var: str) -> None:
    """Run the HTTP API server."""
    import uvicorn

    from .service import ServiceConfig, create_app

    graph = _load_graph(db, must_exist=False) if db else Graph()
    config = ServiceConfig.from_env(snapshot_path=db)
    if os.environ.get(secret_var):
        config.secret = os.environ[secret_var]
    app = create_app(graph, config)
    uvicorn.run(app, host=host, port=port)


@cli.command()
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.option("--kind", type=click.Choice([k.value for k in FileKind]),
              default=None, help="Skip detection and force a file kind.")
@db_option
def ingest(file: Path, kind: Optional[str], db: Path) -> None:
    """Ingest FILE into the graph and persist the snapshot."""
    graph = _load_graph(db, must_exist=False)
    system = ensure_system(graph)
    file_kind = FileKind(kind) if kind else None
    report = ingest_auto(graph, file.read_bytes(), system, kind=file_kind)
    graph.snapshot_save(db)
    _echo_json(report.to_dict())


@cli.group()
def query() -> None:
    """Path and station queries."""


def _path_payload(graph: Graph, paths) -> dict:
    return {"paths": [[_domain_ref(graph, n) for n in p.nodes]
                      for p in paths]}


@query.command("q1")
@click.option("--node", required=True)
@db_option
def query_q1(node: str, db: Path) -> None:
    """All source-to-node paths over CONNECTED edges."""
    graph = _load_graph(db)
    target = _resolve(graph, NodeLabel.WATER_NODE, node)
    _echo_json(_path_payload(graph, q1_sources(graph, target)))


@query.command("q2")
@click.option("--node", required=True)
@db_option
def query_q2(node: str, db: Path) -> None:
    """All full source-to-sink paths through a node."""
    graph = _load_graph(db)
    target = _resolve(graph, NodeLabel.WATER_NODE, node)
    _echo_json(_path_payload(graph, q2_full_paths(graph, target)))


@query.command("q3")
@click.option("--stretch", required=True)
@db_option
def query_q3(stretch: str, db: Path) -> None:
    """Stations monitoring any stretch sharing a full flow path."""
    graph = _load_graph(db)
    target = _resolve(graph, NodeLabel.WATER_STRETCH, stretch)
    result = q3_downstream_stations(graph, target)
    _echo_json({
        "stations": [_domain_ref(graph, s) for s, _ in result],
        "paths": [[_domain_ref(graph, n) for n in p.nodes]
                  for _, p in result],
    })


@query.command("q4")
@click.option("--landuse", required=True)
@db_option
def query_q4(landuse: str, db: Path) -> None:
    """Stations in the same watershed as a land-use area."""
    graph = _load_graph(db)
    target = _resolve(graph, NodeLabel.LAND_USE, landuse)
    stations = q4_stations_same_watershed(graph, target)
    _echo_json({"stations": [_domain_ref(graph, s) for s in stations]})


@cli.command()
@click.option("--dem", default=None,
              help="DEM node domain id; defaults to the only ingested grid.")
@click.option("--threshold", required=True, type=click.IntRange(min=1),
              help="Accumulation threshold for stream extraction.")
@click.option("--tolerance", default=0.003, show_default=True, type=float,
              help="Station snapping tolerance in degrees.")
@db_option
def drainage(dem: Optional[str], threshold: int, tolerance: float,
             db: Path) -> None:
    """Run drainage analysis and persist the results."""
    graph = _load_graph(db)
    dem_node = None
    if dem is not None:
        dem_node = _resolve(graph, NodeLabel.DEM, dem)
    summary = run_drainage_pipeline(graph, threshold=threshold,
                                    tol=tolerance, dem_node=dem_node)
    graph.snapshot_save(db)
    _echo_json(summary)


@cli.command()
@click.option("--stations", required=True,
              help="Comma-separated station ids.")
@click.option("--params", required=True,
              help="Comma-separated parameter names.")
@click.option("--from", "time_from", default=None,
              help="Inclusive ISO 8601 lower time bound.")
@click.option("--to", "time_to", default=None,
              help="Inclusive ISO 8601 upper time bound.")
@click.option("--depth-min", type=float, default=None)
@click.option("--depth-max", type=float, default=None)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output file; stdout when omitted.")
@db_option
def export(stations: str, params: str, time_from: Optional[str],
           time_to: Optional[str], depth_min: Optional[float],
           depth_max: Optional[float], out: Optional[Path],
           db: Path) -> None:
    """Export filtered quality series as long-format CSV."""
    graph = _load_graph(db)
    try:
        flt = QualityFilter(
            stations=tuple(s for s in stations.split(",") if s),
            parameters=tuple(p for p in params.split(",") if p),
            time_from=parse_timestamp(time_from) if time_from else None,
            time_to=parse_timestamp(time_to) if time_to else None,
            depth_min=depth_min,
            depth_max=depth_max,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    payload = export_quality_csv(filter_quality(graph, flt))
    if out is None:
        sys.stdout.buffer.write(payload)
    else:
        out.write_bytes(payload)
        click.echo(f"wrote {len(payload)} bytes to {out}")


def main() -> int:
    try:
        cli.main(standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except HydrographError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
