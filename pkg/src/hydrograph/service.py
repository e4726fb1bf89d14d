"""HTTP service: bearer-token auth, cached reads, uploads, queries, jobs.

Single middleware order per request: authenticate first, then consult the
response cache.  Only GET responses are cached (job polling excluded, since
job state changes without a graph write); any successful graph write clears
the whole cache.  One background worker executes jobs in submission order.
"""
from __future__ import annotations

import base64
import email.parser
import email.policy
import hashlib
import hmac
import itertools
import json
import os
import queue
import secrets as secrets_module
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from pydantic import Field as PydanticField

from .drainage import (
    delineate_watershed,
    fill_depressions,
    flow_direction_d8,
    run_drainage_pipeline,
)
from .errors import (
    HydrographError,
    InvalidCredentials,
    InvalidToken,
    UnknownJob,
    UnknownNode,
    UnknownStation,
    UnrecognizedFile,
)
from .geometry import Point, geometry_to_geojson
from .ingest import FileKind, ensure_system, ingest_auto, load_dem_node
from .queries import (
    QualityFilter,
    QualitySeries,
    export_quality_csv,
    filter_quality,
    q1_sources,
    q2_full_paths,
    q3_downstream_stations,
    q4_stations_same_watershed,
)
from .store import (
    EdgeType,
    Graph,
    NodeLabel,
    format_timestamp,
    parse_timestamp,
)

DEFAULT_TOKEN_TTL = 12 * 3600


@dataclass
class ServiceConfig:
    username: str = "admin"
    password: str = "admin"
    secret: str = ""
    token_ttl_seconds: int = DEFAULT_TOKEN_TTL
    snapshot_path: Optional[Path] = None

    @classmethod
    def from_env(cls, snapshot_path: Optional[Path] = None) -> "ServiceConfig":
        return cls(
            username=os.environ.get("HYDROGRAPH_USER", "admin"),
            password=os.environ.get("HYDROGRAPH_PASS", "admin"),
            secret=os.environ.get("HYDROGRAPH_SECRET", ""),
            snapshot_path=snapshot_path,
        )

    def __post_init__(self) -> None:
        if not self.secret:
            self.secret = secrets_module.token_hex(32)


# --- tokens -----------------------------------------------------------------

def _b64url(raw: bytes) -> str:
    return base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii")


def _unb64url(text: str) -> bytes:
    padding = "=" * (-len(text) % 4)
    return base64.urlsafe_b64decode(text + padding)


def issue_token(secret: str, username: str, ttl_seconds: int,
                now: Optional[datetime] = None) -> tuple[str, datetime]:
    """HS256-signed compact token with subject and expiry claims."""
    now = now or datetime.now(timezone.utc)
    expires = now + timedelta(seconds=ttl_seconds)
    header = _b64url(json.dumps(
        {"alg": "HS256", "typ": "JWT"}, separators=(",", ":")).encode())
    payload = _b64url(json.dumps(
        {"sub": username, "exp": int(expires.timestamp())},
        separators=(",", ":")).encode())
    signing_input = f"{header}.{payload}".encode("ascii")
    signature = hmac.new(secret.encode(), signing_input,
                         hashlib.sha256).digest()
    return f"{header}.{payload}.{_b64url(signature)}", expires


def verify_token(secret: str, token: str,
                 now: Optional[datetime] = None) -> dict:
    now = now or datetime.now(timezone.utc)
    parts = token.split(".")
    if len(parts) != 3:
        raise InvalidToken("malformed token")
    try:
        signing_input = f"{parts[0]}.{parts[1]}".encode("ascii")
        given = _unb64url(parts[2])
        payload = json.loads(_unb64url(parts[1]))
    except (ValueError, UnicodeEncodeError, json.JSONDecodeError):
        raise InvalidToken("undecodable token")
    expected = hmac.new(secret.encode(), signing_input,
                        hashlib.sha256).digest()
    if not hmac.compare_digest(expected, given):
        raise InvalidToken("bad signature")
    if not isinstance(payload, dict) or "exp" not in payload:
        raise InvalidToken("missing expiry")
    if now.timestamp() >= payload["exp"]:
        raise InvalidToken("token expired")
    return payload


# --- multipart --------------------------------------------------------------

def extract_upload(content_type: str, body: bytes) -> bytes:
    """First file part of a multipart body; non-multipart bodies are taken
    as the file itself."""
    if not content_type.lower().startswith("multipart/"):
        return body
    head = f"Content-Type: {content_type}\r\n\r\n".encode("latin-1")
    message = email.parser.BytesParser(
        policy=email.policy.default).parsebytes(head + body)
    fallback: Optional[bytes] = None
    for part in message.iter_parts():
        payload = part.get_payload(decode=True)
        if payload is None:
            continue
        if part.get_filename():
            return payload
        if fallback is None:
            fallback = payload
    if fallback is None:
        raise UnrecognizedFile("multipart body holds no file part")
    return fallback


# --- jobs -------------------------------------------------------------------

JOB_KINDS = ("drainage", "watershed")


@dataclass
class JobRecord:
    id: str
    kind: str
    params: dict
    state: str = "queued"
    result: Optional[dict] = None
    error: Optional[str] = None
    submitted: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc))
    started: Optional[datetime] = None
    finished: Optional[datetime] = None

    def to_dict(self) -> dict:
        def stamp(value):
            return None if value is None else format_timestamp(value)

        return {
            "id": self.id,
            "kind": self.kind,
            "params": self.params,
            "state": self.state,
            "result": self.result,
            "error": self.error,
            "submitted": stamp(self.submitted),
            "started": stamp(self.started),
            "finished": stamp(self.finished),
        }


class JobManager:
    """FIFO background execution, one job at a time.

    Handlers run outside any store lock until they mutate the graph, so
    read endpoints stay responsive during long drainage computations."""

    def __init__(self, graph: Graph, on_write) -> None:
        self._graph = graph
        self._on_write = on_write
        self._queue: queue.Queue = queue.Queue()
        self._jobs: dict[str, JobRecord] = {}
        self._lock = threading.Lock()
        self._counter = itertools.count(1)
        self._worker = threading.Thread(
            target=self._run_loop, name="hydrograph-jobs", daemon=True)
        self._worker.start()

    def submit(self, kind: str, params: dict) -> JobRecord:
        with self._lock:
            job = JobRecord(id=f"job-{next(self._counter)}",
                            kind=kind, params=params)
            self._jobs[job.id] = job
        self._queue.put(job.id)
        return job

    def get(self, job_id: str) -> JobRecord:
        with self._lock:
            if job_id not in self._jobs:
                raise UnknownJob(f"no job {job_id!r}")
            return self._jobs[job_id]

    def stop(self) -> None:
        self._queue.put(None)
        self._worker.join(timeout=5)

    def join_idle(self) -> None:
        """Block until every submitted job has finished; used by tests and
        the CLI, never on the request path."""
        self._queue.join()

    def _run_loop(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                self._queue.task_done()
                return
            job = self._jobs[job_id]
            job.state = "running"
            job.started = datetime.now(timezone.utc)
            try:
                job.result = self._execute(job)
                job.state = "done"
                self._on_write()
            except Exception as exc:
                job.error = f"{type(exc).__name__}: {exc}"
                job.state = "failed"
            finally:
                job.finished = datetime.now(timezone.utc)
                self._queue.task_done()

    def _execute(self, job: JobRecord) -> dict:
        if job.kind == "drainage":
            return run_drainage_pipeline(
                self._graph,
                threshold=job.params["threshold"],
                tol=job.params.get("tolerance", 0.003),
            )
        if job.kind == "watershed":
            return self._delineate(job.params)
        raise ValueError(f"unhandled job kind {job.kind!r}")

    def _delineate(self, params: dict) -> dict:
        graph = self._graph
        dem_node = _single_dem(graph)
        dem = load_dem_node(graph, dem_node)
        row, col = int(params["row"]), int(params["col"])
        dirs = flow_direction_d8(fill_depressions(dem))
        cells, outline = delineate_watershed(dirs, (row, col))
        domain_id = f"delineated-{row}-{col}"
        existing = graph.by_domain_id(NodeLabel.WATERSHED, domain_id)
        if existing is None:
            system = ensure_system(graph)
            node = graph.create_node(NodeLabel.WATERSHED, {
                "id": domain_id, "geometry": outline,
                "cell_count": len(cells)})
            graph.create_edge(EdgeType.HAS_WATERSHED, system, node)
        else:
            node = existing
        return {"watershed": node, "id": domain_id, "cells": len(cells)}


def _single_dem(graph: Graph) -> int:
    dems = list(graph.nodes_with_label(NodeLabel.DEM))
    if not dems:
        raise UnknownNode("no elevation grid ingested")
    return dems[-1]


# --- serialization helpers --------------------------------------------------

def _clean_props(props: dict) -> dict:
    out = {}
    for key, value in props.items():
        if key == "geometry" or key == "raster":
            continue
        if isinstance(value, datetime):
            out[key] = format_timestamp(value)
        else:
            out[key] = value
    return out


def _node_feature(graph: Graph, node_id: int) -> dict:
    node = graph.get_node(node_id)
    props = node.props
    if "geometry" in props:
        geometry = geometry_to_geojson(props["geometry"])
    elif "lon" in props and "lat" in props:
        geometry = geometry_to_geojson(Point(props["lon"], props["lat"]))
    else:
        geometry = None
    return {
        "type": "Feature",
        "id": node_id,
        "properties": {"node": node_id, "label": node.label.value,
                       **_clean_props(props)},
        "geometry": geometry,
    }


def _feature_collection(graph: Graph, label: NodeLabel) -> dict:
    features = [_node_feature(graph, node_id)
                for node_id in graph.nodes_with_label(label)]
    return {"type": "FeatureCollection", "features": features}


def _series_payload(series: QualitySeries) -> dict:
    entries = []
    for (station, parameter) in sorted(series.series):
        points = [{
            "timestamp": format_timestamp(p.timestamp),
            "value": p.value,
            "below_detection": p.below_detection,
            "depth": p.depth,
        } for p in series.series[(station, parameter)]]
        entries.append({"station": station, "parameter": parameter,
                        "points": points})
    return {"series": entries}


def _parse_filter(stations, parameters, time_from, time_to,
                  depth_min, depth_max) -> QualityFilter:
    return QualityFilter(
        stations=tuple(stations),
        parameters=tuple(parameters),
        time_from=None if time_from is None else parse_timestamp(time_from),
        time_to=None if time_to is None else parse_timestamp(time_to),
        depth_min=depth_min,
        depth_max=depth_max,
    )


# --- request models ---------------------------------------------------------

class TokenRequest(BaseModel):
    username: str
    password: str


class FilterRequest(BaseModel):
    model_config = {"populate_by_name": True}

    stations: list[str]
    params: list[str]
    time_from: Optional[str] = PydanticField(default=None, alias="from")
    time_to: Optional[str] = PydanticField(default=None, alias="to")
    depth_min: Optional[float] = None
    depth_max: Optional[float] = None


class JobRequest(BaseModel):
    kind: str
    params: dict = {}


# --- app factory ------------------------------------------------------------

def _error_status(exc: HydrographError) -> int:
    if isinstance(exc, (InvalidCredentials, InvalidToken)):
        return 401
    if isinstance(exc, (UnknownNode, UnknownJob, UnknownStation)):
        return 404
    if isinstance(exc, UnrecognizedFile):
        return 415
    return 422


RESOURCE_LABELS = {
    "systems": NodeLabel.WATER_SYSTEM,
    "waternodes": NodeLabel.WATER_NODE,
    "stations": NodeLabel.QUALITY_STATION,
    "watersheds": NodeLabel.WATERSHED,
    "landuse": NodeLabel.LAND_USE,
    "stretches": NodeLabel.WATER_STRETCH,
}


def create_app(graph: Optional[Graph] = None,
               config: Optional[ServiceConfig] = None) -> FastAPI:
    graph = graph if graph is not None else Graph()
    config = config or ServiceConfig.from_env()
    cache: dict[str, tuple[int, str, bytes]] = {}
    cache_lock = threading.Lock()

    def clear_cache() -> None:
        with cache_lock:
            cache.clear()

    def after_write() -> None:
        clear_cache()
        if config.snapshot_path is not None:
            graph.snapshot_save(config.snapshot_path)

    jobs = JobManager(graph, after_write)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        jobs.stop()

    app = FastAPI(title="hydrograph", lifespan=lifespan)
    app.state.graph = graph
    app.state.config = config
    app.state.jobs = jobs
    app.state.clear_cache = clear_cache

    @app.exception_handler(HydrographError)
    async def on_domain_error(request: Request, exc: HydrographError):
        return JSONResponse(status_code=_error_status(exc),
                            content={"detail": str(exc)})

    @app.middleware("http")
    async def auth_then_cache(request: Request, call_next):
        path = request.url.path
        if path == "/api/auth/token" or not path.startswith("/api"):
            return await call_next(request)
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            return JSONResponse(status_code=401,
                                content={"detail": "bearer token required"})
        try:
            verify_token(config.secret, header[7:])
        except InvalidToken as exc:
            return JSONResponse(status_code=401,
                                content={"detail": str(exc)})

        cacheable = (request.method == "GET"
                     and not path.startswith("/api/jobs"))
        key = ""
        if cacheable:
            canonical = "&".join(sorted(
                f"{k}={v}" for k, v in request.query_params.multi_items()))
            key = f"{path}?{canonical}"
            with cache_lock:
                hit = cache.get(key)
            if hit is not None:
                status, media_type, body = hit
                return Response(content=body, status_code=status,
                                media_type=media_type,
                                headers={"x-cache": "hit"})
        response = await call_next(request)
        if cacheable and response.status_code == 200:
            chunks = [chunk async for chunk in response.body_iterator]
            body = b"".join(chunks)
            media_type = response.headers.get("content-type", "")
            with cache_lock:
                cache[key] = (200, media_type, body)
            return Response(content=body, status_code=200,
                            media_type=media_type,
                            headers={"x-cache": "miss"})
        if cacheable:
            response.headers["x-cache"] = "miss"
        return response

    @app.post("/api/auth/token")
    def auth_token(body: TokenRequest):
        user_ok = hmac.compare_digest(
            body.username.encode(), config.username.encode())
        pass_ok = hmac.compare_digest(
            body.password.encode(), config.password.encode())
        if not (user_ok and pass_ok):
            raise InvalidCredentials("wrong username or password")
        token, expires = issue_token(config.secret, body.username,
                                     config.token_ttl_seconds)
        return {"token": token, "expires": format_timestamp(expires)}

    @app.post("/api/upload")
    async def upload(request: Request, kind: Optional[str] = None):
        body = await request.body()
        data = extract_upload(request.headers.get("content-type", ""), body)
        file_kind = None
        if kind is not None:
            try:
                file_kind = FileKind(kind)
            except ValueError:
                return JSONResponse(status_code=422, content={
                    "detail": f"unknown kind {kind!r}; expected one of "
                              + ", ".join(k.value for k in FileKind)})
        system = ensure_system(graph)
        report = ingest_auto(graph, data, system, kind=file_kind)
        after_write()
        return report.to_dict()

    @app.get("/api/query/q1")
    def query_q1(node: int):
        return {"paths": [list(p.nodes) for p in q1_sources(graph, node)]}

    @app.get("/api/query/q2")
    def query_q2(node: int):
        return {"paths": [list(p.nodes) for p in q2_full_paths(graph, node)]}

    @app.get("/api/query/q3")
    def query_q3(stretch: int):
        result = q3_downstream_stations(graph, stretch)
        return {"stations": [s for s, _ in result],
                "paths": [list(p.nodes) for _, p in result]}

    @app.get("/api/query/q4")
    def query_q4(landuse: int):
        return {"stations": q4_stations_same_watershed(graph, landuse)}

    @app.post("/api/quality/filter")
    def quality_filter(body: FilterRequest):
        flt = _parse_filter(body.stations, body.params, body.time_from,
                            body.time_to, body.depth_min, body.depth_max)
        return _series_payload(filter_quality(graph, flt))

    @app.get("/api/quality/export")
    def quality_export(stations: str, params: str,
                       time_from: Optional[str] = None,
                       time_to: Optional[str] = None,
                       depth_min: Optional[float] = None,
                       depth_max: Optional[float] = None):
        flt = _parse_filter(
            [s for s in stations.split(",") if s],
            [p for p in params.split(",") if p],
            time_from, time_to, depth_min, depth_max)
        payload = export_quality_csv(filter_quality(graph, flt))
        return Response(content=payload, media_type="text/csv")

    @app.post("/api/jobs")
    def submit_job(body: JobRequest):
        if body.kind not in JOB_KINDS:
            return JSONResponse(status_code=422, content={
                "detail": f"kind must be one of {JOB_KINDS}"})
        params = dict(body.params)
        if body.kind == "drainage":
            threshold = params.get("threshold")
            if not isinstance(threshold, int) or threshold < 1:
                return JSONResponse(status_code=422, content={
                    "detail": "drainage needs integer threshold >= 1"})
            _single_dem(graph)
        else:
            if not {"row", "col"} <= set(params):
                return JSONResponse(status_code=422, content={
                    "detail": "watershed needs row and col"})
            _single_dem(graph)
        return jobs.submit(body.kind, params).to_dict()

    @app.get("/api/jobs/{job_id}")
    def poll_job(job_id: str):
        return jobs.get(job_id).to_dict()

    @app.delete("/api/nodes/{node_id}")
    def delete_node(node_id: int):
        removed = graph.delete_node(node_id)
        after_write()
        return {"edges_removed": removed}

    @app.get("/api/{resource}")
    def resources(resource: str):
        if resource not in RESOURCE_LABELS:
            return JSONResponse(
                status_code=404,
                content={"detail": f"no such resource {resource!r}"})
        return _feature_collection(graph, RESOURCE_LABELS[resource])

    return app
