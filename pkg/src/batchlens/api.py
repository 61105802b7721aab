"""Read-only HTTP JSON API over a loaded trace bundle.

The store is built once at startup and shared by all requests; nothing
mutates the bundle directory. All endpoints are GET and deterministic:
the same query against the same bundle returns byte-identical bodies.

    /healthz                      liveness + manifest
    /manifest                     bundle manifest
    /timeline                     cluster-wide mean/min/max per metric
    /snapshot?t=                  job/task/machine hierarchy at t
    /layout?t=&machine_radius=..  packed-circle geometry for the hierarchy
    /jobs                         job summaries
    /jobs/{id}/series             per-machine series bundle, downsampled
    /machines/{id}/series         single machine series, downsampled
    /links?t=                     machines running >= 2 jobs at t
    /anomalies?from=&to=          detector scan over a window
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .anomaly import DetectorConfig, scan_window
from .errors import BatchLensError, NotFoundError
from .ingest import load_bundle
from .layout import LayoutStyle, build_snapshot, layout_snapshot
from .series import (
    METRIC_FIELDS,
    brush_slice,
    cluster_timeline,
    downsample,
    job_series_bundle,
    machine_series,
)
from .store import TimeWindow, TraceStore, build_store

ENV_ADDR = "BATCHLENS_ADDR"
ENV_BUNDLE = "BATCHLENS_BUNDLE"
ENV_POINTS = "BATCHLENS_POINTS"


@dataclass
class ServiceConfig:
    bind_address: str = "127.0.0.1:8000"
    bundle_path: str = "."
    detector_config: DetectorConfig = field(default_factory=DetectorConfig)
    default_downsample_points: int = 500
    cors_allowed_origin: str | None = None

    def __post_init__(self):
        if self.default_downsample_points < 2:
            raise ValueError("default_downsample_points must be >= 2")

    @classmethod
    def load(cls, config_file: str | Path | None = None) -> "ServiceConfig":
        """Flat key/value JSON config; environment variables win."""
        raw: dict = {}
        if config_file is not None:
            raw = json.loads(Path(config_file).read_text("utf-8"))
        cfg = cls(
            bind_address=raw.get("bind_address", cls.bind_address),
            bundle_path=raw.get("bundle_path", cls.bundle_path),
            detector_config=DetectorConfig.from_dict(raw.get("detector_config", {})),
            default_downsample_points=int(raw.get("default_downsample_points", 500)),
            cors_allowed_origin=raw.get("cors_allowed_origin"),
        )
        if os.environ.get(ENV_ADDR):
            cfg.bind_address = os.environ[ENV_ADDR]
        if os.environ.get(ENV_BUNDLE):
            cfg.bundle_path = os.environ[ENV_BUNDLE]
        if os.environ.get(ENV_POINTS):
            cfg.default_downsample_points = int(os.environ[ENV_POINTS])
        return cfg


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _int_param(request: Request, name: str, default: int | None = None) -> int:
    raw = request.query_params.get(name)
    if raw is None:
        if default is None:
            raise ApiError(400, "INVALID_PARAM", f"missing required parameter {name!r}")
        return default
    try:
        return int(raw)
    except ValueError:
        raise ApiError(400, "INVALID_PARAM", f"parameter {name!r} must be an integer") from None


def _float_param(request: Request, name: str, default: float) -> float:
    raw = request.query_params.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ApiError(400, "INVALID_PARAM", f"parameter {name!r} must be a number") from None


def _metric_param(request: Request) -> str:
    metric = request.query_params.get("metric", "cpu")
    if metric not in METRIC_FIELDS:
        raise ApiError(400, "INVALID_PARAM",
                       f"unknown metric {metric!r}; expected one of {sorted(METRIC_FIELDS)}")
    return metric


def _window_params(request: Request, store: TraceStore) -> TimeWindow:
    t_from = _int_param(request, "from", store.horizon.t_from)
    t_to = _int_param(request, "to", store.horizon.t_to)
    if t_from >= t_to:
        raise ApiError(422, "INVALID_PARAM", f"empty window [{t_from}, {t_to})")
    return TimeWindow(t_from, t_to)


def _series_bundle_payload(bundle, downsampled) -> dict:
    d = bundle.to_dict()
    d["series"] = [s.to_dict() for s in downsampled]
    return d


def create_app(store: TraceStore, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="batchlens", docs_url=None, redoc_url=None)

    def _respond(payload, status: int = 200) -> JSONResponse:
        headers = {}
        if config.cors_allowed_origin:
            headers["Access-Control-Allow-Origin"] = config.cors_allowed_origin
        return JSONResponse(payload, status_code=status, headers=headers)

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return _respond(
            {"status": exc.status, "code": exc.code, "message": exc.message},
            status=exc.status,
        )

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return _respond({"status": 404, "code": exc.code, "message": str(exc)}, status=404)

    @app.exception_handler(BatchLensError)
    async def _domain_error(request: Request, exc: BatchLensError):
        return _respond({"status": 422, "code": exc.code, "message": str(exc)}, status=422)

    @app.get("/healthz")
    def healthz():
        return _respond({"status": "ok", "manifest": store.manifest.to_dict()})

    @app.get("/manifest")
    def manifest():
        return _respond(store.manifest.to_dict())

    @app.get("/timeline")
    def timeline(request: Request):
        metric = _metric_param(request)
        resolution = _int_param(request, "resolution", store.manifest.usage_resolution_s)
        try:
            agg = cluster_timeline(store, metric, resolution)
        except ValueError as exc:
            raise ApiError(422, "INVALID_PARAM", str(exc)) from None
        return _respond(agg.to_dict())

    @app.get("/snapshot")
    def snapshot(request: Request):
        t = _int_param(request, "t")
        return _respond(build_snapshot(store, t).to_dict())

    @app.get("/layout")
    def layout(request: Request):
        t = _int_param(request, "t")
        try:
            style = LayoutStyle(
                machine_radius=_float_param(request, "machine_radius", 10.0),
                task_padding=_float_param(request, "task_padding", 0.15),
                job_padding=_float_param(request, "job_padding", 0.15),
                root_spacing=_float_param(request, "root_spacing", 0.25),
            )
        except ValueError as exc:
            raise ApiError(422, "INVALID_PARAM", str(exc)) from None
        tree = layout_snapshot(build_snapshot(store, t), style)
        return _respond(tree.to_dict())

    @app.get("/jobs")
    def jobs():
        return _respond([
            {
                "job_id": s.job_id,
                "task_count": s.task_count,
                "instance_count": s.instance_count,
                "start_ts": s.start_ts,
                "end_ts": s.end_ts,
                "machine_count": len(s.machine_set),
            }
            for _, s in sorted(store.jobs.items())
        ])

    @app.get("/jobs/{job_id}/series")
    def job_series(job_id: str, request: Request):
        metric = _metric_param(request)
        window = _window_params(request, store)
        points = _int_param(request, "points", config.default_downsample_points)
        if points < 2:
            raise ApiError(422, "INVALID_PARAM", "points must be >= 2")
        bundle = job_series_bundle(store, job_id, metric, window)
        bundle = brush_slice(bundle, window)
        downsampled = tuple(downsample(s, points) for s in bundle.series)
        return _respond(_series_bundle_payload(bundle, downsampled))

    @app.get("/machines/{machine_id}/series")
    def machine_series_endpoint(machine_id: str, request: Request):
        metric = _metric_param(request)
        window = _window_params(request, store)
        points = _int_param(request, "points", config.default_downsample_points)
        if points < 2:
            raise ApiError(422, "INVALID_PARAM", "points must be >= 2")
        series = machine_series(store, machine_id, metric, window)
        return _respond(downsample(series, points).to_dict())

    @app.get("/links")
    def links(request: Request):
        t = _int_param(request, "t")
        return _respond({
            "timestamp": t,
            "out_of_range": not store.in_horizon(t),
            "machines": store.multi_job_machines_at(t),
        })

    @app.get("/anomalies")
    def anomalies(request: Request):
        window = _window_params(request, store)
        events = scan_window(store, window, config.detector_config)
        return _respond({"events": [e.to_dict() for e in events]})

    return app


def build_store_from_config(config: ServiceConfig) -> TraceStore:
    bundle, report = load_bundle(config.bundle_path)
    if not report.ok:
        raise BatchLensError(f"bundle failed validation:\n{report.summary()}")
    return build_store(bundle)


def serve(config: ServiceConfig) -> None:
    """Blocking entry point: load the bundle, build the store, serve HTTP."""
    import uvicorn

    store = build_store_from_config(config)
    app = create_app(store, config)
    host, _, port = config.bind_address.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
