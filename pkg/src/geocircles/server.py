"""HTTP API over an immutable dataset snapshot with atomic hot reload.

Endpoints mirror the shared service-layer payload builders one-to-one; every
response carries an X-Dataset-Version content-hash header.
"""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import (
    GeocirclesError,
    OutOfCalendar,
    PopulationMissing,
    SeriesMissing,
    UnknownRegion,
    WindowTooLarge,
)
from .model import ScalingMethod
from .service import (
    BUILTIN_DEFAULTS,
    ServiceDefaults,
    SnapshotState,
    build_frame_payload,
    build_meta_payload,
    build_pick_payload,
    build_regions_payload,
    build_series_payload,
    build_threshold_payload,
    dump_json,
)
from .snapshot import load_snapshot

logger = logging.getLogger("geocircles.server")

ENV_HOST = "GEOCIRCLES_HOST"
ENV_PORT = "GEOCIRCLES_PORT"
ENV_DATA_DIR = "GEOCIRCLES_DATA_DIR"


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8040
    data_dir: Path = Path("data")
    refresh_seconds: float = 0.0  # 0 = never
    cors_origins: tuple[str, ...] = ()
    defaults: ServiceDefaults = BUILTIN_DEFAULTS

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port {self.port} outside [1, 65535]")
        if self.refresh_seconds < 0:
            raise ValueError("refresh_seconds must be >= 0")

    @classmethod
    def from_toml(cls, path: Union[str, Path]) -> "ServerConfig":
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
        base = BUILTIN_DEFAULTS
        defaults = ServiceDefaults(
            scale_method=ScalingMethod(raw.get("scale_method", base.scale_method.value)),
            base_radius_px=float(raw.get("base_radius_px", base.base_radius_px)),
            r_min_px=float(raw.get("r_min_px", base.r_min_px)),
            r_max_px=float(raw.get("r_max_px", base.r_max_px)),
            cluster_px=float(raw.get("cluster_px", base.cluster_px)),
            max_markers=int(raw["max_markers"]) if "max_markers" in raw else None,
        )
        config = cls(
            host=raw.get("host", cls.host),
            port=int(raw.get("port", cls.port)),
            data_dir=Path(raw.get("data_dir", "data")),
            refresh_seconds=float(raw.get("refresh_seconds", 0)),
            cors_origins=tuple(raw.get("cors_origins", ())),
            defaults=defaults,
        )
        return config.with_env_overrides()

    def with_env_overrides(self) -> "ServerConfig":
        if os.environ.get(ENV_HOST):
            self.host = os.environ[ENV_HOST]
        if os.environ.get(ENV_PORT):
            self.port = int(os.environ[ENV_PORT])
        if os.environ.get(ENV_DATA_DIR):
            self.data_dir = Path(os.environ[ENV_DATA_DIR])
        return self


class AppState:
    """Holds the current snapshot; replaced atomically on refresh."""

    def __init__(self, snapshot: Optional[SnapshotState] = None):
        self.snapshot = snapshot

    def swap_from(self, data_dir: Path) -> bool:
        """Reload from disk; keeps the old snapshot when content is unchanged.
        Returns True when a new version was swapped in."""
        dataset = load_snapshot(data_dir)
        current = self.snapshot
        if current is not None and current.version == dataset.version:
            return False
        self.snapshot = SnapshotState(dataset)
        return True


def _error_status(exc: Exception) -> int:
    if isinstance(exc, UnknownRegion):
        return 404
    if isinstance(exc, WindowTooLarge):
        return 422
    if isinstance(exc, (OutOfCalendar, SeriesMissing, PopulationMissing,
                        GeocirclesError, ValueError)):
        return 400
    return 500


def create_app(snapshot: Optional[SnapshotState] = None,
               config: Optional[ServerConfig] = None) -> FastAPI:
    app = FastAPI(title="geocircles", docs_url=None, redoc_url=None)
    state = AppState(snapshot)
    app.state.geocircles = state
    app.state.config = config

    if config is not None and config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["GET"],
            allow_headers=["*"],
        )

    if config is not None and config.refresh_seconds > 0:
        def refresher():
            while True:
                time.sleep(config.refresh_seconds)
                try:
                    if state.swap_from(config.data_dir):
                        logger.info("dataset refreshed: version %s",
                                    state.snapshot.version)
                except Exception:
                    logger.exception("refresh failed; keeping current dataset")

        threading.Thread(target=refresher, daemon=True,
                         name="geocircles-refresh").start()

    class _NoDataset(Exception):
        pass

    def current() -> SnapshotState:
        snap = state.snapshot
        if snap is None:
            raise _NoDataset()
        return snap

    def respond(snap: SnapshotState, payload) -> Response:
        return Response(
            content=dump_json(payload),
            media_type="application/json",
            headers={"X-Dataset-Version": snap.version},
        )

    def handle(request: Request, builder) -> Response:
        try:
            snap = current()
        except _NoDataset:
            return JSONResponse({"detail": "no dataset ingested yet"}, status_code=503)
        params = dict(request.query_params)
        try:
            payload = builder(snap, params)
        except Exception as exc:
            status = _error_status(exc)
            if status == 500:
                logger.exception("request failed")
                return JSONResponse({"detail": "internal error"}, status_code=500)
            return JSONResponse(
                {"detail": str(exc)}, status_code=status,
                headers={"X-Dataset-Version": snap.version})
        return respond(snap, payload)

    @app.get("/api/meta")
    def api_meta(request: Request):
        return handle(request, lambda snap, params: build_meta_payload(snap))

    @app.get("/api/regions")
    def api_regions(request: Request):
        def builder(snap, params):
            return build_regions_payload(snap, params.get("level"),
                                         params.get("q", ""))
        return handle(request, builder)

    defaults = config.defaults if config is not None else BUILTIN_DEFAULTS

    @app.get("/api/frame")
    def api_frame(request: Request):
        return handle(request, lambda snap, params:
                      build_frame_payload(snap, params, defaults))

    @app.get("/api/series")
    def api_series(request: Request):
        return handle(request, build_series_payload)

    @app.get("/api/pick")
    def api_pick(request: Request):
        return handle(request, lambda snap, params:
                      build_pick_payload(snap, params, defaults))

    @app.get("/api/threshold")
    def api_threshold(request: Request):
        return handle(request, build_threshold_payload)

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        started = time.monotonic()
        response = await call_next(request)
        logger.info("%s %s -> %d (%.1f ms)", request.method,
                    request.url.path, response.status_code,
                    (time.monotonic() - started) * 1000.0)
        return response

    return app


def run_server(config: ServerConfig) -> None:
    """Blocking entry point used by the CLI: load snapshot, serve until killed."""
    import uvicorn

    dataset = load_snapshot(config.data_dir)
    app = create_app(SnapshotState(dataset), config)
    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(name)s %(message)s")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
