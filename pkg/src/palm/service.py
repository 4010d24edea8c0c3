"""HTTP service exposing map views, hover cards, ingestion, and survey analysis.

Read endpoints never mutate state.  Ingestion is serialized by a writer
lock and publishes through the store's atomic pointer swap, so serving
continues uninterrupted while new data lands.  Every JSON response carries
the snapshot id it was derived from (null where no snapshot applies) so
clients can detect staleness.
"""

from __future__ import annotations

import logging
import os
import sys
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, Header, HTTPException, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import composer, relevance, stats
from .engagement import (
    GRADE_MODES,
    LAYERS,
    METRICS,
    DisplaySettings,
    UnknownCourseError,
    hover_payload,
)
from .ingestion import (
    GradeScale,
    ParseError,
    parse_engagement_csv,
    parse_grade_scale,
    parse_grades_csv,
    parse_layout,
)
from .store import SnapshotStore

logger = logging.getLogger(__name__)

ADMIN_TOKEN_HEADER = "X-Admin-Token"

ENV_STORE = "PALM_STORE"
ENV_PORT = "PALM_PORT"
ENV_ADMIN_TOKEN = "PALM_ADMIN_TOKEN"


@dataclass(frozen=True)
class ServiceConfig:
    store_path: Path = Path("store")
    listen_port: int = 8000
    admin_token: str | None = None
    grade_scale_path: Path | None = None
    cors_allowed_origins: tuple[str, ...] = ("*",)
    snapshot: composer.SnapshotConfig = field(default_factory=composer.SnapshotConfig)

    @classmethod
    def load(
        cls,
        config_file: str | Path | None = None,
        env: Mapping[str, str] | None = None,
    ) -> "ServiceConfig":
        """Defaults, overlaid by the config file, overlaid by environment."""
        env = os.environ if env is None else env
        config = cls()
        if config_file is not None:
            with open(config_file, "rb") as fh:
                doc = tomllib.load(fh)
            snapshot = composer.SnapshotConfig.from_dict(doc)
            config = cls(
                store_path=Path(doc.get("store", config.store_path)),
                listen_port=int(doc.get("port", config.listen_port)),
                admin_token=doc.get("admin_token", config.admin_token),
                grade_scale_path=(
                    Path(doc["grade_scale"]) if "grade_scale" in doc else None
                ),
                cors_allowed_origins=tuple(
                    doc.get("cors_allowed_origins", config.cors_allowed_origins)
                ),
                snapshot=snapshot,
            )
        if env.get(ENV_STORE):
            config = replace(config, store_path=Path(env[ENV_STORE]))
        if env.get(ENV_PORT):
            config = replace(config, listen_port=int(env[ENV_PORT]))
        if env.get(ENV_ADMIN_TOKEN):
            config = replace(config, admin_token=env[ENV_ADMIN_TOKEN])
        return config


def _parse_csv_param(raw: str | None, allowed: tuple[str, ...], what: str) -> frozenset[str]:
    if raw is None or raw.strip() == "":
        return frozenset(allowed)
    names = [part.strip() for part in raw.split(",") if part.strip()]
    unknown = [n for n in names if n not in allowed]
    if unknown:
        raise HTTPException(
            status_code=400, detail=f"unknown {what}: {unknown}; allowed: {list(allowed)}"
        )
    return frozenset(names)


def _settings_from_params(
    layers: str | None, metrics: str | None, grade_mode: str | None
) -> DisplaySettings:
    mode = grade_mode if grade_mode not in (None, "") else "letter"
    if mode not in GRADE_MODES:
        raise HTTPException(
            status_code=400, detail=f"unknown grade_mode '{mode}'; allowed: {list(GRADE_MODES)}"
        )
    try:
        return DisplaySettings(
            metrics_included=_parse_csv_param(metrics, METRICS, "metrics"),
            grade_mode=mode,
            show_layers=_parse_csv_param(layers, LAYERS, "layers"),
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


class AnalyzeRequest(BaseModel):
    instrument: str | dict
    pre_csv: str
    post_csv: str
    alpha_normality: float = 0.05


def _resolve_instrument(spec: str | dict) -> stats.InstrumentDefinition:
    try:
        if isinstance(spec, str):
            return stats.get_instrument(spec)
        return stats.InstrumentDefinition.from_dict(spec)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="palm", version="0.1.0")
    if config.cors_allowed_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_allowed_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    store = SnapshotStore(config.store_path)
    app.state.config = config
    app.state.store = store
    app.state.writer_lock = threading.Lock()
    # Cache keyed by snapshot id: readers during a publish keep the old one.
    app.state.snapshot_cache: tuple[str, composer.MapSnapshot] | None = None

    def current_snapshot() -> composer.MapSnapshot:
        snapshot_id = store.current_id()
        if snapshot_id is None:
            raise HTTPException(status_code=503, detail="no snapshot has been published yet")
        cached = app.state.snapshot_cache
        if cached is not None and cached[0] == snapshot_id:
            return cached[1]
        snapshot = store.load(snapshot_id)
        app.state.snapshot_cache = (snapshot_id, snapshot)
        return snapshot

    @app.get("/api/v1/map")
    def get_map(
        student: str | None = None,
        layers: str | None = None,
        metrics: str | None = None,
        grade_mode: str | None = None,
    ):
        snapshot = current_snapshot()
        settings = _settings_from_params(layers, metrics, grade_mode)
        return JSONResponse(composer.view(snapshot, student, settings).to_dict())

    @app.get("/api/v1/courses/{course_id}")
    def get_course(
        course_id: str,
        student: str | None = None,
        metrics: str | None = None,
        grade_mode: str | None = None,
    ):
        snapshot = current_snapshot()
        settings = _settings_from_params(None, metrics, grade_mode)
        grade_records = [
            g for by_course in snapshot.grades.values() for g in by_course.values()
        ]
        try:
            card = hover_payload(
                snapshot.layout,
                snapshot.relevance,
                snapshot.engagement_records,
                grade_records,
                course_id,
                student_id=student,
                settings=settings,
                cohort_filter=snapshot.config.cohort_filter(),
                min_cohort_n=snapshot.config.min_cohort_n,
            )
        except UnknownCourseError:
            raise HTTPException(status_code=404, detail=f"unknown course '{course_id}'") from None
        payload = card.to_dict()
        payload["snapshot_id"] = snapshot.snapshot_id
        return JSONResponse(payload)

    @app.post("/api/v1/ingest", status_code=201)
    def ingest(
        layout: UploadFile,
        engagement: UploadFile | None = None,
        grades: UploadFile | None = None,
        grade_scale: UploadFile | None = None,
        x_admin_token: str | None = Header(default=None, alias=ADMIN_TOKEN_HEADER),
    ):
        if config.admin_token is None or x_admin_token != config.admin_token:
            raise HTTPException(status_code=401, detail="missing or invalid admin token")

        errors: list[dict] = []
        parsed_layout = None
        try:
            parsed_layout = parse_layout(layout.file.read())
        except ParseError as exc:
            errors.append({"file": "layout", "location": exc.location, "message": exc.message})

        scale: GradeScale | None = None
        if grade_scale is not None:
            try:
                scale = parse_grade_scale(grade_scale.file.read())
            except ParseError as exc:
                errors.append(
                    {"file": "grade_scale", "location": exc.location, "message": exc.message}
                )
        elif config.grade_scale_path is not None:
            scale = parse_grade_scale(Path(config.grade_scale_path).read_bytes())
        if grades is not None and scale is None:
            errors.append(
                {
                    "file": "grades",
                    "location": None,
                    "message": "grades provided but no grade scale is configured or uploaded",
                }
            )
        if errors:
            raise HTTPException(status_code=422, detail={"errors": errors})
        assert parsed_layout is not None
        known = parsed_layout.course_ids()

        engagement_records: tuple = ()
        engagement_rejects: list[dict] = []
        if engagement is not None:
            try:
                parse = parse_engagement_csv(engagement.file.read(), known)
            except ParseError as exc:
                raise HTTPException(
                    status_code=422,
                    detail={
                        "errors": [
                            {
                                "file": "engagement",
                                "location": exc.location,
                                "message": exc.message,
                            }
                        ]
                    },
                ) from exc
            engagement_records = parse.records
            engagement_rejects = [{"line": r.line, "reason": r.reason} for r in parse.rejects]

        grade_records: tuple = ()
        grade_rejects: list[dict] = []
        if grades is not None and scale is not None:
            try:
                parse = parse_grades_csv(grades.file.read(), scale, known)
            except ParseError as exc:
                raise HTTPException(
                    status_code=422,
                    detail={
                        "errors": [
                            {"file": "grades", "location": exc.location, "message": exc.message}
                        ]
                    },
                ) from exc
            grade_records = parse.records
            grade_rejects = [{"line": r.line, "reason": r.reason} for r in parse.rejects]

        snapshot_config = config.snapshot
        policy = snapshot_config.render_policy()
        corpus = parsed_layout.syllabus_corpus()
        if len(corpus) >= 2:
            vectors = relevance.build_tfidf(corpus, mode=snapshot_config.tokenizer_mode)
            graph = relevance.build_graph(vectors, policy)
        else:
            graph = relevance.RelevanceGraph(policy=policy, edges=())

        with app.state.writer_lock:
            snapshot = composer.compose(
                parsed_layout, graph, engagement_records, grade_records, snapshot_config
            )
            store.save(snapshot)
            store.publish(snapshot.snapshot_id)
        logger.info("published snapshot %s", snapshot.snapshot_id)
        return {
            "snapshot_id": snapshot.snapshot_id,
            "counts": {
                "courses": len(parsed_layout.courses),
                "relevance_edges": len(graph.edges),
                "engagement_records": len(engagement_records),
                "grade_records": len(grade_records),
            },
            "rejects": {"engagement": engagement_rejects, "grades": grade_rejects},
        }

    @app.post("/api/v1/analyze/survey")
    def analyze_survey(body: AnalyzeRequest):
        instrument = _resolve_instrument(body.instrument)
        try:
            pre, post = stats.parse_survey_pair(
                body.pre_csv.encode("utf-8"), body.post_csv.encode("utf-8"), instrument
            )
        except ParseError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        reports = stats.run_comparison(pre, post, instrument, body.alpha_normality)
        return {
            "snapshot_id": store.current_id(),
            "instrument_id": instrument.instrument_id,
            "sd_basis": stats.SD_BASIS,
            "reports": stats.reports_to_json(reports),
        }

    @app.exception_handler(ParseError)
    def parse_error_handler(_request: Request, exc: ParseError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    return app
