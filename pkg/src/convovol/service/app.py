from __future__ import annotations

import os

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from .. import canonical
from ..longitudinal import UnknownStudent, student_trend
from ..metrics import Config
from ..report import cohort_report, emit_meeting_json, trend_report
from ..store import (
    CorpusStore,
    StorageFailure,
    UnknownMeeting,
    UnknownSpeakers,
    open_store,
)
from ..volatility import Segment
from ..vtt import TranscriptError
from .schemas import (
    ApiError,
    Health,
    MeetingCreate,
    MeetingCreated,
    ParseWarning,
    TranscriptAccepted,
)

MAX_UPLOAD_BYTES = 10 * 1024 * 1024


class ApiException(Exception):
    def __init__(self, status: int, code: str, message: str, diagnostics=()):
        self.error = ApiError(status=status, code=code, message=message,
                              diagnostics=[ParseWarning(line=ln, message=msg) for ln, msg in diagnostics])


def _error_response(error: ApiError) -> JSONResponse:
    return JSONResponse(status_code=error.status, content=error.model_dump())


def _canonical_response(doc: dict) -> Response:
    return Response(content=canonical.dumps(doc), media_type="application/json")


def create_app(root: str | os.PathLike, config: Config | None = None,
               max_upload_bytes: int = MAX_UPLOAD_BYTES) -> FastAPI:
    """Build the API over the corpus at ``root``.

    ``config`` overrides analysis settings; otherwise the corpus's own
    config.json applies, exactly as for the CLI.
    """
    store: CorpusStore = open_store(root)
    overrides = config.analysis_settings() if config is not None else {}

    def current_config() -> Config:
        return store.config(**overrides)

    app = FastAPI(title="convovol", version="0.1.0")

    @app.exception_handler(ApiException)
    async def _api_error(request: Request, exc: ApiException):
        return _error_response(exc.error)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        message = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors())
        return _error_response(ApiError(status=422, code="parse_failure", message=message))

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException):
        return _error_response(ApiError(status=exc.status_code, code="internal", message=str(exc.detail)))

    @app.exception_handler(StorageFailure)
    async def _storage_error(request: Request, exc: StorageFailure):
        return _error_response(ApiError(status=500, code="internal", message=str(exc)))

    @app.get("/healthz", response_model=Health)
    def healthz():
        return Health(schema_version=canonical.SCHEMA_VERSION)

    @app.post("/meetings", status_code=201, response_model=MeetingCreated)
    def register(body: MeetingCreate):
        meeting_id = store.register_meeting(body.date, body.course, split_point=body.split_point,
                                            video_link=body.video_link)
        return MeetingCreated(meeting_id=meeting_id)

    @app.put("/meetings/{meeting_id}/transcript", response_model=TranscriptAccepted)
    async def attach(meeting_id: str, request: Request):
        declared = request.headers.get("content-length")
        if declared and declared.isdigit() and int(declared) > max_upload_bytes:
            raise ApiException(413, "parse_failure", f"transcript exceeds {max_upload_bytes} bytes")
        raw = await request.body()
        if len(raw) > max_upload_bytes:
            raise ApiException(413, "parse_failure", f"transcript exceeds {max_upload_bytes} bytes")
        try:
            document = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ApiException(422, "parse_failure", f"transcript is not UTF-8: {exc}") from None
        try:
            report = store.attach_transcript(meeting_id, document)
        except UnknownMeeting:
            raise ApiException(404, "unknown_meeting", f"unknown meeting {meeting_id!r}") from None
        except TranscriptError as exc:
            diagnostics = list(exc.warnings) or ([(exc.line, str(exc))] if exc.line else [])
            raise ApiException(422, "parse_failure", f"{type(exc).__name__}: {exc}", diagnostics) from None
        except UnknownSpeakers as exc:
            raise ApiException(409, "conflict", str(exc)) from None
        return TranscriptAccepted(
            meeting_id=meeting_id,
            n_cues=len(report.cues),
            warnings=[ParseWarning(line=ln, message=msg) for ln, msg in report.warnings],
        )

    @app.get("/meetings/{meeting_id}/metrics")
    def metrics(meeting_id: str):
        try:
            result, _ = store.meeting_metrics(meeting_id, current_config())
        except UnknownMeeting:
            raise ApiException(404, "unknown_meeting", f"unknown meeting {meeting_id!r}") from None
        except TranscriptError as exc:
            raise ApiException(422, "parse_failure", f"stored transcript unreadable: {exc}") from None
        return Response(content=emit_meeting_json(result), media_type="application/json")

    @app.get("/students/{student_id}/trend")
    def trend(student_id: str, segment: str = "whole"):
        try:
            seg = Segment.parse(segment)
        except ValueError as exc:
            raise ApiException(422, "parse_failure", str(exc)) from None
        loaded = store.load_corpus(current_config())
        try:
            result = student_trend(loaded.corpus, student_id, seg)
        except UnknownStudent:
            raise ApiException(404, "unknown_student", f"unknown student {student_id!r}") from None
        return _canonical_response(trend_report(result, loaded.corpus.config.describe()))

    @app.get("/cohort/summary")
    def cohort(segment: str = "whole"):
        try:
            seg = Segment.parse(segment)
        except ValueError as exc:
            raise ApiException(422, "parse_failure", str(exc)) from None
        loaded = store.load_corpus(current_config())
        doc = cohort_report(loaded.corpus, seg)
        doc["failures"] = dict(loaded.failures)
        doc["pending"] = list(loaded.pending)
        return _canonical_response(doc)

    return app


def app_from_env() -> FastAPI:
    """Factory for ``uvicorn --factory``; reads the corpus root from CONVO_CORPUS."""
    return create_app(os.environ["CONVO_CORPUS"])
