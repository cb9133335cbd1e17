"""Request and response bodies for the HTTP API."""

from __future__ import annotations

import datetime as dt
from typing import Literal

from pydantic import BaseModel, Field

ErrorCode = Literal["unknown_meeting", "unknown_student", "parse_failure", "conflict", "internal"]


class MeetingCreate(BaseModel):
    date: dt.date
    course: str = Field(min_length=1)
    split_point: float | None = Field(default=None, ge=0)
    video_link: str | None = None


class MeetingCreated(BaseModel):
    meeting_id: str


class ParseWarning(BaseModel):
    line: int
    message: str


class TranscriptAccepted(BaseModel):
    meeting_id: str
    n_cues: int
    warnings: list[ParseWarning]


class Health(BaseModel):
    status: str = "ok"
    schema_version: int


class ApiError(BaseModel):
    status: int
    code: ErrorCode
    message: str
    diagnostics: list[ParseWarning] = []
