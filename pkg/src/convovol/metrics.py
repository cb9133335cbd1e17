"""Analysis configuration and the per-meeting metrics record."""

from __future__ import annotations

import dataclasses
import datetime as dt
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from . import canonical
from .conversation import (
    DEFAULT_GAP_THRESHOLD,
    Meeting,
    NoSpeech,
    participation_shares,
    speech_ms,
    split_point_ms,
)
from .turn_taking import TransitionMatrix, transition_counts
from .volatility import SAMPLE, STDDEV_MODES, Segment, segmented_cvs

SPLIT_RULES = ("midpoint", "explicit")
OUTPUT_FORMATS = ("json", "csv", "html")
SEGMENTS = tuple(Segment)


@dataclass(frozen=True)
class Config:
    gap_threshold: float = DEFAULT_GAP_THRESHOLD
    stddev_mode: str = SAMPLE
    # "explicit" uses a meeting's recorded split point and falls back to the midpoint
    split_rule: str = "explicit"
    output_format: str = "json"
    corpus_root: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.gap_threshold < 0:
            raise ValueError("gap_threshold must be >= 0")
        if self.stddev_mode not in STDDEV_MODES:
            raise ValueError(f"stddev_mode must be one of {STDDEV_MODES}")
        if self.split_rule not in SPLIT_RULES:
            raise ValueError(f"split_rule must be one of {SPLIT_RULES}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"output_format must be one of {OUTPUT_FORMATS}")

    def analysis_settings(self) -> dict:
        return {
            "gap_threshold": float(self.gap_threshold),
            "split_rule": self.split_rule,
            "stddev_mode": self.stddev_mode,
        }

    @property
    def fingerprint(self) -> str:
        blob = canonical.dumps(self.analysis_settings()).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def describe(self) -> dict:
        return {**self.analysis_settings(), "fingerprint": self.fingerprint}

    def merged(self, **overrides) -> Config:
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> Config:
        """Built-in defaults, then the file's values, then non-None overrides."""
        values = {}
        path = Path(path)
        if path.exists():
            data = json.loads(path.read_text(encoding="utf-8"))
            names = {f.name for f in dataclasses.fields(cls)}
            values = {k: v for k, v in data.items() if k in names}
        return cls(**values).merged(**overrides)


@dataclass(frozen=True)
class SpeakerMetrics:
    share: float | None
    speech_s: float
    n_utterances: int
    icv: dict[Segment, float | None]


@dataclass(frozen=True)
class MeetingMetrics:
    meeting_id: str
    participants: tuple[str, ...]
    speakers: dict[str, SpeakerMetrics]
    mcv: dict[Segment, float | None]
    transitions: TransitionMatrix
    n_utterances: int
    duration_s: float
    split_s: float | None
    config: dict
    date: str | None = None
    course_tag: str | None = None

    @property
    def fingerprint(self) -> str:
        return self.config["fingerprint"]

    def icv(self, speaker_id: str, segment: Segment = Segment.WHOLE) -> float | None:
        return self.speakers[speaker_id].icv[Segment(segment)]

    def share(self, speaker_id: str) -> float | None:
        return self.speakers[speaker_id].share

    def to_dict(self) -> dict:
        return {
            "schema_version": canonical.SCHEMA_VERSION,
            "meeting_id": self.meeting_id,
            "date": self.date,
            "course_tag": self.course_tag,
            "config": dict(self.config),
            "participants": list(self.participants),
            "shares": [self.speakers[p].share for p in self.participants],
            "speakers": [
                {
                    "speaker": p,
                    "share": s.share,
                    "speech_s": s.speech_s,
                    "n_utterances": s.n_utterances,
                    "icv": {seg.value: s.icv[seg] for seg in SEGMENTS},
                }
                for p, s in ((p, self.speakers[p]) for p in self.participants)
            ],
            "mcv": {seg.value: self.mcv[seg] for seg in SEGMENTS},
            "transitions": {
                "speakers": list(self.transitions.speakers),
                "counts": [list(row) for row in self.transitions.counts],
            },
            "n_utterances": self.n_utterances,
            "duration_s": self.duration_s,
            "split_s": self.split_s,
        }

    @classmethod
    def from_dict(cls, data: dict) -> MeetingMetrics:
        if data.get("schema_version") != canonical.SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {data.get('schema_version')!r}")
        speakers = {
            row["speaker"]: SpeakerMetrics(
                share=row["share"],
                speech_s=row["speech_s"],
                n_utterances=row["n_utterances"],
                icv={seg: row["icv"][seg.value] for seg in SEGMENTS},
            )
            for row in data["speakers"]
        }
        return cls(
            meeting_id=data["meeting_id"],
            participants=tuple(data["participants"]),
            speakers=speakers,
            mcv={seg: data["mcv"][seg.value] for seg in SEGMENTS},
            transitions=TransitionMatrix(
                tuple(data["transitions"]["speakers"]),
                tuple(tuple(r) for r in data["transitions"]["counts"]),
            ),
            n_utterances=data["n_utterances"],
            duration_s=data["duration_s"],
            split_s=data["split_s"],
            config=data["config"],
            date=data.get("date"),
            course_tag=data.get("course_tag"),
        )

    def canonical(self) -> MeetingMetrics:
        return MeetingMetrics.from_dict(canonical.quantize(self.to_dict()))


def analyze_meeting(meeting: Meeting, config: Config | None = None, course_tag: str | None = None) -> MeetingMetrics:
    """Compute shares, volatilities and transitions for one meeting.

    Values keep full precision; ``.canonical()`` gives the serialized view.
    An empty or silent meeting yields null shares and volatilities.
    """
    config = config or Config()
    use_explicit = config.split_rule == "explicit"
    cvs = segmented_cvs(meeting, config.stddev_mode, use_explicit)
    try:
        shares = participation_shares(meeting)
    except NoSpeech:
        shares = dict.fromkeys(meeting.participants)
    totals = speech_ms(meeting)
    counts = {p: 0 for p in meeting.participants}
    for u in meeting.utterances:
        counts[u.speaker_id] += 1
    speakers = {
        p: SpeakerMetrics(
            share=shares[p],
            speech_s=totals[p] / 1000,
            n_utterances=counts[p],
            icv={seg: cvs.individual[p][seg].value for seg in SEGMENTS},
        )
        for p in meeting.participants
    }
    split = split_point_ms(meeting, use_explicit)
    date = meeting.date.isoformat() if isinstance(meeting.date, dt.date) else meeting.date
    return MeetingMetrics(
        meeting_id=meeting.meeting_id,
        participants=meeting.participants,
        speakers=speakers,
        mcv={seg: cvs.meeting(seg).value for seg in SEGMENTS},
        transitions=transition_counts(meeting),
        n_utterances=len(meeting.utterances),
        duration_s=meeting.duration,
        split_s=None if split is None else split / 1000,
        config=config.describe(),
        date=date,
        course_tag=course_tag,
    )


@dataclass(frozen=True)
class Corpus:
    """Read-only snapshot of tracked students and their meetings' metrics."""

    students: tuple[str, ...]
    meetings: tuple[MeetingMetrics, ...]
    config: Config = Config()

    def meetings_for(self, student_id: str) -> list[MeetingMetrics]:
        mine = [m for m in self.meetings if student_id in m.participants]
        return sorted(mine, key=lambda m: (m.date or "", m.meeting_id))
