"""File-based corpus of meetings, transcripts, students and cached metrics.

Layout under the corpus root::

    corpus.json                 marker, schema version
    config.json                 analysis defaults for this corpus
    students.json               tracked student ids
    aliases.json                display name -> student id, unknown-name policy
    meetings/<id>/meta.json     MeetingRecord
    meetings/<id>/transcript.vtt
    meetings/<id>/metrics.json  cached MeetingMetrics keyed by config + inputs

Every file is replaced by write-to-temp then rename, so readers never see a
partial document. Writers serialize on an advisory lock file at the root.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import hashlib
import json
import logging
import os
import random
import re
import secrets
import tempfile
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

from filelock import FileLock

from . import canonical
from .conversation import Meeting, build_meeting
from .metrics import Config, Corpus, MeetingMetrics, analyze_meeting
from .vtt import (
    UNKNOWN_SPEAKER,
    TranscriptError,
    TranscriptParseReport,
    parse_transcript,
)

log = logging.getLogger(__name__)

REJECT_UNKNOWN = "reject_unknown"
AUTO_CREATE = "auto_create"
ID_ALPHABET = "abcdefghijklmnopqrstuvwxyz234567"
ID_LENGTH = 8


class StoreError(Exception):
    pass


class StorageFailure(StoreError):
    pass


class UnknownMeeting(StoreError, KeyError):
    def __str__(self):
        return f"unknown meeting {self.args[0]!r}"


class UnknownSpeakers(StoreError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__(f"speakers not in alias table: {', '.join(self.names)}")


@dataclass(frozen=True)
class AliasTable:
    entries: dict[str, str] = field(default_factory=dict)
    default_policy: str = AUTO_CREATE

    def __post_init__(self):
        if self.default_policy not in (REJECT_UNKNOWN, AUTO_CREATE):
            raise ValueError(f"unknown alias policy {self.default_policy!r}")


@dataclass(frozen=True)
class MeetingRecord:
    meeting_id: str
    date: str
    course_tag: str
    transcript_path: str | None = None
    transcript_checksum: str | None = None
    participants_resolved: dict[str, str] = field(default_factory=dict)
    split_point: float | None = None
    video_link: str | None = None

    def to_dict(self) -> dict:
        return {
            "schema_version": canonical.SCHEMA_VERSION,
            "meeting_id": self.meeting_id,
            "date": self.date,
            "course_tag": self.course_tag,
            "transcript_path": self.transcript_path,
            "transcript_checksum": self.transcript_checksum,
            "participants_resolved": dict(self.participants_resolved),
            "split_point": self.split_point,
            "video_link": self.video_link,
        }

    @classmethod
    def from_dict(cls, data: dict) -> MeetingRecord:
        return cls(
            meeting_id=data["meeting_id"],
            date=data["date"],
            course_tag=data["course_tag"],
            transcript_path=data.get("transcript_path"),
            transcript_checksum=data.get("transcript_checksum"),
            participants_resolved=dict(data.get("participants_resolved") or {}),
            split_point=data.get("split_point"),
            video_link=data.get("video_link"),
        )


@dataclass(frozen=True)
class CorpusLoad:
    corpus: Corpus
    failures: dict[str, str]
    recomputed: tuple[str, ...]
    pending: tuple[str, ...]


def slugify(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-") or "anon"


def resolve_speakers(raw_names: Iterable[str], alias_table: AliasTable) -> dict[str, str]:
    """Map raw display names to student ids.

    Unknown names become ``ext-<slug>`` under the auto-create policy.

    Raises:
        UnknownSpeakers: unknown names under the reject policy.
    """
    names = list(dict.fromkeys(raw_names))
    unknown = [n for n in names if n not in alias_table.entries]
    if unknown and alias_table.default_policy == REJECT_UNKNOWN:
        raise UnknownSpeakers(unknown)
    return {n: alias_table.entries.get(n) or f"ext-{slugify(n)}" for n in names}


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    dir_fd = os.open(path.parent, os.O_RDONLY)
    try:
        os.fsync(dir_fd)
    finally:
        os.close(dir_fd)


def _read_verbatim(path: Path) -> str:
    # no newline translation: the checksum covers the bytes as uploaded
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class CorpusStore:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self._lock = FileLock(str(self.root / ".lock"))

    # layout

    @classmethod
    def init(cls, root: str | os.PathLike, config: Config | None = None) -> CorpusStore:
        store = cls(root)
        try:
            (store.root / "meetings").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageFailure(f"cannot create corpus at {store.root}: {exc}") from exc
        with store._lock:
            if not store._marker.exists():
                store._write(store._marker, {"schema_version": canonical.SCHEMA_VERSION})
            if not (store.root / "students.json").exists():
                store._write(store.root / "students.json", {"schema_version": canonical.SCHEMA_VERSION, "students": []})
            if not (store.root / "aliases.json").exists():
                store.save_aliases(AliasTable())
            if not (store.root / "config.json").exists():
                settings = (config or Config()).analysis_settings()
                store._write(store.root / "config.json", {"schema_version": canonical.SCHEMA_VERSION, **settings})
        return store

    @property
    def _marker(self) -> Path:
        return self.root / "corpus.json"

    def _require_init(self) -> None:
        if not self._marker.is_file():
            raise StorageFailure(f"{self.root} is not an initialized corpus (run init first)")

    def _meeting_dir(self, meeting_id: str) -> Path:
        if not re.fullmatch(r"[a-z2-7]{%d}" % ID_LENGTH, meeting_id or ""):
            raise UnknownMeeting(meeting_id)
        return self.root / "meetings" / meeting_id

    def _write(self, path: Path, obj) -> None:
        try:
            atomic_write(path, canonical.dumps(obj))
        except OSError as exc:
            raise StorageFailure(f"cannot write {path}: {exc}") from exc

    def _read(self, path: Path) -> dict:
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise StorageFailure(f"cannot read {path}: {exc}") from exc

    def config(self, **overrides) -> Config:
        self._require_init()
        return Config.from_file(self.root / "config.json", **overrides)

    # students and aliases

    def students(self) -> tuple[str, ...]:
        self._require_init()
        return tuple(self._read(self.root / "students.json")["students"])

    def aliases(self) -> AliasTable:
        self._require_init()
        data = self._read(self.root / "aliases.json")
        return AliasTable(dict(data["entries"]), data["default_policy"])

    def save_aliases(self, table: AliasTable) -> None:
        self._write(
            self.root / "aliases.json",
            {"schema_version": canonical.SCHEMA_VERSION, "default_policy": table.default_policy,
             "entries": dict(table.entries)},
        )

    def add_student(self, student_id: str, aliases: Iterable[str] = ()) -> None:
        """Track a student and map display names to it."""
        self._require_init()
        with self._lock:
            current = set(self.students())
            current.add(student_id)
            table = self.aliases()
            entries = dict(table.entries)
            for name in aliases:
                if entries.get(name, student_id) != student_id:
                    raise StoreError(f"alias {name!r} already maps to {entries[name]!r}")
                entries[name] = student_id
            self._write(self.root / "students.json",
                        {"schema_version": canonical.SCHEMA_VERSION, "students": sorted(current)})
            self.save_aliases(AliasTable(entries, table.default_policy))

    def set_alias_policy(self, policy: str) -> None:
        with self._lock:
            self.save_aliases(AliasTable(self.aliases().entries, policy))

    # meetings

    def register_meeting(
        self,
        date: str | dt.date,
        course_tag: str,
        split_point: float | None = None,
        video_link: str | None = None,
        seed: int | None = None,
    ) -> str:
        """Create a meeting record with a fresh 8-character code; durable on return."""
        self._require_init()
        date = date.isoformat() if isinstance(date, dt.date) else dt.date.fromisoformat(date).isoformat()
        rng = random.Random(seed) if seed is not None else secrets.SystemRandom()
        with self._lock:
            while True:
                meeting_id = "".join(rng.choice(ID_ALPHABET) for _ in range(ID_LENGTH))
                folder = self.root / "meetings" / meeting_id
                if not folder.exists():
                    break
            record = MeetingRecord(meeting_id, date, course_tag, split_point=split_point, video_link=video_link)
            try:
                folder.mkdir(parents=True)
            except OSError as exc:
                raise StorageFailure(f"cannot create {folder}: {exc}") from exc
            self._write(folder / "meta.json", record.to_dict())
        log.info("registered meeting %s", meeting_id)
        return meeting_id

    def meeting_ids(self) -> list[str]:
        self._require_init()
        folder = self.root / "meetings"
        # a folder without meta.json is a registration that never completed
        return sorted(p.name for p in folder.iterdir() if (p / "meta.json").is_file())

    def list_meetings(self) -> list[MeetingRecord]:
        records = [self.get_record(m) for m in self.meeting_ids()]
        return sorted(records, key=lambda r: (r.date, r.meeting_id))

    def get_record(self, meeting_id: str) -> MeetingRecord:
        self._require_init()
        path = self._meeting_dir(meeting_id) / "meta.json"
        if not path.is_file():
            raise UnknownMeeting(meeting_id)
        return MeetingRecord.from_dict(self._read(path))

    def attach_transcript(self, meeting_id: str, document: str) -> TranscriptParseReport:
        """Store a transcript verbatim, resolve its speakers and drop cached metrics.

        Nothing is written if the document fails to parse or, under the reject
        policy, names an unknown speaker.
        """
        record = self.get_record(meeting_id)
        report = parse_transcript(document)
        resolved = resolve_speakers((c.speaker or UNKNOWN_SPEAKER for c in report.cues), self.aliases())
        folder = self._meeting_dir(meeting_id)
        with self._lock:
            # transcript first: meta.json's checksum is the commit point
            try:
                atomic_write(folder / "transcript.vtt", document)
            except OSError as exc:
                raise StorageFailure(f"cannot write transcript: {exc}") from exc
            updated = dataclasses.replace(
                record,
                transcript_path=f"meetings/{meeting_id}/transcript.vtt",
                transcript_checksum=report.source_checksum,
                participants_resolved=resolved,
            )
            self._write(folder / "meta.json", updated.to_dict())
            (folder / "metrics.json").unlink(missing_ok=True)
        return report

    def _read_transcript(self, record: MeetingRecord) -> tuple[MeetingRecord, str | None]:
        """Return a record and transcript that belong together.

        A checksum mismatch means a writer sits between its two renames (or
        crashed there); taking the lock waits it out, and a mismatch that
        survives the lock is repaired from the transcript on disk.
        """
        if record.transcript_path is None:
            return record, None
        path = self.root / record.transcript_path
        document = _read_verbatim(path)
        if _sha256(document) == record.transcript_checksum:
            return record, document
        with self._lock:
            record = self.get_record(record.meeting_id)
            document = _read_verbatim(path)
            if _sha256(document) != record.transcript_checksum:
                log.warning("meeting %s: transcript and meta disagree; re-resolving", record.meeting_id)
                report = parse_transcript(document)
                resolved = resolve_speakers((c.speaker or UNKNOWN_SPEAKER for c in report.cues), self.aliases())
                record = dataclasses.replace(
                    record, transcript_checksum=report.source_checksum, participants_resolved=resolved
                )
                self._write(self._meeting_dir(record.meeting_id) / "meta.json", record.to_dict())
        return record, document

    def load_meeting(self, meeting_id: str, config: Config) -> Meeting:
        record, document = self._read_transcript(self.get_record(meeting_id))
        return self._build(record, document, config)

    def _build(self, record: MeetingRecord, document: str | None, config: Config) -> Meeting:
        date = dt.date.fromisoformat(record.date)
        if document is None:
            return Meeting(record.meeting_id, date=date)
        report = parse_transcript(document)
        speaker_map = record.participants_resolved
        return build_meeting(
            record.meeting_id,
            report.cues,
            config.gap_threshold,
            speaker_map=speaker_map,
            participants=dict.fromkeys(speaker_map.values()),
            date=date,
            split_point=record.split_point,
        )

    @staticmethod
    def _cache_key(record: MeetingRecord, config: Config) -> str:
        blob = canonical.dumps({
            "config": config.fingerprint,
            "record": {k: v for k, v in record.to_dict().items() if k != "video_link"},
        })
        return _sha256(blob)[:32]

    def meeting_metrics(self, meeting_id: str, config: Config) -> tuple[MeetingMetrics, bool]:
        """Canonical metrics for one meeting and whether they were recomputed."""
        record, document = self._read_transcript(self.get_record(meeting_id))
        folder = self._meeting_dir(meeting_id)
        key = self._cache_key(record, config)
        cache = folder / "metrics.json"
        if cache.is_file():
            try:
                data = json.loads(cache.read_text(encoding="utf-8"))
                if data.get("cache_key") == key:
                    return MeetingMetrics.from_dict(data["metrics"]), False
            except (OSError, ValueError, KeyError):
                log.warning("meeting %s: unreadable metrics cache, recomputing", meeting_id)
        meeting = self._build(record, document, config)
        metrics = analyze_meeting(meeting, config, course_tag=record.course_tag).canonical()
        with self._lock:
            self._write(cache, {"schema_version": canonical.SCHEMA_VERSION, "cache_key": key,
                                "metrics": metrics.to_dict()})
        return metrics, True

    def load_corpus(self, config: Config | None = None) -> CorpusLoad:
        """Snapshot of every transcribed meeting's metrics.

        Meetings still awaiting a transcript are listed as pending; meetings
        whose transcript cannot be read or parsed are reported as failures and
        left out.
        """
        config = config or self.config()
        metrics, failures, recomputed, pending = [], {}, [], []
        for record in self.list_meetings():
            if record.transcript_path is None:
                pending.append(record.meeting_id)
                continue
            try:
                m, fresh = self.meeting_metrics(record.meeting_id, config)
            except (TranscriptError, OSError, StoreError, UnicodeDecodeError) as exc:
                failures[record.meeting_id] = f"{type(exc).__name__}: {exc}"
                continue
            metrics.append(m)
            if fresh:
                recomputed.append(record.meeting_id)
        corpus = Corpus(self.students(), tuple(metrics), config)
        return CorpusLoad(corpus, failures, tuple(recomputed), tuple(pending))


def open_store(root: str | os.PathLike | None) -> CorpusStore:
    if root is None:
        raise StorageFailure("no corpus root given (use --root or CONVO_CORPUS)")
    store = CorpusStore(root)
    store._require_init()
    return store

