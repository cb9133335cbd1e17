"""Utterances, meetings and participation structure."""

from __future__ import annotations

import dataclasses
import datetime as dt
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from .vtt import UNKNOWN_SPEAKER, RawCue

DEFAULT_GAP_THRESHOLD = 1.0


class NoSpeech(ValueError):
    """The meeting has no spoken time to share out."""


@dataclass(frozen=True)
class Utterance:
    speaker_id: str
    start_ms: int
    end_ms: int
    text: str = ""
    # positions in the chronologically sorted cue list
    source_cue_indices: tuple[int, ...] = (0,)

    def __post_init__(self):
        if self.end_ms < self.start_ms or self.start_ms < 0:
            raise ValueError(f"invalid utterance span {self.start_ms}..{self.end_ms} ms")
        idx = self.source_cue_indices
        if not idx or any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("source_cue_indices must be non-empty and strictly increasing")

    @property
    def start(self) -> float:
        return self.start_ms / 1000

    @property
    def end(self) -> float:
        return self.end_ms / 1000

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms

    @property
    def duration(self) -> float:
        return self.duration_ms / 1000


@dataclass(frozen=True)
class Meeting:
    meeting_id: str
    utterances: tuple[Utterance, ...] = ()
    participants: tuple[str, ...] = ()
    date: dt.date | None = None
    split_point: float | None = None
    segment_labels: tuple[str, str] | None = None

    def __post_init__(self):
        utts = tuple(self.utterances)
        object.__setattr__(self, "utterances", utts)
        object.__setattr__(self, "participants", tuple(self.participants))
        if any(b.start_ms < a.start_ms for a, b in zip(utts, utts[1:])):
            raise ValueError("utterances must be sorted by start time")
        missing = {u.speaker_id for u in utts} - set(self.participants)
        if missing:
            raise ValueError(f"speakers not among participants: {sorted(missing)}")
        if self.split_point is not None and utts:
            first, last = utts[0].start_ms, max(u.end_ms for u in utts)
            if not first <= self.split_point * 1000 <= last:
                raise ValueError(f"split point {self.split_point}s outside the transcribed span")

    @property
    def span_ms(self) -> tuple[int, int] | None:
        if not self.utterances:
            return None
        return self.utterances[0].start_ms, max(u.end_ms for u in self.utterances)

    @property
    def duration(self) -> float:
        """Seconds from the first utterance start to the latest utterance end."""
        span = self.span_ms
        return 0.0 if span is None else (span[1] - span[0]) / 1000

    def by_speaker(self, speaker_id: str) -> list[Utterance]:
        return [u for u in self.utterances if u.speaker_id == speaker_id]


def merge_cues(cues: Sequence[RawCue], gap_threshold: float = DEFAULT_GAP_THRESHOLD) -> list[Utterance]:
    """Merge consecutive same-speaker cues into utterances.

    A cue joins the running utterance when it has the same speaker and starts
    no more than ``gap_threshold`` seconds after the utterance's latest end
    (overlaps always join). Any speaker change closes the utterance.
    """
    if gap_threshold < 0:
        raise ValueError("gap_threshold must be >= 0")
    threshold_ms = round(gap_threshold * 1000)
    out: list[Utterance] = []
    speaker = None
    start = end = 0
    texts: list[str] = []
    indices: list[int] = []

    def flush():
        out.append(Utterance(speaker, start, end, " ".join(texts), tuple(indices)))

    for pos, cue in enumerate(cues):
        who = cue.speaker or UNKNOWN_SPEAKER
        if indices and who == speaker and cue.start_ms - end <= threshold_ms:
            end = max(end, cue.end_ms)
            texts.append(cue.text)
            indices.append(pos)
            continue
        if indices:
            flush()
        speaker, start, end = who, cue.start_ms, cue.end_ms
        texts, indices = [cue.text], [pos]
    if indices:
        flush()
    return out


def build_meeting(
    meeting_id: str,
    cues: Sequence[RawCue],
    gap_threshold: float = DEFAULT_GAP_THRESHOLD,
    speaker_map: Mapping[str, str] | None = None,
    participants: Iterable[str] | None = None,
    **meta,
) -> Meeting:
    """Resolve cue speakers through ``speaker_map`` then merge into a Meeting.

    Participants default to speakers in order of first appearance.
    """
    if speaker_map:
        cues = [
            dataclasses.replace(c, speaker=speaker_map.get(c.speaker or UNKNOWN_SPEAKER, c.speaker))
            for c in cues
        ]
    utterances = merge_cues(cues, gap_threshold)
    if participants is None:
        participants = dict.fromkeys(u.speaker_id for u in utterances)
    return Meeting(meeting_id, tuple(utterances), tuple(participants), **meta)


def speech_ms(meeting: Meeting) -> dict[str, int]:
    totals = dict.fromkeys(meeting.participants, 0)
    for u in meeting.utterances:
        totals[u.speaker_id] += u.duration_ms
    return totals


def participation_shares(meeting: Meeting) -> dict[str, float]:
    """Fraction of total spoken time per participant (silent participants get 0).

    Raises:
        NoSpeech: the meeting has no spoken time.
    """
    totals = speech_ms(meeting)
    total = sum(totals.values())
    if total <= 0:
        raise NoSpeech(f"meeting {meeting.meeting_id} has no spoken time")
    return {who: ms / total for who, ms in totals.items()}


def split_point_ms(meeting: Meeting, use_explicit: bool = True) -> float | None:
    span = meeting.span_ms
    if span is None:
        return None
    if use_explicit and meeting.split_point is not None:
        return meeting.split_point * 1000
    return (span[0] + span[1]) / 2


def split_meeting(meeting: Meeting, use_explicit: bool = True) -> tuple[Meeting, Meeting]:
    """Split a meeting into halves by utterance start time.

    The split time is the meeting's explicit ``split_point`` when present (and
    ``use_explicit``), otherwise the midpoint of the transcribed span. An
    utterance starting exactly on the split goes to the second half.
    """
    split = split_point_ms(meeting, use_explicit)
    first: list[Utterance] = []
    second: list[Utterance] = []
    for u in meeting.utterances:
        (first if u.start_ms < split else second).append(u)
    half = dict(participants=meeting.participants, date=meeting.date)
    return (
        Meeting(meeting.meeting_id, tuple(first), **half),
        Meeting(meeting.meeting_id, tuple(second), **half),
    )


def speaker_timeline(meeting: Meeting) -> dict[str, list[tuple[float, float]]]:
    """Per-speaker chronological (start, end) bands in seconds.

    Overlapping bands of the same speaker are coalesced; overlaps between
    different speakers are left alone.
    """
    bands: dict[str, list[list[int]]] = {}
    for u in meeting.utterances:
        rows = bands.setdefault(u.speaker_id, [])
        if rows and u.start_ms < rows[-1][1]:
            rows[-1][1] = max(rows[-1][1], u.end_ms)
        else:
            rows.append([u.start_ms, u.end_ms])
    return {who: [(a / 1000, b / 1000) for a, b in rows] for who, rows in bands.items()}
