"""WebVTT transcript ingestion.

Parses the subset of WebVTT emitted by Zoom cloud transcription: a ``WEBVTT``
header, then blank-line separated cue blocks made of an optional identifier
line, a ``start --> end`` timing line and one or more payload lines. Payloads
usually carry a ``Name: `` speaker prefix.

Timestamps are held as integer milliseconds; ``RawCue.start``/``RawCue.end``
expose them as seconds.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

UNKNOWN_SPEAKER = "UNKNOWN"

# share of cues allowed to fall back on the previous speaker before we warn
CONTINUATION_WARN_RATIO = 0.10

_TIMESTAMP_RE = re.compile(r"^(?:(\d{2,}):)?(\d{2}):(\d{2})\.(\d{3})$")
_TIMING_RE = re.compile(r"^(\S+) --> (\S+)(?:[ \t].*)?$")
_IGNORED_BLOCKS = ("NOTE", "STYLE", "REGION")


class TranscriptError(ValueError):
    """Base class for transcript documents that cannot be used at all."""

    def __init__(self, message: str, line: int | None = None, warnings=()):
        super().__init__(message)
        self.line = line
        self.warnings = list(warnings)


class MissingHeader(TranscriptError):
    pass


class EmptyTranscript(TranscriptError):
    pass


class MalformedTimestamp(ValueError):
    pass


@dataclass(frozen=True)
class RawCue:
    start_ms: int
    end_ms: int
    text: str
    speaker: str | None = None
    index: int | None = None

    def __post_init__(self):
        if self.start_ms < 0 or self.end_ms < self.start_ms:
            raise ValueError(f"invalid cue span {self.start_ms}..{self.end_ms} ms")
        if not self.text.strip():
            raise ValueError("cue text is empty")

    @property
    def start(self) -> float:
        return self.start_ms / 1000

    @property
    def end(self) -> float:
        return self.end_ms / 1000

    @property
    def duration(self) -> float:
        return (self.end_ms - self.start_ms) / 1000


@dataclass(frozen=True)
class TranscriptParseReport:
    cues: tuple[RawCue, ...]
    warnings: tuple[tuple[int, str], ...] = field(default=())
    source_checksum: str = ""


def parse_timestamp_ms(token: str) -> int:
    m = _TIMESTAMP_RE.match(token)
    if m is None:
        raise MalformedTimestamp(f"malformed timestamp {token!r}")
    hours, minutes, seconds, millis = m.groups()
    minutes, seconds = int(minutes), int(seconds)
    if seconds >= 60 or (hours is not None and minutes >= 60):
        raise MalformedTimestamp(f"timestamp field out of range in {token!r}")
    return ((int(hours or 0) * 60 + minutes) * 60 + seconds) * 1000 + int(millis)


def parse_timestamp(token: str) -> float:
    """Parse ``HH:MM:SS.mmm`` or ``MM:SS.mmm`` into seconds.

    Raises:
        MalformedTimestamp: wrong shape, non-digit fields, or minutes/seconds
            out of range.
    """
    return parse_timestamp_ms(token) / 1000


def format_timestamp(ms: int) -> str:
    hours, rest = divmod(ms, 3_600_000)
    minutes, rest = divmod(rest, 60_000)
    seconds, millis = divmod(rest, 1000)
    return f"{hours:02d}:{minutes:02d}:{seconds:02d}.{millis:03d}"


def _split_prefix(payload: str) -> tuple[str | None, str]:
    name, sep, rest = payload.partition(": ")
    if sep and name.strip():
        return name.strip(), rest.strip()
    return None, payload.strip()


def attribute_speaker(payload: str, previous_speaker: str | None = None) -> tuple[str, str]:
    """Split a Zoom-style ``"Name: text"`` payload.

    Splits on the first ``": "``. Payloads without a prefix are treated as a
    continuation of ``previous_speaker``, or of ``UNKNOWN`` if there is none.
    """
    name, text = _split_prefix(payload)
    return name or previous_speaker or UNKNOWN_SPEAKER, text


def _blocks(lines: list[str]):
    """Yield (first line number, lines) for each blank-line separated block."""
    block: list[str] = []
    start = 0
    for lineno, line in enumerate(lines, start=1):
        if line.strip():
            if not block:
                start = lineno
            block.append(line)
        elif block:
            yield start, block
            block = []
    if block:
        yield start, block


def parse_transcript(document: str) -> TranscriptParseReport:
    """Parse a WebVTT document into chronologically sorted, speaker-attributed cues.

    Malformed cue blocks are skipped and reported as ``(line, message)``
    warnings; NOTE, STYLE and REGION blocks are ignored. A warning on line 0
    concerns the whole document.

    Raises:
        MissingHeader: first non-blank line is not ``WEBVTT``.
        EmptyTranscript: no well-formed cue was found.
    """
    checksum = hashlib.sha256(document.encode("utf-8")).hexdigest()
    text = document.removeprefix("\ufeff").replace("\r\n", "\n").replace("\r", "\n")
    lines = text.split("\n")

    blocks = list(_blocks(lines))
    if not blocks:
        raise MissingHeader("document is empty; expected a WEBVTT header", line=1)
    header_line, header = blocks[0]
    first = header[0]
    if not (first == "WEBVTT" or first.startswith(("WEBVTT ", "WEBVTT\t"))):
        raise MissingHeader(
            f"line {header_line}: expected 'WEBVTT' header, found {first[:40]!r}",
            line=header_line,
        )

    warnings: list[tuple[int, str]] = []
    cues: list[RawCue] = []
    for offset, line in enumerate(header[1:], start=1):
        if "-->" in line:
            warnings.append((header_line + offset, "cue not separated from header by a blank line; skipped"))
            break

    previous: str | None = None
    continuations = 0
    for lineno, block in blocks[1:]:
        if block[0].split(maxsplit=1)[0] in _IGNORED_BLOCKS and "-->" not in block[0]:
            continue
        if "-->" in block[0]:
            ident, timing_at = None, 0
        elif len(block) > 1 and "-->" in block[1]:
            ident, timing_at = block[0].strip(), 1
        else:
            warnings.append((lineno, "cue block has no timing line; skipped"))
            continue

        timing_line = block[timing_at]
        timing_lineno = lineno + timing_at
        m = _TIMING_RE.match(timing_line.strip())
        if m is None:
            warnings.append((timing_lineno, f"malformed timing line {timing_line!r}; skipped"))
            continue
        try:
            start_ms = parse_timestamp_ms(m.group(1))
            end_ms = parse_timestamp_ms(m.group(2))
        except MalformedTimestamp as exc:
            warnings.append((timing_lineno, f"{exc}; cue skipped"))
            continue
        if end_ms < start_ms:
            warnings.append((timing_lineno, "cue ends before it starts; skipped"))
            continue

        payload = " ".join(line.strip() for line in block[timing_at + 1 :] if line.strip())
        if not payload:
            warnings.append((timing_lineno, "cue has no text; skipped"))
            continue
        prefix, body = _split_prefix(payload)
        if not body:
            warnings.append((timing_lineno, "cue has a speaker but no text; skipped"))
            continue
        if prefix is None:
            continuations += 1
        speaker = prefix or previous or UNKNOWN_SPEAKER
        previous = speaker

        index = int(ident) if ident is not None and ident.isdigit() else None
        cues.append(RawCue(start_ms, end_ms, body, speaker=speaker, index=index))

    if not cues:
        raise EmptyTranscript("no well-formed cues in transcript", warnings=warnings)
    if continuations > CONTINUATION_WARN_RATIO * len(cues):
        warnings.append(
            (0, f"{continuations} of {len(cues)} cues carry no speaker prefix; "
                "speaker carried over from the previous cue")
        )
    # sorted() is stable, so ties keep document order
    cues.sort(key=lambda c: c.start_ms)
    return TranscriptParseReport(tuple(cues), tuple(warnings), checksum)


def serialize_transcript(cues) -> str:
    """Render cues back to WebVTT, one ``Speaker: text`` payload per cue."""
    out = ["WEBVTT", ""]
    for cue in cues:
        if cue.index is not None:
            out.append(str(cue.index))
        out.append(f"{format_timestamp(cue.start_ms)} --> {format_timestamp(cue.end_ms)}")
        out.append(f"{cue.speaker}: {cue.text}" if cue.speaker else cue.text)
        out.append("")
    return "\n".join(out)
