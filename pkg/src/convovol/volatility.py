"""Conversational volatility: the standard deviation of the change in
duration between adjacent utterances.

Meeting volatility (m-CV) runs over every utterance in chronological order;
individual volatility (i-CV) over one speaker's own utterances. Values are in
seconds. A series too short to estimate yields ``value=None``, never 0.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

from .conversation import Meeting, split_meeting

SAMPLE = "sample"
POPULATION = "population"
STDDEV_MODES = (SAMPLE, POPULATION)


class Segment(str, enum.Enum):
    WHOLE = "whole"
    FIRST_HALF = "first_half"
    SECOND_HALF = "second_half"

    @classmethod
    def parse(cls, name: str | Segment) -> Segment:
        aliases = {"h1": cls.FIRST_HALF, "h2": cls.SECOND_HALF}
        if isinstance(name, cls):
            return name
        try:
            return aliases.get(name) or cls(name)
        except ValueError:
            raise ValueError(f"unknown segment {name!r}; expected whole, h1 or h2") from None


class UnknownSpeaker(KeyError):
    def __str__(self):
        return f"{self.args[0]!r} is not a participant"


@dataclass(frozen=True)
class DurationSeries:
    values: tuple[float, ...]
    owner: str = "meeting"
    segment: Segment = Segment.WHOLE

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if any(v < 0 for v in self.values):
            raise ValueError("durations must be non-negative")


@dataclass(frozen=True)
class VolatilityResult:
    value: float | None
    n_utterances: int
    n_diffs: int
    mode: str = SAMPLE


@dataclass(frozen=True)
class SegmentedVolatility:
    whole: VolatilityResult
    first_half: VolatilityResult
    second_half: VolatilityResult
    # speaker_id -> segment -> i-CV
    individual: dict[str, dict[Segment, VolatilityResult]] = field(default_factory=dict)

    def meeting(self, segment: Segment) -> VolatilityResult:
        return getattr(self, Segment(segment).value)


def _check_mode(mode: str) -> None:
    if mode not in STDDEV_MODES:
        raise ValueError(f"stddev mode must be one of {STDDEV_MODES}, got {mode!r}")


def first_differences(series: DurationSeries | Sequence[float]) -> list[float]:
    values = series.values if isinstance(series, DurationSeries) else series
    return [b - a for a, b in zip(values, values[1:])]


def stddev(values: Sequence[float], mode: str = SAMPLE) -> float | None:
    """Two-pass standard deviation; ``None`` when there are too few values.

    Sample mode divides by n-1 and needs n >= 2; population mode divides by n
    and needs n >= 1.
    """
    _check_mode(mode)
    n = len(values)
    dof = n - 1 if mode == SAMPLE else n
    if dof < 1:
        return None
    if all(v == values[0] for v in values):
        return 0.0
    mean = math.fsum(values) / n
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / dof)


def conversational_volatility(series: DurationSeries | Sequence[float], mode: str = SAMPLE) -> VolatilityResult:
    values = series.values if isinstance(series, DurationSeries) else tuple(series)
    diffs = first_differences(values)
    return VolatilityResult(stddev(diffs, mode), len(values), len(diffs), mode)


def meeting_series(meeting: Meeting, segment: Segment = Segment.WHOLE) -> DurationSeries:
    return DurationSeries(tuple(u.duration for u in meeting.utterances), "meeting", segment)


def speaker_series(meeting: Meeting, speaker_id: str, segment: Segment = Segment.WHOLE) -> DurationSeries:
    if speaker_id not in meeting.participants:
        raise UnknownSpeaker(speaker_id)
    return DurationSeries(tuple(u.duration for u in meeting.by_speaker(speaker_id)), speaker_id, segment)


def meeting_cv(meeting: Meeting, mode: str = SAMPLE) -> VolatilityResult:
    """m-CV over all utterance durations in chronological order, any speaker."""
    return conversational_volatility(meeting_series(meeting), mode)


def individual_cv(meeting: Meeting, speaker_id: str, mode: str = SAMPLE) -> VolatilityResult:
    """i-CV over one speaker's own utterance durations.

    Raises:
        UnknownSpeaker: ``speaker_id`` is not a participant.
    """
    return conversational_volatility(speaker_series(meeting, speaker_id), mode)


def segmented_cvs(meeting: Meeting, mode: str = SAMPLE, use_explicit_split: bool = True) -> SegmentedVolatility:
    """m-CV and per-speaker i-CV for the whole meeting and each half."""
    first, second = split_meeting(meeting, use_explicit_split)
    parts = {Segment.WHOLE: meeting, Segment.FIRST_HALF: first, Segment.SECOND_HALF: second}
    individual = {
        who: {seg: individual_cv(part, who, mode) for seg, part in parts.items()}
        for who in meeting.participants
    }
    return SegmentedVolatility(
        whole=meeting_cv(meeting, mode),
        first_half=meeting_cv(first, mode),
        second_half=meeting_cv(second, mode),
        individual=individual,
    )
