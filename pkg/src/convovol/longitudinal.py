"""Per-student volatility trends across a semester and cohort aggregates."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .metrics import Corpus
from .volatility import Segment

QUARTILE_METHOD = "linear interpolation between closest ranks, position p*(n-1)"


class InsufficientPoints(ValueError):
    pass


class DegenerateX(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class NoSlopes(ValueError):
    pass


class UnknownStudent(KeyError):
    def __str__(self):
        return f"unknown student {self.args[0]!r}"


@dataclass(frozen=True)
class TrendPoint:
    x: int
    y: float
    meeting_id: str


@dataclass(frozen=True)
class StudentTrend:
    student_id: str
    segment: Segment
    points: tuple[TrendPoint, ...]
    slope: float | None
    x_mean: float | None
    y_mean: float | None


@dataclass(frozen=True)
class FiveNumberSummary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    n: int
    mean: float


@dataclass(frozen=True)
class OrdinalRow:
    ordinal: int
    mean_mcv: float
    n: int


@dataclass(frozen=True)
class CohortSlopeStats:
    segment: Segment
    summary: FiveNumberSummary
    mean: float
    n_students: int
    n_excluded: int


@dataclass(frozen=True)
class CorpusCharacteristics:
    n_students: int
    n_meetings: int
    total_duration: float
    mean_meeting_duration: float | None
    mean_participants: float | None
    mean_focal_share: float | None
    mean_mcv: float | None
    mean_icv: float | None


def _mean(values: Sequence[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def regression_slope(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope b = sum((x-xm)(y-ym)) / sum((x-xm)^2).

    Raises:
        InsufficientPoints: fewer than two points.
        DegenerateX: every x is the same.
    """
    if len(points) < 2:
        raise InsufficientPoints(f"need at least 2 points, got {len(points)}")
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    x_mean = math.fsum(xs) / len(xs)
    y_mean = math.fsum(ys) / len(ys)
    sxx = math.fsum((x - x_mean) ** 2 for x in xs)
    if sxx == 0:
        raise DegenerateX("all x values are equal")
    sxy = math.fsum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    return sxy / sxx


def student_trend(corpus: Corpus, student_id: str, segment: Segment | str = Segment.WHOLE) -> StudentTrend:
    """i-CV against meeting ordinal for one student, with its regression slope.

    Ordinals count the student's own meetings by date (1, 2, 3, ...).
    Meetings with no i-CV contribute no point but keep their ordinal.

    Raises:
        UnknownStudent: ``student_id`` is not a tracked student.
    """
    segment = Segment.parse(segment)
    if student_id not in corpus.students:
        raise UnknownStudent(student_id)
    points = tuple(
        TrendPoint(ordinal, m.icv(student_id, segment), m.meeting_id)
        for ordinal, m in enumerate(corpus.meetings_for(student_id), start=1)
        if m.icv(student_id, segment) is not None
    )
    slope = x_mean = y_mean = None
    if points:
        x_mean = _mean([p.x for p in points])
        y_mean = _mean([p.y for p in points])
    if len(points) >= 2:
        slope = regression_slope([(p.x, p.y) for p in points])
    return StudentTrend(student_id, segment, points, slope, x_mean, y_mean)


def ordinal_mcv_values(corpus: Corpus, segment: Segment | str = Segment.WHOLE) -> dict[int, list[float]]:
    """Present m-CV values grouped by each student's meeting ordinal.

    A meeting shared by two tracked students counts once for each of them.
    """
    segment = Segment.parse(segment)
    by_ordinal: dict[int, list[float]] = {}
    for student in corpus.students:
        for k, m in enumerate(corpus.meetings_for(student), start=1):
            value = m.mcv[segment]
            if value is not None:
                by_ordinal.setdefault(k, []).append(value)
    return dict(sorted(by_ordinal.items()))


def ordinal_average_mcv(corpus: Corpus, segment: Segment | str = Segment.WHOLE) -> list[OrdinalRow]:
    """Mean m-CV of every student's k-th meeting, for k = 1, 2, ...

    Meetings without an m-CV are left out of both mean and count.
    """
    return [OrdinalRow(k, _mean(v), len(v)) for k, v in ordinal_mcv_values(corpus, segment).items()]


def _quantile(sorted_values: Sequence[float], p: float) -> float:
    pos = p * (len(sorted_values) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(sorted_values) - 1)
    a, b = sorted_values[lo], sorted_values[hi]
    # clamp: rounding must not push the estimate outside its bracket
    return min(max(a + (b - a) * (pos - lo), a), b)


def five_number_summary(values: Sequence[float]) -> FiveNumberSummary:
    if not values:
        raise EmptyInput("five-number summary of an empty list")
    s = sorted(values)
    q1, median, q3 = (_quantile(s, p) for p in (0.25, 0.5, 0.75))
    return FiveNumberSummary(s[0], q1, median, q3, s[-1], len(s), _mean(s))


def cohort_slope_stats(corpus: Corpus, segment: Segment | str = Segment.WHOLE) -> CohortSlopeStats:
    """Distribution of per-student trend slopes for one segment.

    Raises:
        NoSlopes: no student has a defined slope.
    """
    segment = Segment.parse(segment)
    slopes = [student_trend(corpus, s, segment).slope for s in corpus.students]
    present = [s for s in slopes if s is not None]
    if not present:
        raise NoSlopes(f"no student has a defined {segment.value} slope")
    summary = five_number_summary(present)
    return CohortSlopeStats(segment, summary, summary.mean, len(present), len(slopes) - len(present))


def corpus_characteristics(corpus: Corpus) -> CorpusCharacteristics:
    """Dataset-level counts and averages.

    Durations run from first utterance start to latest utterance end;
    meetings without utterances add nothing to duration averages. Focal share
    and i-CV are averaged over (tracked student, meeting) pairs.
    """
    spoken = [m for m in corpus.meetings if m.n_utterances]
    total = math.fsum(m.duration_s for m in spoken)
    shares, icvs = [], []
    for student in corpus.students:
        for m in corpus.meetings_for(student):
            if m.share(student) is not None:
                shares.append(m.share(student))
            if m.icv(student) is not None:
                icvs.append(m.icv(student))
    return CorpusCharacteristics(
        n_students=len(corpus.students),
        n_meetings=len(corpus.meetings),
        total_duration=total,
        mean_meeting_duration=_mean([m.duration_s for m in spoken]),
        mean_participants=_mean([len(m.participants) for m in corpus.meetings]),
        mean_focal_share=_mean(shares),
        mean_mcv=_mean([m.mcv[Segment.WHOLE] for m in corpus.meetings if m.mcv[Segment.WHOLE] is not None]),
        mean_icv=_mean(icvs),
    )
