"""Machine-readable reports: canonical JSON documents and CSV tables."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable

from .. import canonical
from ..longitudinal import (
    QUARTILE_METHOD,
    CohortSlopeStats,
    FiveNumberSummary,
    NoSlopes,
    StudentTrend,
    cohort_slope_stats,
    corpus_characteristics,
    ordinal_average_mcv,
)
from ..metrics import SEGMENTS, Corpus, MeetingMetrics
from ..volatility import Segment

SPEAKER_CSV_COLUMNS = ("meeting_id", "speaker", "share", "speech_s", "n_utt", "icv_whole", "icv_h1", "icv_h2")
MEETING_CSV_COLUMNS = ("meeting_id", "mcv_whole", "mcv_h1", "mcv_h2")


def meeting_report(metrics: MeetingMetrics) -> dict:
    return metrics.to_dict()


def emit_meeting_json(metrics: MeetingMetrics) -> str:
    """Canonical JSON: sorted keys, 3-decimal metric values, null when absent."""
    return canonical.dumps(meeting_report(metrics))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def _csv(columns, rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def speaker_csv(meetings: Iterable[MeetingMetrics]) -> str:
    """One row per (meeting, speaker)."""
    rows = (
        (m.meeting_id, who, s.share, s.speech_s, s.n_utterances, *(s.icv[seg] for seg in SEGMENTS))
        for m in meetings
        for who, s in ((p, m.speakers[p]) for p in m.participants)
    )
    return _csv(SPEAKER_CSV_COLUMNS, rows)


def meeting_csv(meetings: Iterable[MeetingMetrics]) -> str:
    """One row per meeting."""
    return _csv(MEETING_CSV_COLUMNS, ((m.meeting_id, *(m.mcv[seg] for seg in SEGMENTS)) for m in meetings))


def summary_dict(s: FiveNumberSummary) -> dict:
    return {"min": s.min, "q1": s.q1, "median": s.median, "q3": s.q3, "max": s.max, "n": s.n, "mean": s.mean}


def trend_report(trend: StudentTrend, config_description: dict) -> dict:
    return {
        "schema_version": canonical.SCHEMA_VERSION,
        "config": config_description,
        "student_id": trend.student_id,
        "segment": trend.segment.value,
        "points": [{"x": p.x, "y": p.y, "meeting_id": p.meeting_id} for p in trend.points],
        "slope": trend.slope,
        "x_mean": trend.x_mean,
        "y_mean": trend.y_mean,
    }


def slope_stats_dict(stats: CohortSlopeStats | None) -> dict | None:
    if stats is None:
        return None
    return {
        "summary": summary_dict(stats.summary),
        "mean": stats.mean,
        "n_students": stats.n_students,
        "n_excluded": stats.n_excluded,
    }


def cohort_slopes(corpus: Corpus) -> dict[Segment, CohortSlopeStats | None]:
    out = {}
    for seg in SEGMENTS:
        try:
            out[seg] = cohort_slope_stats(corpus, seg)
        except NoSlopes:
            out[seg] = None
    return out


def cohort_report(corpus: Corpus, segment: Segment | str = Segment.WHOLE) -> dict:
    """Dataset characteristics, mean m-CV per meeting ordinal for ``segment``,
    and slope distributions for all three segments."""
    segment = Segment.parse(segment)
    ch = corpus_characteristics(corpus)
    return {
        "schema_version": canonical.SCHEMA_VERSION,
        "config": corpus.config.describe(),
        "quartile_method": QUARTILE_METHOD,
        "segment": segment.value,
        "characteristics": {
            "n_students": ch.n_students,
            "n_meetings": ch.n_meetings,
            "total_duration_s": ch.total_duration,
            "mean_meeting_duration_s": ch.mean_meeting_duration,
            "mean_participants": ch.mean_participants,
            "mean_focal_share": ch.mean_focal_share,
            "mean_mcv": ch.mean_mcv,
            "mean_icv": ch.mean_icv,
        },
        "ordinal_mcv": [
            {"ordinal": r.ordinal, "mean_mcv": r.mean_mcv, "n": r.n} for r in ordinal_average_mcv(corpus, segment)
        ],
        "slopes": {seg.value: slope_stats_dict(stats) for seg, stats in cohort_slopes(corpus).items()},
    }


def cohort_csv(corpus: Corpus, segment: Segment | str = Segment.WHOLE) -> str:
    return _csv(("ordinal", "mean_mcv", "n"), ((r.ordinal, r.mean_mcv, r.n) for r in ordinal_average_mcv(corpus, segment)))
