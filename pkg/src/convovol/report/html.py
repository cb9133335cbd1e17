"""Self-contained HTML dashboards built from the SVG panels."""

from __future__ import annotations

from html import escape

from ..conversation import Meeting
from ..longitudinal import five_number_summary, ordinal_mcv_values
from ..metrics import SEGMENTS, Corpus, MeetingMetrics
from ..turn_taking import EmptyMatrix, chord_data
from ..volatility import Segment
from . import cohort_report, cohort_slopes
from .svg import (
    DegenerateInput,
    render_boxplot_svg,
    render_chord_svg,
    render_cv_bars_svg,
    render_pie_svg,
    render_timeline_svg,
)

STYLE = """
body { font-family: sans-serif; margin: 2em; color: #222; }
table { border-collapse: collapse; margin: 1em 0; }
th, td { border: 1px solid #ccc; padding: 4px 10px; text-align: right; }
th:first-child, td:first-child { text-align: left; }
section { margin-bottom: 2em; }
.empty { color: #999; font-style: italic; }
"""

SEGMENT_TITLES = {Segment.WHOLE: "whole meeting", Segment.FIRST_HALF: "first half", Segment.SECOND_HALF: "second half"}


def _num(v, digits: int = 3) -> str:
    return "&ndash;" if v is None else f"{v:.{digits}f}"


def _page(title: str, sections: list[str]) -> str:
    return "\n".join([
        "<!DOCTYPE html>",
        '<html lang="en">',
        f'<head><meta charset="utf-8"/><title>{escape(title)}</title><style>{STYLE}</style></head>',
        "<body>",
        f"<h1>{escape(title)}</h1>",
        *sections,
        "</body>",
        "</html>",
        "",
    ])


def _section(panel: str, heading: str, content: str) -> str:
    return f'<section data-panel="{panel}"><h2>{escape(heading)}</h2>\n{content}\n</section>'


def _table(head: list[str], rows: list[list[str]], **attrs) -> str:
    extra = "".join(f' {k.replace("_", "-")}="{escape(str(v))}"' for k, v in attrs.items())
    lines = [f"<table{extra}>", "<tr>" + "".join(f"<th>{escape(h)}</th>" for h in head) + "</tr>"]
    lines += ["<tr>" + "".join(f"<td>{c}</td>" for c in row) + "</tr>" for row in rows]
    lines.append("</table>")
    return "\n".join(lines)


def _empty(message: str) -> str:
    return f'<p class="empty">{escape(message)}</p>'


def emit_meeting_html(meeting: Meeting, metrics: MeetingMetrics) -> str:
    """Dashboard for one meeting: timeline, participation pie, volatility bars
    and turn-taking chord, followed by the per-speaker table."""
    sections = []
    try:
        timeline = render_timeline_svg(meeting)
    except DegenerateInput:
        timeline = _empty("No utterances.")
    sections.append(_section("timeline", "Timeline", timeline))
    try:
        pie = render_pie_svg({p: metrics.share(p) for p in metrics.participants})
    except DegenerateInput:
        pie = _empty("No speech.")
    sections.append(_section("pie", "Participation", pie))
    sections.append(_section("cv-bars", "Conversational volatility", render_cv_bars_svg(metrics.mcv)))
    try:
        chord = render_chord_svg(chord_data(metrics.transitions), metrics.participants)
    except (EmptyMatrix, DegenerateInput):
        chord = _empty("No turn changes.")
    sections.append(_section("chord", "Turn-taking", chord))

    rows = [
        [escape(p), _num(s.share), _num(s.speech_s, 1), str(s.n_utterances), *(_num(s.icv[seg]) for seg in SEGMENTS)]
        for p, s in ((p, metrics.speakers[p]) for p in metrics.participants)
    ]
    table = _table(["speaker", "share", "speech (s)", "utterances", "i-CV whole", "i-CV 1st half", "i-CV 2nd half"],
                   rows, data_table="speakers")
    sections.append(_section("speakers", "Speakers", table))
    meta = (f"<p>config {escape(metrics.fingerprint)}: gap threshold {metrics.config['gap_threshold']:.3f} s, "
            f"{escape(metrics.config['stddev_mode'])} standard deviation, split rule "
            f"{escape(metrics.config['split_rule'])}</p>")
    sections.append(meta)
    return _page(f"Meeting {metrics.meeting_id}", sections)


def emit_cohort_html(corpus: Corpus, segment: Segment | str = Segment.WHOLE) -> str:
    """Cohort report: dataset table, mean m-CV per meeting ordinal with box
    plots of its distribution, and box plots of per-student trend slopes."""
    segment = Segment.parse(segment)
    doc = cohort_report(corpus, segment)
    ch = doc["characteristics"]
    char_rows = [
        ["students", str(ch["n_students"])],
        ["meetings", str(ch["n_meetings"])],
        ["total duration (h)", _num(ch["total_duration_s"] / 3600, 2)],
        ["mean meeting duration (min)", _num(None if ch["mean_meeting_duration_s"] is None
                                             else ch["mean_meeting_duration_s"] / 60, 1)],
        ["mean participants", _num(ch["mean_participants"], 2)],
        ["mean student speaking share", _num(ch["mean_focal_share"])],
        ["mean m-CV", _num(ch["mean_mcv"])],
        ["mean i-CV", _num(ch["mean_icv"])],
    ]
    sections = [_section("characteristics", "Dataset", _table(["", "value"], char_rows, data_table="characteristics"))]

    ordinals = doc["ordinal_mcv"]
    table = _table(
        ["", *(f"Meeting {r['ordinal']} ({r['n']})" for r in ordinals)],
        [["mean m-CV", *(_num(r["mean_mcv"]) for r in ordinals)]],
        data_table="ordinal-mcv",
    )
    values = ordinal_mcv_values(corpus, segment)
    if values:
        plot = render_boxplot_svg([five_number_summary(v) for v in values.values()],
                                  [f"Meeting {k}" for k in values], title="m-CV by meeting ordinal")
    else:
        plot = _empty("No meetings with an m-CV.")
    sections.append(_section("ordinal-mcv", f"m-CV by meeting ({SEGMENT_TITLES[segment]})", table + "\n" + plot))

    slopes = {seg: s for seg, s in cohort_slopes(corpus).items() if s is not None}
    slope_rows = [
        [SEGMENT_TITLES[seg], _num(s.mean), str(s.n_students), str(s.n_excluded)] for seg, s in slopes.items()
    ]
    table = _table(["segment", "mean slope", "students", "excluded"], slope_rows, data_table="slopes")
    if slopes:
        plot = render_boxplot_svg([s.summary for s in slopes.values()], [SEGMENT_TITLES[seg] for seg in slopes],
                                  title="i-CV trend slopes")
    else:
        plot = _empty("No student has enough meetings for a slope.")
    sections.append(_section("slopes", "i-CV trend slopes", table + "\n" + plot))
    sections.append(f"<p>config {escape(corpus.config.fingerprint)}; quartiles: {escape(doc['quartile_method'])}</p>")
    return _page("Cohort report", sections)
