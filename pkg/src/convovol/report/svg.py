"""Static SVG panels: timeline, participation pie, volatility bars, turn chord
and box plots.

Every position is an affine function of the data on a 1000 px wide canvas
and is rounded to 0.01 px. Shapes carry ``data-*`` attributes naming what
they represent, so tests and tools can find them without guessing.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

from ..conversation import Meeting
from ..longitudinal import FiveNumberSummary
from ..turn_taking import ChordData
from ..volatility import Segment

WIDTH = 1000
PALETTE = (
    "#1f77b4", "#d62728", "#ffbf00", "#2ca02c", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22",
)

# timeline
TIMELINE_X0 = 120.0
TIMELINE_X1 = 980.0
TIMELINE_ROW_H = 24.0
TIMELINE_ROW_GAP = 6.0
TIMELINE_TOP = 10.0

# pie
PIE_CX, PIE_CY, PIE_R = 500.0, 220.0, 200.0

# bars
BAR_BASELINE = 350.0
BAR_MAX_H = 300.0
BAR_W = 160.0
BAR_SEGMENTS = (Segment.WHOLE, Segment.FIRST_HALF, Segment.SECOND_HALF)
BAR_LABELS = {Segment.WHOLE: "whole", Segment.FIRST_HALF: "first half", Segment.SECOND_HALF: "second half"}

# chord
CHORD_CX, CHORD_CY, CHORD_R = 500.0, 380.0, 300.0
CHORD_MAX_STROKE = 40.0

# box plots
BOX_TOP = 40.0
BOX_BOTTOM = 440.0
BOX_W = 80.0


class DegenerateInput(ValueError):
    pass


class EmptyMeeting(DegenerateInput):
    pass


def fmt(v: float) -> str:
    text = f"{v:.2f}"
    return "0.00" if text == "-0.00" else text


def color(i: int) -> str:
    return PALETTE[i % len(PALETTE)]


def _svg(height: float, body: list[str], title: str) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{fmt(height)}" '
        f'viewBox="0 0 {WIDTH} {fmt(height)}" font-family="sans-serif" font-size="12">'
    )
    return "\n".join([head, f"<title>{escape(title)}</title>", *body, "</svg>"])


def _text(x: float, y: float, label: str, anchor: str = "middle", **attrs) -> str:
    extra = "".join(f" {k.replace('_', '-')}={quoteattr(str(v))}" for k, v in attrs.items())
    return f'<text x="{fmt(x)}" y="{fmt(y)}" text-anchor="{anchor}"{extra}>{escape(label)}</text>'


def timeline_x(t_ms: float, span: tuple[int, int]) -> float:
    length = max(span[1] - span[0], 1)
    return TIMELINE_X0 + (t_ms - span[0]) / length * (TIMELINE_X1 - TIMELINE_X0)


def render_timeline_svg(meeting: Meeting) -> str:
    """One row per participant, one rectangle per utterance."""
    span = meeting.span_ms
    if span is None:
        raise EmptyMeeting("timeline needs at least one utterance")
    rows = {who: i for i, who in enumerate(meeting.participants)}
    body = []
    for who, i in rows.items():
        y = TIMELINE_TOP + i * (TIMELINE_ROW_H + TIMELINE_ROW_GAP)
        body.append(_text(TIMELINE_X0 - 8, y + TIMELINE_ROW_H * 0.7, who, anchor="end"))
    for u in meeting.utterances:
        i = rows[u.speaker_id]
        x0, x1 = timeline_x(u.start_ms, span), timeline_x(u.end_ms, span)
        y = TIMELINE_TOP + i * (TIMELINE_ROW_H + TIMELINE_ROW_GAP)
        body.append(
            f'<rect x="{fmt(x0)}" y="{fmt(y)}" width="{fmt(x1 - x0)}" height="{fmt(TIMELINE_ROW_H)}" '
            f'fill="{color(i)}" data-speaker={quoteattr(u.speaker_id)} '
            f'data-start="{u.start_ms / 1000:.3f}" data-end="{u.end_ms / 1000:.3f}"/>'
        )
    height = TIMELINE_TOP * 2 + len(rows) * (TIMELINE_ROW_H + TIMELINE_ROW_GAP) + 14
    body.append(_text(TIMELINE_X0, height - 6, f"{span[0] / 1000:.1f} s", anchor="start"))
    body.append(_text(TIMELINE_X1, height - 6, f"{span[1] / 1000:.1f} s", anchor="end"))
    return _svg(height, body, "Speaker timeline")


def pie_point(angle_deg: float) -> tuple[float, float]:
    """Point on the pie rim; 0 degrees is twelve o'clock, angles run clockwise."""
    rad = math.radians(angle_deg)
    return PIE_CX + PIE_R * math.sin(rad), PIE_CY - PIE_R * math.cos(rad)


def render_pie_svg(shares: Mapping[str, float | None]) -> str:
    """Sectors with angles proportional to each speaker's share, clockwise from the top."""
    values = {k: (v or 0.0) for k, v in shares.items()}
    total = math.fsum(values.values())
    if total <= 0:
        raise DegenerateInput("pie needs shares summing to more than 0")
    body = []
    angle = 0.0
    for i, (who, share) in enumerate(values.items()):
        sweep = share / total * 360.0
        attrs = (f'fill="{color(i)}" data-speaker={quoteattr(who)} data-share="{share:.3f}" '
                 f'data-start-angle="{fmt(angle)}" data-end-angle="{fmt(angle + sweep)}"')
        if sweep >= 360.0 - 1e-9:
            body.append(f'<circle cx="{fmt(PIE_CX)}" cy="{fmt(PIE_CY)}" r="{fmt(PIE_R)}" {attrs}/>')
        elif sweep > 0:
            (x0, y0), (x1, y1) = pie_point(angle), pie_point(angle + sweep)
            large = 1 if sweep > 180 else 0
            d = (f"M {fmt(PIE_CX)} {fmt(PIE_CY)} L {fmt(x0)} {fmt(y0)} "
                 f"A {fmt(PIE_R)} {fmt(PIE_R)} 0 {large} 1 {fmt(x1)} {fmt(y1)} Z")
            body.append(f'<path d="{d}" {attrs}/>')
        angle += sweep
    legend_y = PIE_CY + PIE_R + 30
    for i, (who, share) in enumerate(values.items()):
        y = legend_y + i * 18
        body.append(f'<rect x="420" y="{fmt(y - 10)}" width="12" height="12" fill="{color(i)}"/>')
        body.append(_text(440, y, f"{who}: {share * 100:.1f}%", anchor="start"))
    return _svg(legend_y + len(values) * 18 + 10, body, "Participation share")


def bar_slot_x(slot: int) -> float:
    """Centre of a bar slot."""
    return WIDTH / len(BAR_SEGMENTS) * (slot + 0.5)


def render_cv_bars_svg(mcv: Mapping[Segment | str, float | None]) -> str:
    """Bars for whole/first/second-half volatility, heights proportional to value.

    The largest value spans the full bar height; absent values leave a
    labelled empty slot.
    """
    values = {seg: mcv.get(seg, mcv.get(seg.value)) for seg in BAR_SEGMENTS}
    present = [v for v in values.values() if v is not None]
    top = max(present, default=0.0)
    body = [f'<line x1="0" y1="{fmt(BAR_BASELINE)}" x2="{WIDTH}" y2="{fmt(BAR_BASELINE)}" stroke="#333"/>']
    for slot, (seg, value) in enumerate(values.items()):
        cx = bar_slot_x(slot)
        body.append(_text(cx, BAR_BASELINE + 20, BAR_LABELS[seg]))
        if value is None:
            body.append(
                f'<rect x="{fmt(cx - BAR_W / 2)}" y="{fmt(BAR_BASELINE - BAR_MAX_H)}" width="{fmt(BAR_W)}" '
                f'height="{fmt(BAR_MAX_H)}" fill="none" stroke="#999" stroke-dasharray="4 4" '
                f'data-segment="{seg.value}" data-empty="true"/>'
            )
            body.append(_text(cx, BAR_BASELINE - BAR_MAX_H / 2, "n/a", fill="#999"))
            continue
        h = value / top * BAR_MAX_H if top > 0 else 0.0
        body.append(
            f'<rect x="{fmt(cx - BAR_W / 2)}" y="{fmt(BAR_BASELINE - h)}" width="{fmt(BAR_W)}" '
            f'height="{fmt(h)}" fill="#1f77b4" data-segment="{seg.value}" data-value="{value:.3f}"/>'
        )
        body.append(_text(cx, BAR_BASELINE - h - 6, f"{value:.3f}"))
    return _svg(BAR_BASELINE + 40, body, "Conversational volatility")


def chord_angle(i: int, n: int) -> float:
    """Centre angle (degrees, clockwise from twelve o'clock) of speaker ``i``'s arc."""
    return 360.0 / n * i


def _chord_point(angle_deg: float, radius: float = CHORD_R) -> tuple[float, float]:
    rad = math.radians(angle_deg)
    return CHORD_CX + radius * math.sin(rad), CHORD_CY - radius * math.cos(rad)


def render_chord_svg(chord: ChordData, speakers: Sequence[str]) -> str:
    """Speakers as arcs on a circle joined by quadratic ribbons.

    Ribbon stroke width is proportional to its weight (weight 1 draws at
    ``CHORD_MAX_STROKE``). Outgoing ribbons leave just before a speaker's arc
    centre and incoming ones arrive just after it, so A->B and B->A stay apart.
    """
    if not chord.ribbons:
        raise DegenerateInput("chord diagram needs at least one ribbon")
    n = len(speakers)
    pos = {who: i for i, who in enumerate(speakers)}
    half = 360.0 / n / 2 * 0.8
    offset = half / 3
    body = [f'<circle cx="{fmt(CHORD_CX)}" cy="{fmt(CHORD_CY)}" r="{fmt(CHORD_R)}" fill="none" stroke="#eee"/>']
    for who, i in pos.items():
        c = chord_angle(i, n)
        (x0, y0), (x1, y1) = _chord_point(c - half), _chord_point(c + half)
        large = 1 if 2 * half > 180 else 0
        body.append(
            f'<path d="M {fmt(x0)} {fmt(y0)} A {fmt(CHORD_R)} {fmt(CHORD_R)} 0 {large} 1 {fmt(x1)} {fmt(y1)}" '
            f'fill="none" stroke="{color(i)}" stroke-width="12" data-arc={quoteattr(who)}/>'
        )
        lx, ly = _chord_point(c, CHORD_R + 28)
        cont = chord.self_continuation.get(who)
        label = who if cont is None else f"{who} (self {cont * 100:.0f}%)"
        body.append(_text(lx, ly, label))
    for r in chord.ribbons:
        i, j = pos[r.source], pos[r.target]
        (x0, y0) = _chord_point(chord_angle(i, n) - offset, CHORD_R - 8)
        (x1, y1) = _chord_point(chord_angle(j, n) + offset, CHORD_R - 8)
        body.append(
            f'<path d="M {fmt(x0)} {fmt(y0)} Q {fmt(CHORD_CX)} {fmt(CHORD_CY)} {fmt(x1)} {fmt(y1)}" fill="none" '
            f'stroke="{color(i)}" stroke-opacity="0.6" stroke-width="{fmt(r.weight * CHORD_MAX_STROKE)}" '
            f'data-from={quoteattr(r.source)} data-to={quoteattr(r.target)} data-weight="{r.weight:.3f}"/>'
        )
    return _svg(CHORD_CY + CHORD_R + 60, body, "Turn-taking flow")


def box_scale(summaries: Sequence[FiveNumberSummary]) -> tuple[float, float]:
    lo = min(s.min for s in summaries)
    hi = max(s.max for s in summaries)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    return lo, hi


def box_y(value: float, scale: tuple[float, float]) -> float:
    lo, hi = scale
    return BOX_BOTTOM - (value - lo) / (hi - lo) * (BOX_BOTTOM - BOX_TOP)


def box_slot_x(slot: int, n: int) -> float:
    return 60 + (WIDTH - 80) / n * (slot + 0.5)


def render_boxplot_svg(summaries: Sequence[FiveNumberSummary], labels: Sequence[str] | None = None,
                       title: str = "Distribution") -> str:
    """Box-and-whisker plots on a shared vertical scale: whiskers at min and
    max, box from q1 to q3, a line at the median."""
    if not summaries:
        raise DegenerateInput("box plot needs at least one summary")
    labels = list(labels) if labels is not None else [str(i + 1) for i in range(len(summaries))]
    scale = box_scale(summaries)
    body = [
        f'<line x1="50" y1="{fmt(BOX_TOP)}" x2="50" y2="{fmt(BOX_BOTTOM)}" stroke="#333"/>',
        _text(44, box_y(scale[1], scale) + 4, f"{scale[1]:.2f}", anchor="end"),
        _text(44, box_y(scale[0], scale) + 4, f"{scale[0]:.2f}", anchor="end"),
    ]
    if scale[0] < 0 < scale[1]:
        y0 = box_y(0.0, scale)
        body.append(f'<line x1="50" y1="{fmt(y0)}" x2="{WIDTH - 10}" y2="{fmt(y0)}" stroke="#ccc" '
                    f'stroke-dasharray="3 3"/>')
    n = len(summaries)
    for slot, (s, label) in enumerate(zip(summaries, labels)):
        cx = box_slot_x(slot, n)
        left, right = cx - BOX_W / 2, cx + BOX_W / 2
        y = {k: box_y(getattr(s, k), scale) for k in ("min", "q1", "median", "q3", "max")}
        group = quoteattr(label)
        body += [
            f'<line x1="{fmt(cx)}" y1="{fmt(y["max"])}" x2="{fmt(cx)}" y2="{fmt(y["q3"])}" stroke="#333"/>',
            f'<line x1="{fmt(cx)}" y1="{fmt(y["q1"])}" x2="{fmt(cx)}" y2="{fmt(y["min"])}" stroke="#333"/>',
            f'<line x1="{fmt(left + 20)}" y1="{fmt(y["max"])}" x2="{fmt(right - 20)}" y2="{fmt(y["max"])}" '
            f'stroke="#333" data-box={group} data-role="max"/>',
            f'<line x1="{fmt(left + 20)}" y1="{fmt(y["min"])}" x2="{fmt(right - 20)}" y2="{fmt(y["min"])}" '
            f'stroke="#333" data-box={group} data-role="min"/>',
            f'<rect x="{fmt(left)}" y="{fmt(y["q3"])}" width="{fmt(BOX_W)}" height="{fmt(y["q1"] - y["q3"])}" '
            f'fill="#9ecae1" stroke="#333" data-box={group} data-role="box"/>',
            f'<line x1="{fmt(left)}" y1="{fmt(y["median"])}" x2="{fmt(right)}" y2="{fmt(y["median"])}" '
            f'stroke="#d62728" stroke-width="2" data-box={group} data-role="median"/>',
            _text(cx, BOX_BOTTOM + 20, f"{label} ({s.n})"),
        ]
    return _svg(BOX_BOTTOM + 40, body, title)
